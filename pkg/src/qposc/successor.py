"""Poincare map Phi, successor map psi, torus map g, orbits and ensembles.

Two integrators for the transformed system over one angle period
[pi/2, 5 pi/2]:

* :func:`poincare_Phi` uses adaptive DOP853 on a single point and is the
  accurate reference used by the cross-route and determinant checks.
* :func:`phi_batch` is a fixed-step classical RK4 over a batch of points,
  each with its own forcing phase.  The step sequence is identical for every
  point, so a point's result does not depend on which batch it sits in; this
  is what makes ensemble output independent of chunking and thread count.

Both integrate the deviations (varphi - varphi0, calI - calI0) and shift the
forcing so that every integration starts at varphi = 0, which keeps phases
small and preserves precision over long orbits.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import linregress

from .errors import DomainError, InvariantBreach, NumericError
from .forcing import TorusForcing, TorusPoint
from .special_functions import HALF_PI, TWO_PI
from .transforms import (Model, Thresholds, _h1_core, _h1_field_from_core, backward_chain,
                         forward_chain)

TAU0 = HALF_PI
TAU1 = HALF_PI + TWO_PI
SANDWICH = 4.0


@dataclass(frozen=True)
class SuccessorPoint:
    varphi0: float
    calI0: float


@dataclass(frozen=True)
class TorusMapPoint:
    theta: TorusPoint
    calI: float


@dataclass(frozen=True)
class PhiResult:
    varphi1: float
    calI1: float
    ratio_min: float
    ratio_max: float
    dvarphi: float  # increments, exact to working precision
    dcalI: float


def _require_above(th: Thresholds | None, calI, what="calI0"):
    if th is not None and np.any(np.asarray(calI) <= th.calI_top):
        raise DomainError(f"{what} must exceed calI^*={th.calI_top:.6g}")


class SandwichLog:
    """Running record of calI(tau)/calI0 over every Phi integration (thread-safe)."""

    def __init__(self):
        self._lock = threading.Lock()
        self.reset()

    def reset(self):
        with self._lock:
            self.integrations = 0
            self.violations = 0
            self.ratio_min = 1.0
            self.ratio_max = 1.0

    def add(self, rmin, rmax):
        rmin = np.atleast_1d(rmin)
        rmax = np.atleast_1d(rmax)
        bad = int(np.sum((rmin < 1.0 / SANDWICH) | (rmax > SANDWICH)))
        with self._lock:
            self.integrations += len(rmin)
            self.violations += bad
            self.ratio_min = min(self.ratio_min, float(np.min(rmin)))
            self.ratio_max = max(self.ratio_max, float(np.max(rmax)))
        return bad

    def snapshot(self) -> dict:
        with self._lock:
            return dict(integrations=self.integrations, violations=self.violations,
                        ratio_min=self.ratio_min, ratio_max=self.ratio_max)


SANDWICH_LOG = SandwichLog()


def _check_sandwich(rmin, rmax):
    if SANDWICH_LOG.add(rmin, rmax):
        raise InvariantBreach(
            f"calI(tau)/calI0 left [1/4, 4]: range [{np.min(rmin):.4g}, {np.max(rmax):.4g}]")


def poincare_Phi(model: Model, pt: SuccessorPoint, tol: float = 1e-12) -> PhiResult:
    """Time-2pi map of the transformed flow from tau = pi/2, adaptive."""
    _require_above(model.thresholds, pt.calI0)
    if not tol > 0:
        raise DomainError("tol must be positive")
    v0, J0 = float(pt.varphi0), float(pt.calI0)
    m = Model(model.params, model.table, model.forcing.shifted(v0), model.thresholds)
    P = m.params

    def rhs(tau, y):
        w = _h1_core(m, y[0], J0 + y[1], tau)
        return np.array(_h1_field_from_core(P, w), dtype=float)

    scale = max(1.0, abs(J0) ** P.b_alpha)
    sol = solve_ivp(rhs, (TAU0, TAU1), [0.0, 0.0], method="DOP853", rtol=tol,
                    atol=[tol * 1e-2, tol * 1e-2 * scale])
    if not sol.success:
        raise NumericError(f"Phi integration failed: {sol.message}")
    ratio = 1.0 + sol.y[1] / J0
    rmin, rmax = float(ratio.min()), float(ratio.max())
    _check_sandwich(rmin, rmax)
    dv, dJ = float(sol.y[0, -1]), float(sol.y[1, -1])
    return PhiResult(v0 + dv, J0 + dJ, rmin, rmax, dv, dJ)


def _batch_field(model: Model, varphi, calI, tau, c_tab=None):
    return _h1_field_from_core(model.params, _h1_core(model, varphi, calI, tau))


def phi_batch(model: Model, calI0, n_steps: int = 64, varphi0=0.0, engine: str = "numba"):
    """Fixed-step RK4 version of Phi for a batch (forcing phase per member).

    Returns (dvarphi, dcalI, ratio_min, ratio_max) where the first two are
    the increments over one period.  ``engine`` selects the compiled kernel
    ("numba") or the vectorised numpy reference ("numpy").
    """
    calI0 = np.asarray(calI0, dtype=float)
    m = model
    if np.any(np.asarray(varphi0) != 0.0):
        m = Model(model.params, model.table, model.forcing.shifted(varphi0), model.thresholds)
    if engine == "numba":
        out = _phi_batch_compiled(m, calI0, n_steps)
        _check_sandwich(out[2], out[3])
        return out
    if engine != "numpy":
        raise DomainError(f"unknown engine {engine!r}")
    h = TWO_PI / n_steps
    dphi = np.zeros_like(calI0)
    dJ = np.zeros_like(calI0)
    rmin = np.ones_like(calI0)
    rmax = np.ones_like(calI0)
    for i in range(n_steps):
        tau = TAU0 + i * h
        k1p, k1J = _batch_field(m, dphi, calI0 + dJ, tau)
        k2p, k2J = _batch_field(m, dphi + 0.5 * h * k1p, calI0 + dJ + 0.5 * h * k1J, tau + 0.5 * h)
        k3p, k3J = _batch_field(m, dphi + 0.5 * h * k2p, calI0 + dJ + 0.5 * h * k2J, tau + 0.5 * h)
        k4p, k4J = _batch_field(m, dphi + h * k3p, calI0 + dJ + h * k3J, tau + h)
        dphi = dphi + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        dJ = dJ + h / 6.0 * (k1J + 2 * k2J + 2 * k3J + k4J)
        r = 1.0 + dJ / calI0
        rmin = np.minimum(rmin, r)
        rmax = np.maximum(rmax, r)
    _check_sandwich(rmin, rmax)
    return dphi, dJ, rmin, rmax


def _phi_batch_compiled(m: Model, calI0, n_steps: int):
    from . import _kernels

    calI0 = np.ascontiguousarray(np.atleast_1d(calI0), dtype=float)
    B = len(calI0)
    T = m.forcing.torus
    ph = np.broadcast_to(m.forcing.phase0, (B, T.n_terms))
    ph = np.ascontiguousarray(ph - np.floor(ph))
    nu = np.ascontiguousarray(T._nu, dtype=float)
    w1 = TWO_PI * nu
    h = TWO_PI / n_steps
    taus = TAU0 + 0.5 * h * np.arange(2 * n_steps + 1)
    c, _, c1 = m.table.eval(taus)
    out = [np.empty(B) for _ in range(4)]
    _kernels.rk4_period(calI0, ph, nu, T.a, T.b, w1, w1 * w1, _kernels.constants(m.params),
                        np.ascontiguousarray(c), np.ascontiguousarray(c1), h, *out)
    if not np.all(np.isfinite(out[1])):
        raise DomainError("batch left the admissible domain of the implicit Hamiltonian")
    return tuple(out)


# --------------------------------------------------------------------------
# successor map and torus map


def psi_transformed(model: Model, v0: float, t0: float, tol: float = 1e-12):
    """Successor map through the transformed coordinates; returns (v1, t1)."""
    th = model.thresholds
    if th is not None and not v0 < th.v_star:
        raise DomainError(f"v0={v0} is not below v_*={th.v_star:.6g}")
    if not v0 < 0:
        raise DomainError("v0 must be negative")
    varphi0, calI0 = forward_chain(model, v0, t0)
    res = poincare_Phi(model, SuccessorPoint(float(varphi0), float(calI0)), tol)
    v1, t1 = backward_chain(model, res.varphi1, res.calI1)
    return float(v1), float(t1)


def _model_at(model: Model, theta) -> Model:
    return model.at_phase(theta)


def torus_F_G(model: Model, theta0: TorusPoint, calI0: float, tol: float = 1e-12):
    """(F, G): increments of varphi and calI over one period for the forcing at theta0."""
    m = _model_at(model, theta0)
    res = poincare_Phi(m, SuccessorPoint(0.0, calI0), tol)
    return res.dvarphi, res.dcalI


def g_map(model: Model, pt: TorusMapPoint, tol: float = 1e-12) -> TorusMapPoint:
    F, G = torus_F_G(model, pt.theta, pt.calI, tol)
    omega = model.forcing.torus.omega
    shift = TorusPoint(tuple(F * w for w in omega))
    return TorusMapPoint(pt.theta + shift, pt.calI + G)


def _advance_theta(theta: np.ndarray, F: np.ndarray, omega) -> np.ndarray:
    th = theta + F[..., None] * np.asarray(omega)
    return th - np.floor(th)


# --------------------------------------------------------------------------
# finite-difference Jacobians


def richardson_jacobian(fun, x0, h):
    """Central differences at steps h and h/2 combined by Richardson extrapolation.

    ``fun`` maps a length-n array to a length-m array; ``h`` holds one step per
    coordinate.
    """
    x0 = np.asarray(x0, dtype=float)
    h = np.asarray(h, dtype=float)
    cols = []
    for j in range(len(x0)):
        def d(step):
            e = np.zeros_like(x0)
            e[j] = step
            return (np.asarray(fun(x0 + e)) - np.asarray(fun(x0 - e))) / (2 * step)
        cols.append((4 * d(h[j] / 2) - d(h[j])) / 3)
    return np.column_stack(cols)


def det_DPhi(model: Model, pt: SuccessorPoint, tol: float = 1e-12, rel_step: float = 1e-4):
    def fun(x):
        r = poincare_Phi(model, SuccessorPoint(x[0], x[1]), tol)
        return np.array([r.varphi1, r.calI1])

    J = richardson_jacobian(fun, [pt.varphi0, pt.calI0], [rel_step, rel_step * pt.calI0])
    return float(np.linalg.det(J))


def g_determinant(model: Model, theta0: TorusPoint, calI0: float, tol: float = 1e-12,
                  rel_step: float = 1e-4):
    """(1 + d_w F)(1 + d_I G) - d_I F d_w G, with d_w the derivative along omega."""
    omega = model.forcing.torus.omega

    def fun(x):
        th = theta0 + TorusPoint(tuple(x[0] * w for w in omega))
        return np.array(torus_F_G(model, th, x[1], tol))

    J = richardson_jacobian(fun, [0.0, calI0], [rel_step, rel_step * calI0])
    return float((1 + J[0, 0]) * (1 + J[1, 1]) - J[0, 1] * J[1, 0])


# --------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitPolicy:
    growth_factor: float = 4.0
    delta: float = 0.05
    burn_in: int | None = None  # default n_max // 10
    n_steps: int = 64
    record_stride: int = 1

    def __post_init__(self):
        if not self.growth_factor > 1:
            raise DomainError("growth_factor must exceed 1")
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        if self.n_steps < 4 or self.record_stride < 1:
            raise DomainError("n_steps >= 4 and record_stride >= 1 required")

    def burn(self, n_max: int) -> int:
        return self.burn_in if self.burn_in is not None else max(1, n_max // 10)


@dataclass
class OrbitSummary:
    n_completed: int
    iterates: list  # (n, t_n, v_n, varphi_n, calI_n, theta_n)
    left_domain: bool
    escape_suspect: bool
    recurrence_count: int
    growth_ratio: float
    calI_trace: np.ndarray = field(repr=False, default=None)


@dataclass
class _BatchState:
    theta: np.ndarray   # (B, N) orbit's torus point at iterate n
    calI: np.ndarray    # (B,)
    varphi: np.ndarray  # (B,) planar lift
    theta0: np.ndarray  # (B, N) base phase Theta


def _record(model: Model, st: _BatchState, n: int, idx):
    """Rows (n, t, v, varphi, calI, theta) for the orbits in ``idx``."""
    if len(idx) == 0:
        return []
    m = model.at_phase(st.theta[idx])
    v, q = backward_chain(m, np.zeros(len(idx)), st.calI[idx])
    t = st.varphi[idx] + q
    return [(n, float(t[j]), float(v[j]), float(st.varphi[idx][j]), float(st.calI[idx][j]),
             tuple(float(c) for c in st.theta[idx][j])) for j in range(len(idx))]


def iterate_batch(model: Model, theta0, varphi0, calI0, n_max: int, policy: OrbitPolicy):
    """Iterate g on a batch of orbits; returns per-orbit summaries.

    ``theta0`` (B, N) are the base phases Theta, ``varphi0`` the planar start
    positions; the torus point of orbit b is Theta_b + iota(varphi_b).
    """
    th = model.thresholds
    torus = model.forcing.torus
    theta0 = np.atleast_2d(np.asarray(theta0, dtype=float))
    varphi0 = np.asarray(varphi0, dtype=float).reshape(-1)
    calI0 = np.asarray(calI0, dtype=float).reshape(-1)
    B = len(calI0)
    _require_above(th, calI0)
    st = _BatchState(_advance_theta(theta0, varphi0, torus.omega), calI0.copy(),
                     varphi0.copy(), theta0)
    active = np.ones(B, dtype=bool)
    trace = np.full((B, n_max + 1), np.nan)
    trace[:, 0] = calI0
    rows = [[] for _ in range(B)]
    for j, r in enumerate(_record(model, st, 0, np.arange(B))):
        rows[j].append(r)
    n_done = np.zeros(B, dtype=int)
    floor_ = th.calI_top if th is not None else 0.0
    for n in range(1, n_max + 1):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        m = model.at_phase(st.theta[idx])
        F, G, rmin, rmax = phi_batch(m, st.calI[idx], policy.n_steps)
        st.calI[idx] += G
        st.varphi[idx] += F
        st.theta[idx] = _advance_theta(st.theta[idx], F, torus.omega)
        trace[idx, n] = st.calI[idx]
        n_done[idx] = n
        if not np.all(np.isfinite(st.calI[idx])):
            raise NumericError("non-finite calI during iteration")
        below = idx[st.calI[idx] <= floor_]
        active[below] = False
        rec = idx[(n % policy.record_stride == 0) | (n == n_max)]
        rec = np.union1d(rec, below)
        # inverse chain is undefined below the floor; record calI only
        ok = rec[st.calI[rec] > floor_]
        for j, r in zip(ok, _record(model, st, n, ok)):
            rows[j].append(r)
        for j in np.setdiff1d(rec, ok):
            rows[j].append((n, math.nan, math.nan, float(st.varphi[j]), float(st.calI[j]),
                            tuple(float(c) for c in st.theta[j])))
    burn = policy.burn(n_max)
    out = []
    for b in range(B):
        nc = int(n_done[b])
        tr = trace[b, : nc + 1]
        ratio = tr / calI0[b]
        post = ratio[burn + 1:] if nc > burn else np.array([])
        esc = bool(len(post) > 0 and np.all(post > policy.growth_factor))
        rec_count = int(np.sum(np.abs(tr[1:] - calI0[b]) < policy.delta * calI0[b]))
        out.append(OrbitSummary(nc, rows[b], bool(not active[b]), esc, rec_count,
                                float(np.max(ratio)), tr))
    return out


def iterate_orbit(model: Model, start, n_max: int, policy: OrbitPolicy = OrbitPolicy()):
    """Iterate from a TorusMapPoint or a planar start (v0, t0) at the model's phase."""
    if isinstance(start, TorusMapPoint):
        theta0 = start.theta.as_array()
        varphi0, calI0 = 0.0, start.calI
    else:
        v0, t0 = start
        th = model.thresholds
        if th is not None and not v0 < th.v_star:
            raise DomainError(f"v0={v0} is not below v_*={th.v_star:.6g}")
        varphi0, calI0 = forward_chain(model, v0, t0)
        theta0 = _phase_point(model)
    return iterate_batch(model, theta0[None, :], [varphi0], [calI0], n_max, policy)[0]


def _phase_point(model: Model) -> np.ndarray:
    """A torus point reproducing the model's phase (stored on the model)."""
    pt = getattr(model.forcing, "theta", None)
    if pt is None:
        raise DomainError("model was not built from a torus point; pass a TorusMapPoint")
    return np.asarray(pt, dtype=float)


# --------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class EnsembleConfig:
    n_theta: int = 64
    n_orbits: int = 256
    n_max: int = 1000
    calI_lo: float = 1e4
    calI_hi: float = 1e5
    seed: int = 42
    policy: OrbitPolicy = OrbitPolicy(n_steps=16, record_stride=100)
    gap_levels: tuple = (1e3, 1e4, 1e5, 1e6, 1e7)
    gap_samples: int = 64
    n_det: int = 4
    threads: int = 1
    chunk: int = 2048

    def __post_init__(self):
        if min(self.n_theta, self.n_orbits, self.n_max) < 1:
            raise DomainError("counts must be positive")
        if not 0 < self.calI_lo <= self.calI_hi:
            raise DomainError("need 0 < calI_lo <= calI_hi")
        if self.threads < 0 or self.chunk < 1:
            raise DomainError("threads >= 0 and chunk >= 1 required")


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    ci95: tuple
    r2: float
    x: list
    y: list

    def as_dict(self):
        return dict(slope=self.slope, intercept=self.intercept, stderr=self.stderr,
                    ci95=list(self.ci95), r2=self.r2, x=self.x, y=self.y)


def loglog_fit(x, y) -> SlopeFit | None:
    """Least-squares slope of log y against log x with a 95% band; None if degenerate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 3:
        return None
    lx, ly = np.log(x[ok]), np.log(y[ok])
    r = linregress(lx, ly)
    from scipy.stats import t as student_t
    q = student_t.ppf(0.975, ok.sum() - 2)
    return SlopeFit(float(r.slope), float(r.intercept), float(r.stderr),
                    (float(r.slope - q * r.stderr), float(r.slope + q * r.stderr)),
                    float(r.rvalue ** 2), x[ok].tolist(), y[ok].tolist())


def gap_scan(model: Model, levels, n_samples: int, seed: int, n_steps: int = 64,
             adaptive: bool = False, tol: float = 1e-12):
    """Max one-step gap |calI1 - calI0| over random (varphi0, Theta) per level."""
    torus = model.forcing.torus
    rng = np.random.default_rng(seed)
    thetas = rng.random((n_samples, torus.N))
    phis = rng.random(n_samples) * TWO_PI
    gaps = []
    for L in levels:
        if adaptive:
            g = [abs(torus_F_G(model, TorusPoint(tuple(_advance_theta(thetas[i], phis[i],
                                                                        torus.omega))), L, tol)[1])
                 for i in range(n_samples)]
        else:
            th = _advance_theta(thetas, phis, torus.omega)
            _, G, _, _ = phi_batch(model.at_phase(th), np.full(n_samples, float(L)), n_steps)
            g = np.abs(G)
        gaps.append(np.asarray(g))
    return np.array(gaps)


@dataclass
class EnsembleResult:
    config: EnsembleConfig
    orbits: list  # (orbit_id, theta0 tuple, OrbitSummary)
    escape_fraction: float
    left_domain_fraction: float
    max_growth_ratio: float
    recurrence_mean: float
    recurrence_min: int
    gap_fit: SlopeFit | None
    gap_max: list
    gap_bound_violations: int
    det_max_dev: float
    certificate_applications: int
    certificate_violations: int
    rk4_abs_err: float = 0.0

    def summary(self) -> dict:
        return dict(n_orbits=len(self.orbits), escape_fraction=self.escape_fraction,
                    left_domain_fraction=self.left_domain_fraction,
                    max_growth_ratio=self.max_growth_ratio,
                    recurrence_mean=self.recurrence_mean, recurrence_min=self.recurrence_min,
                    gap_fit=self.gap_fit.as_dict() if self.gap_fit else None,
                    gap_max=self.gap_max, gap_bound_violations=self.gap_bound_violations,
                    det_max_dev=self.det_max_dev,
                    certificate_applications=self.certificate_applications,
                    certificate_violations=self.certificate_violations,
                    rk4_abs_err=self.rk4_abs_err, n_steps=self.config.policy.n_steps)


def _sample_ensemble(torus: TorusForcing, cfg: EnsembleConfig):
    rng = np.random.default_rng(cfg.seed)
    thetas = rng.random((cfg.n_theta, torus.N))
    B = cfg.n_theta * cfg.n_orbits
    varphi0 = rng.random(B) * TWO_PI
    # log-uniform in calI0
    calI0 = np.exp(rng.uniform(math.log(cfg.calI_lo), math.log(cfg.calI_hi), B))
    theta_b = np.repeat(thetas, cfg.n_orbits, axis=0)
    return theta_b, varphi0, calI0


def ensemble_run(model: Model, cfg: EnsembleConfig, progress=None) -> EnsembleResult:
    """Seeded ensemble of orbits plus gap-scaling and determinant diagnostics."""
    th = model.thresholds
    torus = model.forcing.torus
    theta_b, varphi0, calI0 = _sample_ensemble(torus, cfg)
    _require_above(th, calI0)
    B = len(calI0)
    chunks = [np.arange(s, min(B, s + cfg.chunk)) for s in range(0, B, cfg.chunk)]

    def work(ix):
        res = iterate_batch(model, theta_b[ix], varphi0[ix], calI0[ix], cfg.n_max, cfg.policy)
        if progress is not None:
            progress(len(ix))
        return res

    workers = cfg.threads if cfg.threads > 0 else None
    if workers == 1:
        parts = [work(ix) for ix in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    summaries = [s for part in parts for s in part]
    orbits = [(i, tuple(theta_b[i]), summaries[i]) for i in range(B)]

    # certificate W(g) <= W + C calI^b_alpha along every recorded application
    C = th.C if th is not None else math.inf
    ba = model.params.b_alpha
    n_app = n_viol = 0
    for s in summaries:
        tr = s.calI_trace[: s.n_completed + 1]
        if len(tr) > 1:
            n_app += len(tr) - 1
            n_viol += int(np.sum(tr[1:] > tr[:-1] + C * tr[:-1] ** ba))

    # the scan is cheap, so it never runs coarser than 64 steps per period
    gaps = gap_scan(model, cfg.gap_levels, cfg.gap_samples, cfg.seed + 1,
                    max(64, cfg.policy.n_steps)) if not torus.is_zero else None
    if gaps is not None:
        gmax = gaps.max(axis=1)
        fit = loglog_fit(cfg.gap_levels, gmax)
        lv = np.asarray(cfg.gap_levels, dtype=float)
        viol = int(np.sum(gaps > C * lv[:, None] ** ba))
        gap_max = gmax.tolist()
    else:
        fit, viol, gap_max = None, 0, [0.0] * len(cfg.gap_levels)

    det_dev = rk4_err = 0.0
    rng = np.random.default_rng(cfg.seed + 2)
    for _ in range(cfg.n_det):
        thp = TorusPoint(tuple(rng.random(torus.N)))
        J0 = float(np.exp(rng.uniform(math.log(cfg.calI_lo), math.log(cfg.calI_hi))))
        det_dev = max(det_dev, abs(g_determinant(model, thp, J0) - 1.0))
        # fixed-step increment against the adaptive one, absolute
        mm = model.at_phase(np.asarray(thp.coords)[None, :])
        G_rk = phi_batch(mm, [J0], cfg.policy.n_steps)[1][0]
        G_ad = poincare_Phi(model.at_phase(np.asarray(thp.coords)),
                            SuccessorPoint(0.0, J0)).dcalI
        rk4_err = max(rk4_err, abs(G_rk - G_ad))

    esc = np.array([s.escape_suspect for s in summaries])
    left = np.array([s.left_domain for s in summaries])
    rec = np.array([s.recurrence_count for s in summaries])
    return EnsembleResult(cfg, orbits, float(esc.mean()), float(left.mean()),
                          float(max(s.growth_ratio for s in summaries)), float(rec.mean()),
                          int(rec.min()), fit, gap_max, viol, det_dev, n_app, n_viol,
                          rk4_err)
