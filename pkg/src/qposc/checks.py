"""Property battery shared by ``qposc verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; ``passed is None`` means skipped
(for instance scaling fits under zero forcing, where every gap vanishes).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import beta as beta_fn

from .direct_flow import psi_direct
from .forcing import TorusForcing, TorusPoint, default_forcing
from .special_functions import TWO_PI, AlphaParams, CSTable, build_table, derive_params
from .successor import (SANDWICH_LOG, EnsembleConfig, OrbitPolicy, det_DPhi, ensemble_run,
                        g_determinant, iterate_batch, loglog_fit, phi_batch, psi_transformed,
                        SuccessorPoint, _advance_theta)
from .transforms import (Model, T_forward, Thresholds, _H_core, compute_thresholds,
                         from_action_angle, h1_vector_field, implicit_residual, remainder_R,
                         remainder_R1, te_vector_field)
from .successor import richardson_jacobian

LAMBDA_ORACLE_A3 = 1.1803406


@dataclass
class CheckResult:
    name: str
    passed: bool | None
    value: float | None = None
    tolerance: float | None = None
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0
    budget: float | None = None

    def line(self) -> str:
        tag = "SKIP" if self.passed is None else ("PASS" if self.passed else "FAIL")
        v = "" if self.value is None else f" value={self.value:.6g}"
        t = "" if self.tolerance is None else f" tol={self.tolerance:.3g}"
        return f"[{tag}] {self.name}{v}{t} ({self.runtime:.1f}s)"

    def as_dict(self) -> dict:
        return dict(name=self.name, passed=self.passed, value=self.value,
                    tolerance=self.tolerance, detail=self.detail,
                    budget=self.budget)


@dataclass(frozen=True)
class CheckContext:
    alpha: float = 3.0
    torus: TorusForcing = field(default_factory=default_forcing)
    theta: tuple = (0.0, 0.0)
    safety: float = 2.0
    tol: float = 1e-12
    seed: int = 0
    det_samples: int = 30
    cross_samples: int = 100
    gap_samples: int = 64
    tamper_kappa1: float = 0.0
    enforce_runtime: bool = True


@dataclass(frozen=True)
class Setup:
    params: AlphaParams
    table: CSTable
    thresholds: Thresholds
    model: Model


@lru_cache(maxsize=16)
def _setup_cached(alpha: float, torus_key, safety: float, tamper: float) -> Setup:
    torus = _TORI[torus_key]
    P = derive_params(alpha)
    if tamper:
        P = replace(P, kappa1=P.kappa1 * (1.0 + tamper))
    tb = build_table(P)
    th = compute_thresholds(P, tb, torus, safety=safety)
    theta = np.zeros(torus.N)
    return Setup(P, tb, th, Model(P, tb, torus.at(theta), th))


_TORI: dict = {}


def setup_for(ctx: CheckContext, alpha: float | None = None) -> Setup:
    key = (ctx.torus.omega, ctx.torus.k.tobytes(), ctx.torus.a.tobytes(), ctx.torus.b.tobytes())
    _TORI[key] = ctx.torus
    s = _setup_cached(float(ctx.alpha if alpha is None else alpha), key, ctx.safety,
                      ctx.tamper_kappa1)
    m = s.model.at_phase(np.asarray(ctx.theta, dtype=float))
    return Setup(s.params, s.table, s.thresholds, m)


def _timed(name, budget, fn, ctx: CheckContext):
    t0 = time.perf_counter()
    res: CheckResult = fn()
    res.runtime = time.perf_counter() - t0
    res.budget = budget
    if res.passed and budget is not None and ctx.enforce_runtime and res.runtime > budget:
        res.passed = False
        res.detail["runtime_exceeded"] = True
    res.name = name
    return res


def _rng(ctx, salt):
    return np.random.default_rng([ctx.seed, salt])


# --------------------------------------------------------------------------
# 1: constants


def lambda_oracle(alpha: float) -> float:
    """Lambda via the Beta-function closed form of the quarter period."""
    w = (1 - alpha) / (alpha + 1)
    T1 = 4 * math.sqrt(2 / (alpha + 1)) * 0.5 * beta_fn((w + 1) / 2, 0.5)
    return (T1 / TWO_PI) ** (2 / (alpha - 1))


def check_constants(ctx: CheckContext) -> CheckResult:
    def run():
        P = derive_params(ctx.alpha)
        if ctx.tamper_kappa1:
            P = replace(P, kappa1=P.kappa1 * (1 + ctx.tamper_kappa1))
        oracle = LAMBDA_ORACLE_A3 if ctx.alpha == 3.0 else lambda_oracle(ctx.alpha)
        lam_err = abs(P.Lambda - oracle)
        ids = P.identity_residuals()
        worst = max(ids.values())
        ok = lam_err < 1e-6 and worst < 1e-12
        return CheckResult("", ok, worst, 1e-12,
                           dict(Lambda=P.Lambda, Lambda_oracle=oracle, Lambda_err=lam_err,
                                identities=ids, gamma=P.gamma, kappa1=P.kappa1,
                                kappa0=P.kappa0, b_alpha=P.b_alpha))
    return _timed("constants", 1.0, run, ctx)


# --------------------------------------------------------------------------
# 2: special-function identity


def check_identity(ctx: CheckContext, alphas=(3.0, 4.0, 5.0)) -> CheckResult:
    def run():
        out, ok = {}, True
        t = np.linspace(-TWO_PI, 2 * TWO_PI, 10_000)
        for a in alphas:
            P = derive_params(a)
            if ctx.tamper_kappa1:
                P = replace(P, kappa1=P.kappa1 * (1 + ctx.tamper_kappa1))
            tb = build_table(P)
            c, s, _ = tb.eval(t)
            res = np.abs(0.5 * s * s + np.abs(c) ** (a + 1) / (a + 1)
                         - P.Lambda ** (a + 1) / (a + 1))
            rel = float(res.max() / P.Lambda ** (a + 1))
            out[str(a)] = rel
            ok &= rel < 1e-9
        return CheckResult("", ok, max(out.values()), 1e-9, dict(per_alpha=out))
    return _timed("special_function_identity", 5.0, run, ctx)


# --------------------------------------------------------------------------
# 3: symplecticity


def det_eta(model: Model, theta: float, r: float, rel_step: float = 1e-4) -> float:
    def fun(x):
        return np.array(from_action_angle(model, x[0], x[1]), dtype=float)
    J = richardson_jacobian(fun, [theta, r], [rel_step, rel_step * r])
    return float(np.linalg.det(J))


def det_T(model: Model, phi: float, I: float, tau: float, rel_step: float = 1e-4) -> float:
    def fun(x):
        ts = T_forward(model, x[0], x[1], tau)
        return np.array([float(ts.varphi), float(ts.calI)])
    J = richardson_jacobian(fun, [phi, I], [rel_step, rel_step * I])
    return float(np.linalg.det(J))


def _calI_window(th: Thresholds, lo: float, hi: float):
    return max(lo, 1.01 * th.calI_top), hi


def check_symplectic(ctx: CheckContext) -> CheckResult:
    def run():
        S = setup_for(ctx)
        m, th = S.model, S.thresholds
        rng = _rng(ctx, 3)
        eta = [abs(det_eta(m, tt, r) - 1) for tt in np.linspace(0, TWO_PI, 20, endpoint=False)
               for r in np.geomspace(1.0, 1e3, 20)]
        Ts = []
        for _ in range(ctx.det_samples):
            I = float(np.exp(rng.uniform(math.log(th.I_star2), math.log(1e6))))
            mm = m.at_phase(rng.random(ctx.torus.N))
            Ts.append(abs(det_T(mm, rng.uniform(0, 10), I, rng.uniform(0, TWO_PI)) - 1))
        lo, hi = _calI_window(th, 1e3, 1e6)
        Ph = []
        for _ in range(ctx.det_samples):
            J0 = float(np.exp(rng.uniform(math.log(lo), math.log(hi))))
            mm = m.at_phase(rng.random(ctx.torus.N))
            Ph.append(abs(det_DPhi(mm, SuccessorPoint(rng.uniform(0, TWO_PI), J0), ctx.tol) - 1))
        e, t_, p = max(eta), max(Ts), max(Ph)
        ok = e < 1e-6 and t_ < 1e-6 and p < 1e-5
        return CheckResult("", ok, max(e, t_, p / 10), 1e-6,
                           dict(det_eta_max_dev=e, det_T_max_dev=t_, det_Phi_max_dev=p,
                                n_eta=len(eta), n_T=len(Ts), n_Phi=len(Ph)))
    return _timed("symplecticity", 120.0, run, ctx)


# --------------------------------------------------------------------------
# 4: implicit Hamiltonian


def measured_bracket(model: Model, levels, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    P = model.params
    rng = np.random.default_rng(seed)
    a0, b0 = [], []
    for L in levels:
        mm = model.at_phase(rng.random((n, model.forcing.torus.N)))
        H = _H_core(mm, rng.uniform(0, 10, n), np.full(n, float(L)), rng.uniform(0, TWO_PI, n))[0]
        q = H / float(L) ** P.k
        a0.append(q.min())
        b0.append(q.max())
    return np.array(a0), np.array(b0)


def check_implicit_H(ctx: CheckContext) -> CheckResult:
    def run():
        S = setup_for(ctx)
        m, th = S.model, S.thresholds
        rng = _rng(ctx, 4)
        n = 1000
        I = np.exp(rng.uniform(math.log(th.I_star), math.log(1e7), n))
        mm = m.at_phase(rng.random((n, ctx.torus.N)))
        phi, tau = rng.uniform(0, 10, n), rng.uniform(0, TWO_PI, n)
        H = _H_core(mm, phi, I, tau)[0]
        res = float(np.max(np.abs(implicit_residual(mm, phi, H, I, tau)) / I))
        levels = [1e3, 1e4, 1e5, 1e6, 1e7]
        a0, b0 = measured_bracket(m, levels, 1000, [ctx.seed, 44])
        var_a = float((a0.max() - a0.min()) / a0.mean())
        var_b = float((b0.max() - b0.min()) / b0.mean())
        inside = bool(np.all(a0 >= th.alpha0 * (1 - 1e-12)) and np.all(b0 <= th.beta0 * (1 + 1e-12)))
        ok = res < 1e-10 and var_a < 0.05 and var_b < 0.05 and inside
        return CheckResult("", ok, res, 1e-10,
                           dict(alpha0_measured=a0.tolist(), beta0_measured=b0.tolist(),
                                alpha0_variation=var_a, beta0_variation=var_b,
                                alpha0_bound=th.alpha0, beta0_bound=th.beta0,
                                inside_constructive_bracket=inside))
    return _timed("implicit_hamiltonian", None, run, ctx)


# --------------------------------------------------------------------------
# 5: remainder scaling


def sup_on_grid(fn, model: Model, levels, n_grid: int = 32, phi_span: float = TWO_PI):
    phi = np.linspace(0, phi_span, n_grid, endpoint=False)
    tau = np.linspace(0, TWO_PI, n_grid, endpoint=False)
    PP, TT = np.meshgrid(phi, tau, indexing="ij")
    return np.array([np.max(np.abs(fn(model, PP.ravel(), np.full(PP.size, float(L)), TT.ravel())))
                     for L in levels])


def check_remainder(ctx: CheckContext) -> CheckResult:
    def run():
        S = setup_for(ctx)
        P, m = S.params, S.model
        if ctx.torus.is_zero:
            return CheckResult("", None, detail=dict(reason="zero forcing: R vanishes"))
        levels = [1e3, 1e4, 1e5, 1e6, 1e7]
        supR = sup_on_grid(remainder_R, m, levels)
        fit = loglog_fit(levels, supR)
        supR1 = sup_on_grid(remainder_R1, m, levels)
        fit1 = loglog_fit(levels, supR1)
        target = P.rem_exp
        dev = abs(fit.slope - target)
        return CheckResult("", dev <= 0.1, fit.slope, 0.1,
                           dict(target=target, fit=fit.as_dict(),
                                R1_slope=fit1.slope if fit1 else None,
                                R1_within_bound=bool(fit1 and fit1.slope <= target + 0.1),
                                R1_sup=supR1.tolist()))
    return _timed("remainder_scaling", 120.0, run, ctx)


# --------------------------------------------------------------------------
# 6: adiabatic invariant


def gap_levels_for(th: Thresholds):
    return [L for L in (1e3, 1e4, 1e5, 1e6, 1e7) if L > th.calI_top]


def one_step_gaps(model: Model, levels, n: int, seed, n_steps: int = 64):
    """|calI1 - calI0| for n random (varphi0, Theta) at each level; shape (levels, n)."""
    rng = np.random.default_rng(seed)
    N = model.forcing.torus.N
    base = rng.random((n, N))
    phis = rng.uniform(0, TWO_PI, n)
    th = _advance_theta(base, phis, model.forcing.torus.omega)
    out = []
    for L in levels:
        _, G, _, _ = phi_batch(model.at_phase(th), np.full(n, float(L)), n_steps)
        out.append(np.abs(G))
    return np.array(out)


def check_adiabatic(ctx: CheckContext) -> CheckResult:
    def run():
        S = setup_for(ctx)
        P, m, th = S.params, S.model, S.thresholds
        if ctx.torus.is_zero:
            return CheckResult("", None, detail=dict(reason="zero forcing: all gaps vanish"))
        levels = gap_levels_for(th)
        gaps = one_step_gaps(m, levels, ctx.gap_samples, [ctx.seed, 6])
        gmax = gaps.max(axis=1)
        fit = loglog_fit(levels, gmax)
        bound = th.C * np.asarray(levels) ** P.b_alpha
        n_viol = int(np.sum(gaps > bound[:, None]))
        slope_ok = abs(fit.slope - P.b_alpha) <= 0.1
        # contrast between the time-energy and the transformed fields
        sI = sup_on_grid(lambda mm, p, I, t: te_vector_field(mm, p, I, t)[1], m, levels)
        sJ = sup_on_grid(lambda mm, p, I, t: h1_vector_field(mm, p, I, t)[1], m, levels)
        fI, fJ = loglog_fit(levels, sI), loglog_fit(levels, sJ)
        contrast = None
        if P.alpha == 3.0:
            contrast = abs(fI.slope) <= 0.1 and abs(fJ.slope - P.b_alpha) <= 0.1
        field_bound = abs(P.f1_coef) * ctx.torus.sup_bound(2) * S.table.c1_max + th.C0_tilde
        field_ok = bool(np.all(sJ <= field_bound * np.asarray(levels) ** P.b_alpha))
        ok = slope_ok and n_viol == 0 and field_ok and contrast is not False
        return CheckResult("", ok, fit.slope, 0.1,
                           dict(target=P.b_alpha, fit=fit.as_dict(), gap_max=gmax.tolist(),
                                C=th.C, bound_violations=n_viol, slope_within_band=slope_ok,
                                slope_upper_bound_ok=fit.slope <= P.b_alpha + 0.1,
                                sup_dI_slope=fI.slope, sup_dcalI_slope=fJ.slope,
                                contrast_ok=contrast, field_bound_ok=field_ok))
    return _timed("adiabatic_invariant", 300.0, run, ctx)


# --------------------------------------------------------------------------
# 7: sandwiches


def check_sandwich(ctx: CheckContext) -> CheckResult:
    def run():
        S = setup_for(ctx)
        m, th = S.model, S.thresholds
        rng = _rng(ctx, 7)
        n = 10_000
        I = np.exp(rng.uniform(math.log(th.I_star2), math.log(1e8), n))
        mm = m.at_phase(rng.random((n, ctx.torus.N)))
        ts = T_forward(mm, rng.uniform(0, 10, n), I, rng.uniform(0, TWO_PI, n))
        t_viol = int(np.sum((ts.calI < I / 2) | (ts.calI > 2 * I)))
        log = SANDWICH_LOG.snapshot()
        if log["integrations"] == 0:
            # nothing recorded yet in this process: run a small batch of our own
            lo, hi = _calI_window(th, 1e3, 1e7)
            J = np.exp(rng.uniform(math.log(lo), math.log(hi), 256))
            phi_batch(m.at_phase(rng.random((256, ctx.torus.N))), J, 64)
            log = SANDWICH_LOG.snapshot()
        ok = t_viol == 0 and log["violations"] == 0
        return CheckResult("", ok, float(t_viol + log["violations"]), 0.0,
                           dict(T_samples=n, T_violations=t_viol, Phi=log))
    return _timed("sandwiches", None, run, ctx)


# --------------------------------------------------------------------------
# 8: cross-route oracle


def check_cross_route(ctx: CheckContext, alphas=(3.0, 4.0, 5.0)) -> CheckResult:
    def run():
        per, worst = {}, 0.0
        if ctx.torus.is_zero:
            alphas_ = (ctx.alpha,)
        else:
            alphas_ = alphas
        for a in alphas_:
            S = setup_for(ctx, a)
            rng = _rng(ctx, 8 + int(10 * a))
            w = 0.0
            for _ in range(ctx.cross_samples):
                v0 = rng.uniform(4 * S.thresholds.v_star, 2 * S.thresholds.v_star)
                t0 = rng.uniform(0.0, 10.0)
                v1, t1 = psi_transformed(S.model, v0, t0, ctx.tol)
                ev = psi_direct(S.params, S.model.forcing, v0, t0, ctx.tol)
                w = max(w, abs(v1 - ev.v1) / abs(ev.v1), abs(t1 - ev.t1) / max(abs(ev.t1), 1e-300))
            per[str(a)] = w
            worst = max(worst, w)
        return CheckResult("", worst < 1e-6, worst, 1e-6, dict(per_alpha=per))
    return _timed("cross_route", 300.0, run, ctx)


# --------------------------------------------------------------------------
# 9: measure preservation and the W, k certificate


def check_measure(ctx: CheckContext, n_orbits: int = 1024, n_iter: int = 10) -> CheckResult:
    def run():
        S = setup_for(ctx)
        P, m, th = S.params, S.model, S.thresholds
        rng = _rng(ctx, 9)
        lo, hi = _calI_window(th, 1e3, 1e6)
        devs = []
        for _ in range(ctx.det_samples):
            thp = TorusPoint(tuple(rng.random(ctx.torus.N)))
            J0 = float(np.exp(rng.uniform(math.log(lo), math.log(hi))))
            devs.append(abs(g_determinant(m, thp, J0, ctx.tol) - 1))
        thetas = rng.random((n_orbits, ctx.torus.N))
        J0 = np.exp(rng.uniform(math.log(lo), math.log(hi), n_orbits))
        pol = OrbitPolicy(n_steps=32, record_stride=n_iter)
        summ = iterate_batch(m, thetas, np.zeros(n_orbits), J0, n_iter, pol)
        n_app = n_viol = 0
        for s_ in summ:
            tr = s_.calI_trace[: s_.n_completed + 1]
            n_app += len(tr) - 1
            n_viol += int(np.sum(tr[1:] > tr[:-1] + th.C * tr[:-1] ** P.b_alpha))
        d = max(devs)
        ok = d < 1e-4 and n_viol == 0 and n_app >= 10_000
        return CheckResult("", ok, d, 1e-4,
                           dict(det_g_max_dev=d, certificate_applications=n_app,
                                certificate_violations=n_viol))
    return _timed("measure_certificate", None, run, ctx)


# --------------------------------------------------------------------------
# 10: rarity probe


def check_campaign(ctx: CheckContext, cfg: EnsembleConfig | None = None) -> CheckResult:
    def run():
        S = setup_for(ctx)
        c = cfg or EnsembleConfig(seed=ctx.seed)
        res = ensemble_run(S.model, c)
        ok = res.escape_fraction == 0.0 and res.max_growth_ratio < 4.0
        return CheckResult("", ok, res.max_growth_ratio, 4.0,
                           dict(escape_fraction=res.escape_fraction,
                                left_domain_fraction=res.left_domain_fraction,
                                n_orbits=len(res.orbits), n_max=c.n_max,
                                gap_fit=res.gap_fit.as_dict() if res.gap_fit else None))
    return _timed("rarity_probe", 900.0, run, ctx)


BATTERY = {
    "constants": check_constants,
    "special_function_identity": check_identity,
    "symplecticity": check_symplectic,
    "implicit_hamiltonian": check_implicit_H,
    "remainder_scaling": check_remainder,
    "adiabatic_invariant": check_adiabatic,
    "cross_route": check_cross_route,
    "measure_certificate": check_measure,
    "sandwiches": check_sandwich,
}


def run_battery(ctx: CheckContext, names=None) -> list[CheckResult]:
    names = list(BATTERY) if names is None else names
    return [BATTERY[n](ctx) for n in names]
