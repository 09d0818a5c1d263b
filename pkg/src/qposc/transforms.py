"""Coordinate changes: action-angle (R), time-energy (S), generating function (T).

Chain of variables::

    (x, v; t) --R--> (theta, r; t) --S--> (phi, I; tau) --T--> (varphi, calI; tau)

All functions take a :class:`Model` (exponent constants, c/s table, forcing
at a fixed phase) and are vectorised over numpy arrays unless stated.

Implementation notes
--------------------
* The implicit Hamiltonian H(phi, I; tau) is solved for the relative deviation
  delta = H / (kappa0 I^k) - 1, which satisfies
  (1 + delta)^a - mu (1 + delta)^b = 1 with mu = gamma kappa0^b I^(kb-1) p c.
  Working with ``log1p``/``expm1`` keeps delta (and hence the remainder R)
  accurate to full relative precision even when it is 1e-9 of H.
* Vector fields are exact: the time-energy field comes from implicit
  differentiation, the transformed field from differentiating the
  generating-function relations along solutions.  The two-term expansions
  survive only as the diagnostics R and R1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InvariantBreach, NumericError
from .forcing import PhasedForcing, TorusForcing, TorusPoint, c4_norm_bound
from .special_functions import HALF_PI, TWO_PI, AlphaParams, CSTable

NEWTON_RTOL = 1e-12
NEWTON_MAXIT = 50


@dataclass(frozen=True)
class Thresholds:
    """Constructive versions of every "sufficiently large" constant.

    Field names follow the chain r_* <= ... <= calI^*; see
    :func:`compute_thresholds` for how each is produced.
    """

    r_star: float
    I_star: float
    I_C0: float
    C0: float
    I_star2: float
    calI_star: float
    calI_star2: float
    C0_tilde: float
    calI_top: float
    v_star: float
    alpha0: float
    beta0: float
    C: float
    C_hat: float
    eps_star: float
    safety: float
    contraction_bound: float
    norms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "norms"}
        d["norms"] = dict(self.norms)
        return d


@dataclass(frozen=True)
class Model:
    """Everything needed to evaluate the transforms for one forcing phase.

    ``forcing`` may hold a batch of phases; arrays passed to the functions
    below then broadcast against the batch shape.
    """

    params: AlphaParams
    table: CSTable
    forcing: PhasedForcing
    thresholds: Thresholds | None = None

    def with_thresholds(self, th: Thresholds) -> "Model":
        return replace(self, thresholds=th)

    def at_phase(self, theta) -> "Model":
        return replace(self, forcing=self.forcing.torus.at(theta))


def make_model(params: AlphaParams, table: CSTable, torus: TorusForcing,
               theta=None, thresholds: Thresholds | None = None) -> Model:
    if theta is None:
        theta = TorusPoint((0.0,) * torus.N)
    return Model(params, table, torus.at(theta), thresholds)


# --------------------------------------------------------------------------
# state types


@dataclass(frozen=True)
class ActionAngleState:
    theta: float
    r: float
    t: float


@dataclass(frozen=True)
class TimeEnergyState:
    phi: float
    I: float
    tau: float


@dataclass(frozen=True)
class TransformedState:
    varphi: float
    calI: float
    tau: float


# --------------------------------------------------------------------------
# R: action-angle coordinates


def from_action_angle(model: Model, theta, r):
    P = model.params
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("action r must be positive")
    c, s, _ = model.table.eval(theta)
    x = P.gamma * r ** P.b_exp * c
    v = P.gamma ** ((P.alpha + 1) / 2) * r ** ((P.alpha + 1) / (P.alpha + 3)) * s
    return x, v


def action_from_energy(params: AlphaParams, E):
    return (np.asarray(E, dtype=float) / params.kappa1) ** params.k


def _pseudo_angle(table: CSTable, c, s):
    # strictly increasing on [0, pi/2] along the clockwise parametrisation
    return np.arctan2(-s / abs(table.s_half_pi), c / float(table.c(0.0)))


def to_action_angle(model: Model, x: float, v: float, t: float) -> ActionAngleState:
    """Scalar inverse of :func:`from_action_angle`, angle in [0, 2 pi)."""
    P, tb = model.params, model.table
    if x == 0.0 and v == 0.0:
        raise DomainError("the origin has no action-angle representation")
    E = 0.5 * v * v + abs(x) ** (P.alpha + 1) / (P.alpha + 1)
    r = float(action_from_energy(P, E))
    cn = x / (P.gamma * r ** P.b_exp)
    sn = v / (P.gamma ** ((P.alpha + 1) / 2) * r ** ((P.alpha + 1) / (P.alpha + 3)))
    # fold onto the first quarter (c >= 0, s <= 0) and remember the quadrant;
    # ties: theta in {0, pi} by the sign of v, {pi/2, 3pi/2} by the sign of x
    target = _pseudo_angle(tb, abs(cn), -abs(sn))
    if target <= 0.0:
        u = 0.0
    elif target >= HALF_PI:
        u = HALF_PI
    else:
        u = brentq(lambda w: float(_pseudo_angle(tb, *tb.eval(w)[:2])) - target,
                   0.0, HALF_PI, xtol=1e-15, rtol=1e-15)
    if cn >= 0 and sn <= 0:
        th = u
    elif cn < 0 and sn <= 0:
        th = math.pi - u
    elif cn <= 0 and sn > 0:
        th = math.pi + u
    else:
        th = TWO_PI - u
    return ActionAngleState(float(th % TWO_PI), r, float(t))


def hamiltonian_aa(model: Model, theta, r, t):
    P = model.params
    c = model.table.c(theta)
    return P.kappa1 * r ** P.a_exp - P.gamma * r ** P.b_exp * model.forcing(t) * c


def aa_vector_field(model: Model, theta, r, t):
    P = model.params
    c, s, _ = model.table.eval(theta)
    p = model.forcing(t)
    a = P.alpha
    dtheta = (P.a_exp * P.kappa1 * r ** ((a - 1) / (a + 3))
              - P.b_exp * P.gamma * r ** (-(a + 1) / (a + 3)) * p * c)
    dr = P.gamma * r ** P.b_exp * p * s
    return dtheta, dr


def _r_star_lhs(params: AlphaParams, r, p_sup: float, c_sup: float):
    a = params.alpha
    return (params.a_exp * params.kappa1 * r ** ((a - 1) / (a + 3))
            - params.b_exp * params.gamma * r ** (-(a + 1) / (a + 3)) * p_sup * c_sup)


def find_r_star(params: AlphaParams, table: CSTable, torus: TorusForcing) -> float:
    """Smallest r with dH/dr >= 1 guaranteed for every angle and time."""
    p_sup, c_sup = torus.sup_bound(0), params.Lambda

    def g(r):
        return _r_star_lhs(params, r, p_sup, c_sup) - 1.0

    lo, hi = 1e-12, 1.0
    while g(hi) < 0:
        lo, hi = hi, 2 * hi
    if g(lo) >= 0:
        return lo
    return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)


# --------------------------------------------------------------------------
# S: time-energy coordinates and the implicit Hamiltonian


def _mu(model: Model, I, p, c):
    P = model.params
    kb = P.k * P.b_exp
    return P.gamma * P.kappa0 ** P.b_exp * I ** (kb - 1.0) * p * c


def _delta_series(a: float, b: float):
    """Coefficients c_1..c_4 of delta(mu) = sum c_n mu^n (Lagrange inversion)."""
    out = []
    for n in range(1, 5):
        num = math.prod(n * b + 1 - j * a for j in range(1, n))
        out.append(num / (math.factorial(n) * a ** n))
    return tuple(out)


def _solve_delta(params: AlphaParams, mu, rtol: float = NEWTON_RTOL):
    """Solve (1+d)^a - mu (1+d)^b = 1 for d, vectorised, |mu| < 1.

    Quartic series start, then safeguarded Newton inside the bracket [lo, hi]
    derived from the sign of mu; a bisection step replaces any Newton step
    that leaves the bracket.  Once a Newton step is below sqrt(eps) relative
    it is taken and the iteration stops (quadratic convergence makes the
    result accurate to round-off).
    """
    a, b = params.a_exp, params.b_exp
    mu = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu) >= 1.0):
        raise DomainError("energy below the solvability threshold of the implicit Hamiltonian")
    pos = mu >= 0
    lo = np.where(pos, 0.0, np.expm1(np.log1p(np.minimum(mu, 0.0)) / a))
    hi = np.where(pos, np.expm1(-np.log1p(-np.maximum(mu, 0.0)) / a), 0.0)
    c1, c2, c3, c4 = _delta_series(a, b)
    d = np.clip(mu * (c1 + mu * (c2 + mu * (c3 + mu * c4))), lo, hi)
    for _ in range(NEWTON_MAXIT):
        L = np.log1p(d)
        eb = np.exp(b * L)
        g = np.expm1(a * L) - mu * eb
        lo = np.where(g < 0, np.maximum(lo, d), lo)
        hi = np.where(g > 0, np.minimum(hi, d), hi)
        dg = (a * (1.0 + g + mu * eb) - b * mu * eb) / (1.0 + d)
        step = g / dg
        dn = d - step
        out = (dn < lo) | (dn > hi)
        dn = np.where(out, 0.5 * (lo + hi), dn)
        done = (~out & (np.abs(step) <= 1e-8 * np.abs(dn) + 1e-300)) | (
            hi - lo <= 4e-16 * np.abs(dn) + 1e-300)
        d = dn
        if np.all(done):
            return d
    raise NumericError("implicit Hamiltonian: Newton did not converge",
                       residual=float(np.max(np.abs(step))))


def _H_core(model: Model, phi, I, tau, orders=(0, 1)):
    """Return (H, y = 1 + delta, mu, p-derivatives, c) at (phi, I; tau)."""
    P = model.params
    I = np.asarray(I, dtype=float)
    c = model.table.c(tau)
    pd = model.forcing.derivatives(phi, orders)
    mu = _mu(model, I, pd[0], c)
    d = _solve_delta(P, mu)
    H = P.kappa0 * I ** P.k * (1.0 + d)
    return H, 1.0 + d, d, mu, pd, c


def _check_I(model: Model, I, which="I_star"):
    th = model.thresholds
    if th is not None and np.any(np.asarray(I) < getattr(th, which) * (1 - 1e-12)):
        raise DomainError(f"momentum below {which}={getattr(th, which):.6g}")


def solve_H(model: Model, phi, I, tau, tol: float = NEWTON_RTOL):
    """Solution H of kappa1 H^a - gamma H^b p(phi) c(tau) = I."""
    _check_I(model, I)
    return _H_core(model, phi, I, tau)[0]


def implicit_residual(model: Model, phi, H, I, tau):
    P = model.params
    c = model.table.c(tau)
    F = P.kappa1 * H ** P.a_exp - P.gamma * H ** P.b_exp * model.forcing(phi) * c
    return F - I


def remainder_R(model: Model, phi, I, tau):
    """H minus its two-term expansion kappa0 I^k + f c I^e."""
    _check_I(model, I, "I_C0")
    P = model.params
    H, y, d, mu, pd, c = _H_core(model, phi, I, tau)
    return P.kappa0 * np.asarray(I, float) ** P.k * (d - P.k * mu)


def _te_field_core(P: AlphaParams, I, H, y, mu, p1, c):
    # F_H = (I/H) (a y^a - b mu y^b);  phi' = 1/F_H;  I' = -gamma H^b p' c / F_H
    ya, yb = y ** P.a_exp, y ** P.b_exp
    denom = P.a_exp * ya - P.b_exp * mu * yb
    dphi = H / (I * denom)
    Hb = P.kappa0 ** P.b_exp * I ** (P.k * P.b_exp) * yb
    dI = -P.gamma * Hb * p1 * c * dphi
    return dphi, dI


def te_vector_field(model: Model, phi, I, tau):
    """(phi', I') = (dH/dI, -dH/dphi) by implicit differentiation."""
    _check_I(model, I)
    I = np.asarray(I, dtype=float)
    H, y, d, mu, pd, c = _H_core(model, phi, I, tau)
    return _te_field_core(model.params, I, H, y, mu, pd[1], c)


def remainder_R_derivatives(model: Model, phi, I, tau):
    """(R, dR/dphi, dR/dI) from the exact implicit derivatives."""
    P = model.params
    I = np.asarray(I, dtype=float)
    H, y, d, mu, pd, c = _H_core(model, phi, I, tau)
    dphi, dI = _te_field_core(P, I, H, y, mu, pd[1], c)
    e = P.e_exp
    R = P.kappa0 * I ** P.k * (d - P.k * mu)
    R_phi = -dI - P.f_coef * pd[1] * c * I ** e
    R_I = dphi - P.k * P.kappa0 * I ** (P.k - 1) - e * P.f_coef * pd[0] * c * I ** (e - 1)
    return R, R_phi, R_I


def S_forward(model: Model, theta, r, t):
    """(theta, r; t) -> (phi, I; tau) = (t, H(theta, r; t); theta)."""
    return TimeEnergyState(t, hamiltonian_aa(model, theta, r, t), theta)


def S_inverse(model: Model, phi, I, tau):
    """(phi, I; tau) -> (theta, r; t) with r = H(phi, I; tau)."""
    return ActionAngleState(tau, solve_H(model, phi, I, tau), phi)


# --------------------------------------------------------------------------
# T: generating function Psi = -calI^e f(phi) c1(tau)


def _f_derivs(model: Model, phi, orders=(0, 1, 2)):
    fc = model.params.f_coef
    return [fc * v for v in model.forcing.derivatives(phi, orders)]


def solve_q(model: Model, varphi, calI, tau, tol: float = 1e-15):
    """Fixed point of q = e calI^(e-1) c1(tau) f(varphi + q)."""
    P = model.params
    e = P.e_exp
    varphi = np.asarray(varphi, dtype=float)
    calI = np.asarray(calI, dtype=float)
    if e == 0.0 or model.forcing.is_zero:
        return np.zeros(np.broadcast_shapes(varphi.shape, calI.shape,
                                            model.forcing.phase0.shape[:-1]))
    c1 = model.table.c1(tau)
    coef = e * calI ** (e - 1.0) * c1
    lip = np.abs(coef) * P.f_coef * model.forcing.sup_bound(1)
    if np.any(lip >= 1.0):
        raise DomainError("calI too small: the fixed-point map for q is not a contraction")
    q = coef * P.f_coef * model.forcing(varphi)
    for _ in range(200):
        qn = coef * P.f_coef * model.forcing(varphi + q)
        if np.all(np.abs(qn - q) <= tol * np.maximum(1.0, np.abs(qn))):
            return qn
        q = qn
    raise NumericError("q iteration did not converge", residual=float(np.max(np.abs(qn - q))))


def T_forward(model: Model, phi, I, tau, tol: float = NEWTON_RTOL) -> TransformedState:
    """(phi, I; tau) -> (varphi, calI; tau) from I = calI + dPsi/dphi, varphi = phi + dPsi/dcalI."""
    _check_I(model, I, "I_star2")
    P = model.params
    e = P.e_exp
    I = np.asarray(I, dtype=float)
    c1 = model.table.c1(tau)
    f0, f1 = _f_derivs(model, phi, (0, 1))
    D = f1 * c1
    if e == 0.0:
        calI = I + D
    else:
        calI = I + I ** e * D
        for _ in range(NEWTON_MAXIT):
            g = calI - calI ** e * D - I
            dg = 1.0 - e * calI ** (e - 1.0) * D
            step = g / dg
            calI = calI - step
            if np.all(np.abs(step) <= tol * 1e-3 * np.abs(calI)):
                break
        else:
            raise NumericError("T_forward: Newton did not converge",
                               residual=float(np.max(np.abs(step))))
    varphi = np.asarray(phi, dtype=float) - e * calI ** (e - 1.0) * f0 * c1
    return TransformedState(varphi, calI, tau)


def T_inverse(model: Model, varphi, calI, tau, tol: float = 1e-15) -> TimeEnergyState:
    _check_I(model, calI, "calI_star")
    P = model.params
    calI = np.asarray(calI, dtype=float)
    q = solve_q(model, varphi, calI, tau, tol)
    phi = np.asarray(varphi, dtype=float) + q
    c1 = model.table.c1(tau)
    f1 = P.f_coef * model.forcing(phi, 1)
    I = calI - calI ** P.e_exp * f1 * c1
    return TimeEnergyState(phi, I, tau)


def _h1_core(model: Model, varphi, calI, tau):
    """Shared work for the transformed field, value, and remainder."""
    P = model.params
    e = P.e_exp
    calI = np.asarray(calI, dtype=float)
    c, s, c1 = model.table.eval(tau)
    q = solve_q(model, varphi, calI, tau)
    phi = np.asarray(varphi, dtype=float) + q
    p0, p1, p2 = model.forcing.derivatives(phi, (0, 1, 2))
    fc = P.f_coef
    f0, f1, f2 = fc * p0, fc * p1, fc * p2
    E = calI ** e
    psi_phi = -E * f1 * c1
    I = calI + psi_phi
    mu = _mu(model, I, p0, c)
    d = _solve_delta(P, mu)
    H = P.kappa0 * I ** P.k * (1.0 + d)
    return dict(c=c, c1=c1, phi=phi, f0=f0, f1=f1, f2=f2, E=E, psi_phi=psi_phi,
                I=I, mu=mu, d=d, H=H, p1=p1, calI=calI)


def _h1_field_from_core(P: AlphaParams, w):
    e = P.e_exp
    calI, E, c, c1 = w["calI"], w["E"], w["c"], w["c1"]
    f0, f1, f2 = w["f0"], w["f1"], w["f2"]
    dphi, dI = _te_field_core(P, w["I"], w["H"], 1.0 + w["d"], w["mu"], w["p1"], c)
    Em1 = e * calI ** (e - 1.0) if e != 0.0 else 0.0
    psi_pp = -E * f2 * c1
    psi_pJ = -Em1 * f1 * c1
    psi_pt = -E * f1 * c
    psi_JJ = -(e - 1.0) * Em1 * calI ** -1.0 * f0 * c1 if e != 0.0 else 0.0
    psi_Jt = -Em1 * f0 * c
    dcalI = (dI - psi_pp * dphi - psi_pt) / (1.0 + psi_pJ)
    dvarphi = dphi * (1.0 + psi_pJ) + psi_JJ * dcalI + psi_Jt
    return dvarphi, dcalI


def h1_vector_field(model: Model, varphi, calI, tau):
    """Exact (varphi', calI') obtained by conjugating the time-energy field through T."""
    _check_I(model, calI, "calI_star")
    w = _h1_core(model, varphi, calI, tau)
    return _h1_field_from_core(model.params, w)


def h1_value(model: Model, varphi, calI, tau):
    """H1(varphi, calI; tau) = H(phi, I; tau) + dPsi/dtau(phi, calI; tau)."""
    w = _h1_core(model, varphi, calI, tau)
    return w["H"] - w["E"] * w["f0"] * w["c"]


def _R1_from_core(P: AlphaParams, model: Model, varphi, w):
    calI = w["calI"]
    # H - kappa0 calI^k computed without cancellation
    lead = P.kappa0 * calI ** P.k * np.expm1(P.k * np.log1p(w["psi_phi"] / calI))
    H_minus = lead + P.kappa0 * w["I"] ** P.k * w["d"]
    p1v, p2v = model.forcing.derivatives(varphi, (1, 2))
    f1v = P.f1_coef * p1v
    R1 = H_minus - w["E"] * w["f0"] * w["c"] - f1v * w["c1"] * calI ** P.b_alpha
    return R1, f1v, P.f1_coef * p2v


def remainder_R1(model: Model, varphi, calI, tau):
    """H1 minus kappa0 calI^k + f1(varphi) c1(tau) calI^b_alpha."""
    _check_I(model, calI, "calI_star")
    w = _h1_core(model, varphi, calI, tau)
    return _R1_from_core(model.params, model, varphi, w)[0]


def remainder_R1_derivatives(model: Model, varphi, calI, tau):
    """(R1, dR1/dvarphi, dR1/dcalI) using the exact transformed field."""
    P = model.params
    w = _h1_core(model, varphi, calI, tau)
    R1, f1v, df1v = _R1_from_core(P, model, varphi, w)
    dvarphi, dcalI = _h1_field_from_core(P, w)
    calI = w["calI"]
    ba = P.b_alpha
    R1_phi = -dcalI - df1v * w["c1"] * calI ** ba
    R1_I = dvarphi - P.k * P.kappa0 * calI ** (P.k - 1) - ba * f1v * w["c1"] * calI ** (ba - 1)
    return R1, R1_phi, R1_I


# --------------------------------------------------------------------------
# restrictions to the lower half-axis (x = 0, v < 0, theta = pi/2)


def R0(model: Model, v, t):
    """(v, t) -> (r, t) on x = 0, v < 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v >= 0):
        raise DomainError("R0 is defined for v < 0 only")
    return action_from_energy(model.params, 0.5 * v * v), t


def R0_inverse(model: Model, r, t):
    P = model.params
    return -np.sqrt(2.0 * P.kappa1 * np.asarray(r, float) ** P.a_exp), t


def forward_chain(model: Model, v0, t0):
    """(v0, t0) -> (varphi0, calI0) through R0, S0, T0 at tau = pi/2."""
    v0 = np.asarray(v0, dtype=float)
    if np.any(v0 >= 0):
        raise DomainError("the successor map starts from v0 < 0")
    I0 = 0.5 * v0 * v0  # H(pi/2, r0; t0) with c(pi/2) = 0
    ts = T_forward(model, t0, I0, HALF_PI)
    return ts.varphi, ts.calI


def backward_chain(model: Model, varphi, calI):
    """(varphi, calI) at tau = pi/2 (mod 2 pi) -> (v, t) on the lower half-axis."""
    te = T_inverse(model, varphi, calI, HALF_PI)
    if np.any(te.I <= 0):
        raise InvariantBreach("negative energy after undoing T")
    return -np.sqrt(2.0 * te.I), te.phi


# --------------------------------------------------------------------------
# thresholds


def _sweep_points(torus: TorusForcing, n_theta: int, n_tau: int, levels, seed: int):
    rng = np.random.default_rng(seed)
    thetas = rng.random((n_theta, torus.N))
    taus = (np.arange(n_tau) + 0.5) * TWO_PI / n_tau
    L, T, Q = np.meshgrid(np.asarray(levels, float), taus, np.arange(n_theta), indexing="ij")
    return L.ravel(), T.ravel(), thetas[Q.ravel()]


def compute_thresholds(params: AlphaParams, table: CSTable, torus: TorusForcing,
                       safety: float = 2.0, n_theta: int = 32, n_tau: int = 32,
                       decades: int = 6, seed: int = 20240917) -> Thresholds:
    """Constructive thresholds with a safety factor, validated by random sweeps.

    Closed-form sufficient bounds are used wherever the argument allows; the
    remainder constants C0 and C0_tilde are measured sup-constants (times
    ``safety``) over a log-spaced sweep of ``decades`` decades above the
    respective threshold.
    """
    if safety < 1.0:
        raise DomainError("safety factor must be >= 1")
    P = params
    a = P.alpha
    Lam = P.Lambda
    P0, P1, P2 = (torus.sup_bound(n) for n in range(3))
    C1 = table.c1_max
    # r_*: dH/dr >= 1
    r_star = find_r_star(P, table, torus)
    # r_eps: relative size of the forcing term in the implicit equation <= 1/2
    r_eps = (2 * P.gamma * P0 * Lam / P.kappa1) ** ((a + 3) / (2 * a)) if P0 > 0 else 0.0
    r_min = max(r_star, r_eps)
    eps_star = P.gamma / P.kappa1 * r_min ** (-2 * a / (a + 3)) * P0 * Lam
    I_star = safety * (P.kappa1 * r_min ** P.a_exp + P.gamma * r_min ** P.b_exp * P0 * Lam)
    alpha0 = P.kappa0 * (1 + eps_star) ** (-P.k)
    beta0 = P.kappa0 * (1 - eps_star) ** (-P.k)
    I_C0 = I_star

    model0 = Model(P, table, torus.at(np.zeros(torus.N)))
    # C0: measured sup of (|R| + |R_phi| + I |R_I|) / I^rem
    if torus.is_zero:
        C0 = 0.0
    else:
        lv, tv, thv = _sweep_points(torus, n_theta, n_tau,
                                    I_C0 * np.logspace(0, decades, 2 * decades + 1), seed)
        m = model0.at_phase(thv)
        R, Rp, RI = remainder_R_derivatives(m, 0.0, lv, tv)
        C0 = safety * float(np.max((np.abs(R) + np.abs(Rp) + lv * np.abs(RI)) / lv ** P.rem_exp))

    e = P.e_exp
    F1 = P.f_coef * P1
    calI_T = (3.0 * F1 * C1) ** (1.0 / (1.0 - e)) if F1 > 0 else 0.0
    calI_star = max(1.5 * I_C0, calI_T)
    I_star2 = safety * max(I_C0, 4.0 / 3.0 * calI_star)

    if torus.is_zero:
        C0_tilde = 0.0
    else:
        lv, tv, thv = _sweep_points(torus, n_theta, n_tau,
                                    calI_star * np.logspace(0, decades, 2 * decades + 1), seed + 1)
        m = model0.at_phase(thv)
        R1, R1p, R1I = remainder_R1_derivatives(m, 0.0, lv, tv)
        C0_tilde = safety * float(np.max((np.abs(R1) + np.abs(R1p) + lv * np.abs(R1I))
                                         / lv ** P.rem_exp))

    bA = P.b_alpha
    f1_dot_sup = abs(P.f1_coef) * P2
    C_hat = abs(1 - bA) * (f1_dot_sup * C1 + C0_tilde)
    calI_L = ((TWO_PI * C_hat / (1 - 2.0 ** (-(1 - bA)))) ** (1 / (1 - bA))) if C_hat > 0 else 0.0
    calI_star2 = safety * max(4 * calI_star, 1.5 * I_star2, calI_L)
    calI_top = max(4 * calI_star2, (2 * P.kappa1) ** ((a + 3) / 2))
    v_star = -2.0 * math.sqrt(calI_top)
    C = TWO_PI * (f1_dot_sup * C1 + C0_tilde) * 4.0 ** (-bA)
    contraction = TWO_PI * max(1.0, max(torus.omega) ** 4) * P.f_coef * c4_norm_bound(torus) * Lam

    th = Thresholds(r_star=r_star, I_star=I_star, I_C0=I_C0, C0=C0, I_star2=I_star2,
                    calI_star=calI_star, calI_star2=calI_star2, C0_tilde=C0_tilde,
                    calI_top=calI_top, v_star=v_star, alpha0=alpha0, beta0=beta0, C=C,
                    C_hat=C_hat, eps_star=eps_star, safety=safety, contraction_bound=contraction,
                    norms={"p_sup": P0, "p1_sup": P1, "p2_sup": P2, "c_sup": Lam,
                           "c1_sup": C1, "f1_sup": F1, "f1dot_sup": f1_dot_sup,
                           "c4_bound": c4_norm_bound(torus), "calI_T": calI_T,
                           "calI_L": calI_L, "r_eps": r_eps})
    validate_thresholds(model0, th, seed=seed + 2)
    return th


def validate_thresholds(model: Model, th: Thresholds, n: int = 4096, seed: int = 0) -> None:
    """Randomised check of the inequalities the thresholds are meant to guarantee."""
    P = model.params
    torus = model.forcing.torus
    rng = np.random.default_rng(seed)
    thetas = rng.random((n, torus.N))
    m = model.at_phase(thetas)
    taus = rng.random(n) * TWO_PI
    phis = rng.random(n) * 10.0
    # dH/dr >= 1 at r_*
    dth, _ = aa_vector_field(m, taus, np.full(n, th.r_star), phis)
    if np.min(dth) < 1.0 - 1e-9:
        raise InvariantBreach(f"dH/dr = {np.min(dth):.6g} < 1 at r_*")
    # bracket alpha0 I^k <= H <= beta0 I^k
    I = th.I_star * 10.0 ** (rng.random(n) * 6)
    H = _H_core(m, phis, I, taus)[0]
    ratio = H / I ** P.k
    if np.any(ratio < th.alpha0 * (1 - 1e-12)) or np.any(ratio > th.beta0 * (1 + 1e-12)):
        raise InvariantBreach("implicit Hamiltonian left its bracket")
    if np.any(H < th.r_star):
        raise InvariantBreach("implicit Hamiltonian below r_*")
    # I/2 <= calI <= 2I on T's domain
    I = th.I_star2 * 10.0 ** (rng.random(n) * 6)
    ts = T_forward(m, phis, I, taus)
    if np.any(ts.calI < I / 2) or np.any(ts.calI > 2 * I) or np.any(ts.calI < th.calI_star):
        raise InvariantBreach("sandwich I/2 <= calI <= 2I violated")
    # inverse chain lands back above I_*
    calI = th.calI_star2 * 10.0 ** (rng.random(n) * 6)
    te = T_inverse(m, phis, calI, taus)
    if np.any(te.I < th.I_star):
        raise InvariantBreach("T^-1 left the time-energy domain")
