"""Constants of the unperturbed oscillator and its periodic solution.

The unforced equation x'' + |x|^(alpha-1) x = 0 has the homogeneous family
x_lam(t) = lam * x_1(lam^((alpha-1)/2) t).  ``Lambda`` is the amplitude whose
minimal period equals 2 pi, and ``c = x_Lambda``, ``s = c'`` play the role of
cosine and sine.  ``c1`` is the zero-mean antiderivative of ``c``.

Everything here is built once per exponent ``alpha`` and is immutable.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import BarycentricInterpolator

from .errors import DomainError, NumericError

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AlphaParams:
    """Exponent ``alpha`` and every constant derived from it."""

    alpha: float
    T1: float
    Lambda: float
    gamma: float
    kappa1: float
    kappa0: float
    b_alpha: float

    @property
    def exp_table(self) -> dict[str, float]:
        a = self.alpha
        return {
            "2/(a+3)": 2.0 / (a + 3.0),
            "(a+1)/(a+3)": (a + 1.0) / (a + 3.0),
            "2(a+1)/(a+3)": 2.0 * (a + 1.0) / (a + 3.0),
            "(a+3)/(2(a+1))": (a + 3.0) / (2.0 * (a + 1.0)),
            "(3-a)/(2(a+1))": (3.0 - a) / (2.0 * (a + 1.0)),
            "(1-3a)/(2(a+1))": (1.0 - 3.0 * a) / (2.0 * (a + 1.0)),
            "3(1-a)/(2(a+1))": 3.0 * (1.0 - a) / (2.0 * (a + 1.0)),
        }

    # Short names for the exponents used throughout the transforms.
    @property
    def k(self) -> float:
        """Exponent of I in the leading term kappa0 * I^k."""
        return (self.alpha + 3.0) / (2.0 * (self.alpha + 1.0))

    @property
    def a_exp(self) -> float:
        """Exponent of r in the energy: E = kappa1 * r^a_exp."""
        return 2.0 * (self.alpha + 1.0) / (self.alpha + 3.0)

    @property
    def b_exp(self) -> float:
        """Exponent of r in the position scaling x = gamma r^b_exp c."""
        return 2.0 / (self.alpha + 3.0)

    @property
    def e_exp(self) -> float:
        """Exponent of the generating-function prefactor; zero at alpha = 3."""
        return (3.0 - self.alpha) / (2.0 * (self.alpha + 1.0))

    @property
    def rem_exp(self) -> float:
        """Decay exponent of the remainder terms."""
        return 3.0 * (1.0 - self.alpha) / (2.0 * (self.alpha + 1.0))

    @property
    def drift_exp(self) -> float:
        """Exponent of the unperturbed angular velocity d(phi)/d(tau)."""
        return (1.0 - self.alpha) / (2.0 * (self.alpha + 1.0))

    @property
    def f_coef(self) -> float:
        """f = f_coef * p, the coefficient of the first correction of H."""
        return self.k * self.gamma * self.kappa0 ** ((self.alpha + 5.0) / (self.alpha + 3.0))

    @property
    def f1_coef(self) -> float:
        """f1 = f1_coef * p', the coefficient after the last transformation."""
        return -(self.k**2) * self.gamma * self.kappa0 ** ((2.0 * self.alpha + 8.0) / (self.alpha + 3.0))

    def period(self, lam):
        """Minimal period of the unforced solution with amplitude ``lam``."""
        return np.asarray(lam, dtype=float) ** ((1.0 - self.alpha) / 2.0) * self.T1

    def identity_residuals(self) -> dict[str, float]:
        """Relative residuals of the defining identities (all ~1e-16 when intact)."""
        a = self.alpha
        res = {
            "period_Lambda": abs(float(self.period(self.Lambda)) - TWO_PI) / TWO_PI,
            "gamma": abs(self.gamma ** ((a + 3) / 2) * (2 / (a + 3)) * self.Lambda ** (a + 1) - 1.0),
            "kappa1": abs((self.gamma * self.Lambda) ** (a + 1) / (a + 1) / self.kappa1 - 1.0),
            "kappa0": abs(self.kappa1 ** (-(a + 3) / (2 * (a + 1))) / self.kappa0 - 1.0),
            "b_alpha": abs(
                -(3 * a * a - 2 * a - 9) / (2 * (a + 3) * (a + 1)) - self.b_alpha
            ),
        }
        return res


def quarter_period(alpha: float, tol: float = 1e-13) -> float:
    """Quarter period of x_1, i.e. the integral of dx / sqrt((2/(a+1))(1 - x^(a+1))).

    With x = sin(u)^(2/(a+1)) the endpoint singularity at x = 1 disappears and
    the one at u = 0 becomes a pure power u^w, handled by the algebraic weight.
    """
    w = (1.0 - alpha) / (alpha + 1.0)

    def smooth(u):
        return (math.sin(u) / u) ** w if u > 0 else 1.0

    val, err = quad(smooth, 0.0, HALF_PI, weight="alg", wvar=(w, 0.0),
                    epsabs=0.0, epsrel=tol, limit=200)
    if not np.isfinite(val) or err > 100 * tol * abs(val):
        raise NumericError(f"period quadrature did not converge (err={err:.3e})", residual=err)
    return math.sqrt(2.0 / (alpha + 1.0)) * val


def derive_params(alpha: float, tol: float = 1e-13) -> AlphaParams:
    if not np.isfinite(alpha) or alpha < 3.0:
        raise DomainError(f"alpha must be >= 3, got {alpha}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    T1 = 4.0 * quarter_period(alpha, tol)
    Lam = (T1 / TWO_PI) ** (2.0 / (alpha - 1.0))
    gamma = ((alpha + 3.0) / (2.0 * Lam ** (alpha + 1.0))) ** (2.0 / (alpha + 3.0))
    kappa1 = (gamma * Lam) ** (alpha + 1.0) / (alpha + 1.0)
    kappa0 = kappa1 ** (-(alpha + 3.0) / (2.0 * (alpha + 1.0)))
    b_alpha = -(3 * alpha**2 - 2 * alpha - 9) / (2 * (alpha + 3) * (alpha + 1))
    return AlphaParams(alpha=float(alpha), T1=T1, Lambda=Lam, gamma=gamma,
                       kappa1=kappa1, kappa0=kappa0, b_alpha=b_alpha)


# --------------------------------------------------------------------------
# tabulated c, s, c1


def _cheb_nodes(n: int) -> np.ndarray:
    j = np.arange(n + 1)
    return HALF_PI * 0.5 * (1.0 - np.cos(np.pi * j / n))


def _integrate_unperturbed(params: AlphaParams, nodes: np.ndarray, rtol: float) -> np.ndarray:
    a = params.alpha

    def rhs(t, y):
        c = y[0]
        return [y[1], -abs(c) ** (a - 1.0) * c, c]

    sol = solve_ivp(rhs, (0.0, HALF_PI), [params.Lambda, 0.0, 0.0], method="DOP853",
                    t_eval=nodes, rtol=rtol, atol=rtol * 1e-3 * params.Lambda)
    if not sol.success:
        raise NumericError(f"c/s table integration failed: {sol.message}")
    return sol.y.T.copy()


@dataclass(frozen=True)
class CSTable:
    """Chebyshev table of (c, s, c1) on [0, pi/2], extended to R by symmetry."""

    alpha: float
    tol: float
    nodes: np.ndarray
    values: np.ndarray  # shape (n+1, 3): c, s, c1
    achieved: float
    _interp: BarycentricInterpolator = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self._interp is None:
            # closed-form weights for Chebyshev points of the second kind; scipy's
            # own weights depend on a random node ordering and vary between runs
            w = np.where(np.arange(len(self.nodes)) % 2 == 0, 1.0, -1.0)
            w[0] *= 0.5
            w[-1] *= 0.5
            object.__setattr__(self, "_interp",
                               BarycentricInterpolator(self.nodes, self.values, wi=w))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def eval(self, t):
        """Return (c, s, c1) at ``t`` (scalar or array)."""
        t = np.asarray(t, dtype=float)
        u, sc, ss, sc1 = _reduce(t)
        uu = np.atleast_1d(u).ravel()
        with np.errstate(invalid="ignore", over="ignore"):
            vals = np.asarray(self._interp(uu))
        bad = ~np.all(np.isfinite(vals), axis=1)
        if bad.any():
            # u within a subnormal distance of a node: weights overflow, use the node value
            near = np.abs(uu[bad, None] - self.nodes[None, :]).argmin(axis=1)
            vals[bad] = self.values[near]
        vals = vals.reshape(u.shape + (3,))
        c = sc * vals[..., 0]
        s = ss * vals[..., 1]
        c1 = sc1 * vals[..., 2]
        if t.ndim == 0:
            return float(c), float(s), float(c1)
        return c, s, c1

    def c(self, t):
        return self.eval(t)[0]

    def s(self, t):
        return self.eval(t)[1]

    def c1(self, t):
        return self.eval(t)[2]

    @property
    def s_half_pi(self) -> float:
        """s(pi/2), the most negative value of s."""
        return float(self.values[-1, 1])

    @property
    def c1_max(self) -> float:
        """sup |c1| = c1(pi/2)."""
        return float(self.values[-1, 2])


def _reduce(t: np.ndarray):
    """Map t to u in [0, pi/2] with sign factors for c, s, c1.

    Uses c even, s odd, pi-antiperiodicity, and reflection about pi/2:
    c(pi-u) = -c(u), s(pi-u) = s(u), c1(pi-u) = c1(u).
    """
    m = np.mod(t, TWO_PI)
    upper = m >= math.pi
    w = np.where(upper, m - math.pi, m)
    anti = np.where(upper, -1.0, 1.0)
    refl = w > HALF_PI
    u = np.where(refl, math.pi - w, w)
    u = np.clip(u, 0.0, HALF_PI)
    sc = anti * np.where(refl, -1.0, 1.0)
    ss = anti
    sc1 = anti
    return u, sc, ss, sc1


def build_table(params: AlphaParams, tol: float = 1e-12, max_nodes: int = 1024) -> CSTable:
    """Tabulate c, s, c1 at Chebyshev nodes, doubling until the interpolant is converged."""
    rtol = min(tol, 1e-12) * 1e-1
    n = 32
    prev = None
    while True:
        nodes = _cheb_nodes(n)
        vals = _integrate_unperturbed(params, nodes, rtol)
        table = CSTable(params.alpha, tol, nodes, vals, achieved=np.inf)
        if prev is not None:
            probe = _cheb_nodes(2 * n)[1::2]
            diff = np.max(np.abs(prev._interp(probe) - table._interp(probe))) / params.Lambda
            if diff < tol:
                return CSTable(params.alpha, tol, nodes, vals, achieved=float(diff))
        if 2 * n > max_nodes:
            raise NumericError(f"c/s table not converged with {n} nodes", residual=diff)
        prev = table
        n *= 2


def eval_cs(params: AlphaParams, table: CSTable, t):
    c, s, _ = table.eval(t)
    return c, s


def eval_c1(params: AlphaParams, table: CSTable, t):
    return table.eval(t)[2]


# --------------------------------------------------------------------------
# binary cache: header (alpha, tol, node count) + node arrays, float64 LE

_HEADER = struct.Struct("<3d")


def save_table(table: CSTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(table.alpha, table.tol, float(table.n_nodes)))
        fh.write(np.asarray(table.nodes, dtype="<f8").tobytes())
        fh.write(np.asarray(table.values.T, dtype="<f8").tobytes())


def load_table(path) -> CSTable:
    raw = Path(path).read_bytes()
    alpha, tol, n = _HEADER.unpack_from(raw)
    n = int(n)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 4 * n:
        raise NumericError(f"corrupt table cache {path}")
    nodes = body[:n].copy()
    values = body[n:].reshape(3, n).T.copy()
    return CSTable(alpha, tol, nodes, values, achieved=float("nan"))


def cached_table(params: AlphaParams, tol: float = 1e-12, cache_dir=None) -> CSTable:
    """Build the table, reusing ``cache_dir/cs_<alpha>_<tol>.bin`` when present."""
    if cache_dir is None:
        return build_table(params, tol)
    path = Path(cache_dir) / f"cs_{params.alpha!r}_{tol!r}.bin"
    if path.exists():
        table = load_table(path)
        if table.alpha == params.alpha and table.tol == tol:
            return table
    table = build_table(params, tol)
    save_table(table, path)
    return table
