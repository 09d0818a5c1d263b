"""Direct integration of x'' + |x|^(alpha-1) x = p(t) in Cartesian coordinates.

``psi_direct`` is the reference successor map: from a zero of x with velocity
v0 < 0 at time t0 it returns the next zero with negative velocity.  It never
touches the coordinate changes and serves as ground truth for the transformed
route in :mod:`qposc.successor`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853, solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, HorizonError, NumericError
from .forcing import PhasedForcing
from .special_functions import AlphaParams

DEFAULT_HORIZON = 1.0e4
# dense-output samples per step used to bracket sign changes of x
_SAMPLES_PER_STEP = 8


@dataclass(frozen=True)
class CartesianState:
    x: float
    v: float
    t: float

    def __post_init__(self):
        if not all(math.isfinite(z) for z in (self.x, self.v, self.t)):
            raise NumericError(f"non-finite state {self}")


@dataclass(frozen=True)
class ZeroEvent:
    t1: float
    v1: float


def energy(params: AlphaParams, state) -> float:
    x, v = state.x, state.v
    return 0.5 * v * v + abs(x) ** (params.alpha + 1.0) / (params.alpha + 1.0)


def _rhs(params: AlphaParams, forcing: PhasedForcing):
    a = params.alpha
    if forcing.is_zero:
        def f(t, y):
            x = y[0]
            return np.array([y[1], -abs(x) ** (a - 1.0) * x])
    else:
        def f(t, y):
            x = y[0]
            return np.array([y[1], -abs(x) ** (a - 1.0) * x + forcing(t)])
    return f


def _atol(params: AlphaParams, x: float, v: float, tol: float) -> np.ndarray:
    E = 0.5 * v * v + abs(x) ** (params.alpha + 1) / (params.alpha + 1)
    amp = ((params.alpha + 1) * E) ** (1.0 / (params.alpha + 1))
    return tol * np.array([max(1.0, amp), max(1.0, math.sqrt(2 * E))])


def integrate(params: AlphaParams, forcing: PhasedForcing, state: CartesianState,
              t_end: float, tol: float = 1e-12) -> CartesianState:
    """Advance ``state`` to ``t_end`` (forward or backward) with DOP853."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    if t_end == state.t:
        return state
    sol = solve_ivp(_rhs(params, forcing), (state.t, t_end), [state.x, state.v],
                    method="DOP853", rtol=tol, atol=_atol(params, state.x, state.v, tol))
    if not sol.success:
        raise NumericError(f"integration stopped at t={sol.t[-1]:.17g}: {sol.message}")
    return CartesianState(float(sol.y[0, -1]), float(sol.y[1, -1]), float(sol.t[-1]))


def trajectory(params: AlphaParams, forcing: PhasedForcing, state: CartesianState,
               t_eval, tol: float = 1e-12):
    """Sampled solution; returns arrays (t, x, v)."""
    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(_rhs(params, forcing), (state.t, float(t_eval[-1])), [state.x, state.v],
                    method="DOP853", t_eval=t_eval, rtol=tol,
                    atol=_atol(params, state.x, state.v, tol))
    if not sol.success:
        raise NumericError(sol.message)
    return sol.t, sol.y[0], sol.y[1]


def psi_direct(params: AlphaParams, forcing: PhasedForcing, v0: float, t0: float,
               tol: float = 1e-12, v_star: float | None = None,
               horizon: float = DEFAULT_HORIZON, tol_event: float = 1e-15) -> ZeroEvent:
    """Next zero of x with negative velocity, starting from x(t0) = 0, x'(t0) = v0.

    Sign changes from x > 0 to x <= 0 are bracketed on the dense output and
    refined with Brent's method, so grazing zeros never register.
    """
    if not v0 < 0:
        raise DomainError(f"v0 must be negative, got {v0}")
    if v_star is not None and not v0 < v_star:
        raise DomainError(f"v0={v0} is not below v_*={v_star}")
    rhs = _rhs(params, forcing)
    solver = DOP853(rhs, t0, np.array([0.0, v0]), t0 + horizon, rtol=tol,
                    atol=_atol(params, 0.0, v0, tol))
    while solver.status == "running":
        t_old = solver.t
        msg = solver.step()
        if solver.status == "failed":
            raise NumericError(f"step-size underflow near t={solver.t:.17g}: {msg}")
        dense = solver.dense_output()
        ts = np.linspace(t_old, solver.t, _SAMPLES_PER_STEP + 1)
        xs = dense(ts)[0]
        for i in range(_SAMPLES_PER_STEP):
            if xs[i] > 0.0 and xs[i + 1] <= 0.0:
                if xs[i + 1] == 0.0:
                    t1 = ts[i + 1]
                else:
                    t1 = brentq(lambda s: dense(s)[0], ts[i], ts[i + 1],
                                xtol=tol_event * max(1.0, abs(ts[i])), rtol=max(tol_event, 4e-16),
                                maxiter=200)
                v1 = float(dense(t1)[1])
                if v1 < 0.0:
                    return ZeroEvent(float(t1), v1)
    raise HorizonError(f"no negative-velocity zero before t={t0 + horizon:.6g}")


def energy_envelope(params: AlphaParams, forcing: PhasedForcing, state: CartesianState,
                    t: float, n_quad: int = 2001) -> float:
    """Upper bound sqrt(E(t0)) + |int |p|| / sqrt 2 for sqrt(E(t))."""
    s = np.linspace(state.t, t, n_quad)
    p = np.abs(np.asarray(forcing(s)))
    integral = abs(np.trapezoid(p, s)) if hasattr(np, "trapezoid") else abs(np.trapz(p, s))
    return math.sqrt(energy(params, state)) + integral / math.sqrt(2.0)
