"""Quasi-periodic forcing built from a trigonometric polynomial on the torus.

A forcing is p(theta) = sum_j a_j cos(2 pi k_j.theta) + b_j sin(2 pi k_j.theta)
on T^N = R^N / Z^N, swept along the line theta = Theta + t * omega.  All time
derivatives are exact: each term picks up a factor 2 pi (k_j . omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MAX_ORDER = 4


@dataclass(frozen=True)
class TorusPoint:
    """Point of T^N; coordinates are kept reduced to [0, 1)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        red = tuple(float(np.mod(c, 1.0)) % 1.0 for c in self.coords)
        object.__setattr__(self, "coords", red)

    @property
    def N(self) -> int:
        return len(self.coords)

    def __add__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


def iota(omega, t: float) -> TorusPoint:
    """The line flow t -> (t*omega_1, ..., t*omega_N) mod 1."""
    return TorusPoint(tuple(float(t) * w for w in omega))


@dataclass(frozen=True)
class TorusForcing:
    """Trigonometric polynomial on T^N with frequency vector ``omega``.

    ``k`` has shape (M, N) (integer multi-indices), ``a`` and ``b`` shape (M,).
    """

    omega: tuple[float, ...]
    k: np.ndarray
    a: np.ndarray
    b: np.ndarray
    _nu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        if len(omega) < 1 or any(not (w > 0 and math.isfinite(w)) for w in omega):
            raise DomainError(f"frequencies must be positive, got {omega}")
        k = np.asarray(self.k, dtype=np.int64).reshape(-1, len(omega))
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if not (len(k) == len(a) == len(b)):
            raise DomainError("term arrays have inconsistent lengths")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_nu", k @ np.array(omega))

    @classmethod
    def from_terms(cls, omega, terms) -> "TorusForcing":
        """``terms`` is an iterable of (k_tuple, a, b)."""
        terms = list(terms)
        N = len(omega)
        if not terms:
            return cls(omega, np.zeros((0, N), dtype=np.int64), np.zeros(0), np.zeros(0))
        k = np.array([t[0] for t in terms], dtype=np.int64).reshape(-1, N)
        return cls(omega, k, [t[1] for t in terms], [t[2] for t in terms])

    @classmethod
    def zero(cls, omega=(1.0, math.sqrt(2.0))) -> "TorusForcing":
        return cls.from_terms(omega, [])

    @property
    def N(self) -> int:
        return len(self.omega)

    @property
    def n_terms(self) -> int:
        return len(self.a)

    @property
    def max_degree(self) -> int:
        return int(np.abs(self.k).sum(axis=1).max()) if self.n_terms else 0

    @property
    def is_zero(self) -> bool:
        return not np.any(self.a) and not np.any(self.b)

    def scaled(self, factor: float) -> "TorusForcing":
        return TorusForcing(self.omega, self.k, factor * self.a, factor * self.b)

    def with_terms(self, more) -> "TorusForcing":
        extra = TorusForcing.from_terms(self.omega, more)
        return TorusForcing(self.omega, np.vstack([self.k, extra.k]),
                            np.concatenate([self.a, extra.a]), np.concatenate([self.b, extra.b]))

    def phase(self, theta) -> np.ndarray:
        """k_j . theta for a point (shape (N,)) or a batch (shape (B, N))."""
        th = theta.as_array() if isinstance(theta, TorusPoint) else np.asarray(theta, float)
        return th @ self.k.T

    def at(self, theta) -> "PhasedForcing":
        """The time function t -> p(theta + iota(t)); ``theta`` may be a batch."""
        th = theta.as_array() if isinstance(theta, TorusPoint) else np.asarray(theta, float)
        return PhasedForcing(self, self.phase(th), th)

    def torus_eval(self, theta, order: int = 0):
        """d_omega^order p at torus point(s) ``theta``."""
        return self.at(theta)(0.0, order)

    def sup_bound(self, order: int = 0) -> float:
        """Uniform bound of |d^order/dt^order p_Theta(t)| over all Theta and t."""
        amp = np.hypot(self.a, self.b)
        return float(np.sum(amp * np.abs(2 * math.pi * self._nu) ** order))


class PhasedForcing:
    """p_Theta(t) for one phase or a batch of phases.

    ``phase0`` has shape (M,) or (B, M); with a batch, ``t`` must broadcast
    against shape (B,).
    """

    def __init__(self, torus: TorusForcing, phase0, theta=None):
        self.torus = torus
        self.phase0 = np.asarray(phase0, dtype=float)
        # torus point(s) behind phase0, when known
        self.theta = None if theta is None else np.asarray(theta, dtype=float)
        self._two_pi_nu = 2 * math.pi * torus._nu

    @property
    def is_zero(self) -> bool:
        return self.torus.is_zero

    def __call__(self, t, order: int = 0):
        return self.derivatives(t, (order,))[0]

    def derivatives(self, t, orders=(0, 1, 2)):
        """Return a list of d^n p / dt^n for n in ``orders`` sharing one trig evaluation."""
        T = self.torus
        t = np.asarray(t, dtype=float)
        if T.n_terms == 0:
            z = np.zeros(np.broadcast_shapes(t.shape, self.phase0.shape[:-1]))
            return [z if z.ndim else 0.0 for _ in orders]
        # reduce the phase mod 1 before scaling by 2 pi
        arg = self.phase0 + t[..., None] * T._nu
        arg = 2 * math.pi * (arg - np.floor(arg))
        cs, sn = np.cos(arg), np.sin(arg)
        out = []
        for n in orders:
            # d^n/dt^n of cos(w t + c) = w^n cos(w t + c + n pi/2)
            w = self._two_pi_nu**n
            m = n % 4
            if m == 0:
                val = T.a * cs + T.b * sn
            elif m == 1:
                val = -T.a * sn + T.b * cs
            elif m == 2:
                val = -T.a * cs - T.b * sn
            else:
                val = T.a * sn - T.b * cs
            r = np.sum(w * val, axis=-1)
            out.append(float(r) if np.ndim(r) == 0 else r)
        return out

    def sup_bound(self, order: int = 0) -> float:
        return self.torus.sup_bound(order)

    def shifted(self, s) -> "PhasedForcing":
        """t -> p(t + s); ``s`` is a scalar or one shift per batch member."""
        s = np.asarray(s, dtype=float)
        ph = self.phase0 + s[..., None] * self.torus._nu
        th = None
        if self.theta is not None:
            th = self.theta + s[..., None] * np.asarray(self.torus.omega)
            th = th - np.floor(th)
        return PhasedForcing(self.torus, ph - np.floor(ph), th)


def eval_p(f: TorusForcing, theta: TorusPoint, t, order: int = 0):
    """d^order/dt^order p_Theta(t), with ``order`` limited to 0..4."""
    if not 0 <= order <= MAX_ORDER or int(order) != order:
        raise DomainError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
    return f.at(theta)(t, int(order))


def c4_norm_bound(f: TorusForcing) -> float:
    """Coefficient bound of the C^4(T^N) norm: sum (|a|+|b|) max(1, (2 pi |k|_1)^4)."""
    if f.n_terms == 0:
        return 0.0
    l1 = np.abs(f.k).sum(axis=1)
    return float(np.sum((np.abs(f.a) + np.abs(f.b)) * np.maximum(1.0, (2 * math.pi * l1) ** 4)))


def line_c4_norm_bound(f: TorusForcing) -> float:
    """Bound of the C^4_b(R) norm of every p_Theta."""
    return max(1.0, max(f.omega) ** 4) * c4_norm_bound(f)


def default_forcing() -> TorusForcing:
    """0.1 cos(2 pi theta_1) + 0.05 sin(2 pi theta_2) with omega = (1, sqrt 2)."""
    return TorusForcing.from_terms((1.0, math.sqrt(2.0)),
                                   [((1, 0), 0.1, 0.0), ((0, 1), 0.0, 0.05)])
