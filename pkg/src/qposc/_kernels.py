"""Compiled fixed-step RK4 for the transformed flow (one period per call).

Scalar re-statement of ``transforms._h1_core`` / ``_h1_field_from_core`` so
numba can compile it; agreement with the numpy path is checked in the tests.
The c and c1 values at the shared tau nodes are passed in precomputed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _forcing(phi, phase0, nu, A, Bc, w1, w2):
    p0 = 0.0
    p1 = 0.0
    p2 = 0.0
    for j in range(A.shape[0]):
        x = phase0[j] + phi * nu[j]
        x = TWO_PI * (x - math.floor(x))
        cs = math.cos(x)
        sn = math.sin(x)
        p0 += A[j] * cs + Bc[j] * sn
        p1 += w1[j] * (-A[j] * sn + Bc[j] * cs)
        p2 += w2[j] * (-A[j] * cs - Bc[j] * sn)
    return p0, p1, p2


@njit(cache=True, nogil=True)
def _delta(mu, a, b, s1, s2, s3, s4):
    """Return (d, (1+d)^b); see transforms._solve_delta for the scheme."""
    if not abs(mu) < 1.0:
        return math.nan, math.nan
    if mu >= 0.0:
        lo = 0.0
        hi = math.expm1(-math.log1p(-mu) / a)
    else:
        lo = math.expm1(math.log1p(mu) / a)
        hi = 0.0
    d = mu * (s1 + mu * (s2 + mu * (s3 + mu * s4)))
    d = min(max(d, lo), hi)
    for _ in range(50):
        L = math.log1p(d)
        eb = math.exp(b * L)
        g = math.expm1(a * L) - mu * eb
        if g < 0.0:
            lo = max(lo, d)
        elif g > 0.0:
            hi = min(hi, d)
        step = g / ((a * (1.0 + g + mu * eb) - b * mu * eb) / (1.0 + d))
        dn = d - step
        if dn < lo or dn > hi:
            d = 0.5 * (lo + hi)
            if hi - lo <= 4e-16 * abs(d) + 1e-300:
                return d, math.exp(b * math.log1p(d))
            continue
        if abs(step) <= 1e-8 * abs(dn) + 1e-300:
            # first-order update of (1+d)^b; the neglected term is O(step^2)
            return dn, eb * (1.0 - b * step / (1.0 + d))
        d = dn
    return math.nan, math.nan


@njit(cache=True, nogil=True)
def _field(vphi, J, c, c1, phase0, nu, A, Bc, w1, w2, cst):
    a, b, k, e, kappa0, gamma, fc, mu_coef, kb1, k0b, kb = (
        cst[0], cst[1], cst[2], cst[3], cst[4], cst[5], cst[6], cst[7], cst[8], cst[9], cst[10])
    q = 0.0
    E = 1.0
    Em1 = 0.0
    if e != 0.0:
        E = math.exp(e * math.log(J))
        Em1 = e * E / J
        coef = Em1 * c1 * fc
        for _ in range(200):
            p0, _p1, _p2 = _forcing(vphi + q, phase0, nu, A, Bc, w1, w2)
            qn = coef * p0
            if abs(qn - q) <= 1e-15 * max(1.0, abs(qn)):
                q = qn
                break
            q = qn
    p0, p1, p2 = _forcing(vphi + q, phase0, nu, A, Bc, w1, w2)
    f0 = fc * p0
    f1 = fc * p1
    f2 = fc * p2
    I = J - E * f1 * c1
    lI = math.log(I)
    Ikb = math.exp(kb * lI)
    mu = mu_coef * Ikb / I * p0 * c
    d, yb = _delta(mu, a, b, cst[11], cst[12], cst[13], cst[14])
    ya = 1.0 + mu * yb
    # dphi = H / (I (a y^a - b mu y^b)) with H = kappa0 I^k (1 + d)
    dphi = kappa0 * math.exp((k - 1.0) * lI) * (1.0 + d) / (a * ya - b * mu * yb)
    dI = -gamma * k0b * Ikb * yb * p1 * c * dphi
    psi_pp = -E * f2 * c1
    psi_pJ = -Em1 * f1 * c1
    psi_pt = -E * f1 * c
    psi_JJ = -(e - 1.0) * Em1 / J * f0 * c1
    psi_Jt = -Em1 * f0 * c
    dJ = (dI - psi_pp * dphi - psi_pt) / (1.0 + psi_pJ)
    dv = dphi * (1.0 + psi_pJ) + psi_JJ * dJ + psi_Jt
    return dv, dJ


@njit(cache=True, nogil=True)
def rk4_period(J0, phase0, nu, A, Bc, w1, w2, cst, c_nodes, c1_nodes, h,
               out_dv, out_dJ, out_rmin, out_rmax):
    """Integrate each orbit over one period; c_nodes has 2 n_steps + 1 entries."""
    n_steps = (c_nodes.shape[0] - 1) // 2
    for i in range(J0.shape[0]):
        ph = phase0[i]
        dv = 0.0
        dJ = 0.0
        rmin = 1.0
        rmax = 1.0
        J = J0[i]
        for s in range(n_steps):
            c_a = c_nodes[2 * s]
            c_m = c_nodes[2 * s + 1]
            c_b = c_nodes[2 * s + 2]
            q_a = c1_nodes[2 * s]
            q_m = c1_nodes[2 * s + 1]
            q_b = c1_nodes[2 * s + 2]
            k1v, k1J = _field(dv, J + dJ, c_a, q_a, ph, nu, A, Bc, w1, w2, cst)
            k2v, k2J = _field(dv + 0.5 * h * k1v, J + dJ + 0.5 * h * k1J, c_m, q_m,
                              ph, nu, A, Bc, w1, w2, cst)
            k3v, k3J = _field(dv + 0.5 * h * k2v, J + dJ + 0.5 * h * k2J, c_m, q_m,
                              ph, nu, A, Bc, w1, w2, cst)
            k4v, k4J = _field(dv + h * k3v, J + dJ + h * k3J, c_b, q_b,
                              ph, nu, A, Bc, w1, w2, cst)
            dv = dv + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            dJ = dJ + h / 6.0 * (k1J + 2.0 * k2J + 2.0 * k3J + k4J)
            r = 1.0 + dJ / J
            rmin = min(rmin, r)
            rmax = max(rmax, r)
        out_dv[i] = dv
        out_dJ[i] = dJ
        out_rmin[i] = rmin
        out_rmax[i] = rmax


def constants(params) -> np.ndarray:
    P = params
    kb = P.k * P.b_exp
    from .transforms import _delta_series

    return np.array([P.a_exp, P.b_exp, P.k, P.e_exp, P.kappa0, P.gamma, P.f_coef,
                     P.gamma * P.kappa0 ** P.b_exp, kb - 1.0, P.kappa0 ** P.b_exp, kb,
                     *_delta_series(P.a_exp, P.b_exp)])
