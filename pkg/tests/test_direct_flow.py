import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qposc.direct_flow import (CartesianState, energy, energy_envelope, integrate, psi_direct,
                               trajectory)
from qposc.errors import DomainError, HorizonError
from qposc.forcing import TorusForcing, default_forcing
from qposc.special_functions import derive_params
from qposc.transforms import action_from_energy, to_action_angle

P3 = derive_params(3.0)
FREE = TorusForcing.zero().at(np.zeros(2))
FORCED = default_forcing().at(np.array([0.3, 0.7]))


def test_energy_examples():
    assert energy(P3, CartesianState(0.0, -10.0, 0.0)) == 50.0
    assert energy(P3, CartesianState(P3.Lambda, 0.0, 0.0)) == pytest.approx(P3.Lambda ** 4 / 4)


def test_energy_action_identity(model3_free):
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, v = rng.normal(size=2) * 5
        E = energy(P3, CartesianState(x, v, 0.0))
        r = to_action_angle(model3_free, x, v, 0.0).r
        assert E == pytest.approx(P3.kappa1 * r ** P3.a_exp, rel=1e-12)
        assert r == pytest.approx(float(action_from_energy(P3, E)), rel=1e-14)


def test_free_flow_two_pi_period():
    s = integrate(P3, FREE, CartesianState(P3.Lambda, 0.0, 0.0), 2 * math.pi)
    assert abs(s.x - P3.Lambda) < 1e-8 and abs(s.v) < 1e-8 and s.t == 2 * math.pi


def test_energy_conserved_without_forcing():
    s0 = CartesianState(0.4, -2.0, 0.0)
    t, x, v = trajectory(P3, FREE, s0, np.linspace(0, 20, 200))
    E = 0.5 * v * v + x ** 4 / 4
    # samples come from the dense interpolant, which is a bit less accurate than the steps
    assert np.max(np.abs(E - energy(P3, s0))) < 1e-9 * energy(P3, s0)


def test_time_reversal():
    s0 = CartesianState(0.3, 1.5, 0.0)
    s1 = integrate(P3, FREE, s0, 7.0, tol=1e-12)
    s2 = integrate(P3, FREE, s1, 0.0, tol=1e-12)
    assert abs(s2.x - s0.x) < 10 * 1e-12 * 10 and abs(s2.v - s0.v) < 10 * 1e-12 * 10


@given(x=st.floats(-3, 3), v=st.floats(-3, 3), T=st.floats(0.1, 30))
@settings(max_examples=25)
def test_energy_envelope(x, v, T):
    s0 = CartesianState(x, v, 0.0)
    ts = np.linspace(0, T, 50)
    _, xs, vs = trajectory(P3, FORCED, s0, ts)
    for ti, xi, vi in zip(ts[1:], xs[1:], vs[1:]):
        lhs = math.sqrt(energy(P3, CartesianState(xi, vi, ti)))
        # slack covers the trapezoid error in the envelope integral
        assert lhs <= energy_envelope(P3, FORCED, s0, ti) * (1 + 1e-6) + 1e-12


def test_psi_free_closed_form():
    ev = psi_direct(P3, FREE, -10.0, 0.0)
    lam = (4 * 100 / 2) ** 0.25
    assert lam == pytest.approx(2 ** 0.25 * math.sqrt(10), rel=1e-15)
    assert lam == pytest.approx(3.76060, abs=1e-5)
    assert ev.v1 == pytest.approx(-10.0, rel=1e-10)
    assert ev.t1 == pytest.approx(P3.T1 / lam, rel=1e-10)
    assert ev.t1 == pytest.approx(1.97211, abs=1e-5)


def test_psi_free_iterates():
    t, v = 0.5, -7.0
    T = P3.T1 / ((4 * v * v / 2) ** 0.25)
    for n in range(1, 6):
        ev = psi_direct(P3, FREE, v, t)
        t, v = ev.t1, ev.v1
        assert t == pytest.approx(0.5 + n * T, rel=1e-10)
        assert v == pytest.approx(-7.0, rel=1e-9)


@given(v0=st.floats(-200, -5), t0=st.floats(0, 50))
@settings(max_examples=25)
def test_psi_event_properties(v0, t0):
    ev = psi_direct(P3, FORCED, v0, t0)
    assert ev.v1 < 0 and ev.t1 > t0
    s = integrate(P3, FORCED, CartesianState(0.0, v0, t0), ev.t1)
    assert abs(s.x) < 1e-10 * max(1, abs(ev.v1))
    assert s.v == pytest.approx(ev.v1, rel=1e-9)


def test_psi_rejects_bad_start():
    with pytest.raises(DomainError):
        psi_direct(P3, FORCED, 1.0, 0.0)
    with pytest.raises(DomainError):
        psi_direct(P3, FORCED, -5.0, 0.0, v_star=-10.0)


def test_psi_horizon():
    with pytest.raises(HorizonError):
        psi_direct(P3, FREE, -1.0, 0.0, horizon=0.5)


def test_nonfinite_state_rejected():
    from qposc.errors import NumericError
    with pytest.raises(NumericError):
        CartesianState(float("nan"), 0.0, 0.0)
