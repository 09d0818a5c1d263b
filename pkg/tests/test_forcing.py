import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qposc.errors import DomainError
from qposc.forcing import (TorusForcing, TorusPoint, c4_norm_bound, default_forcing, eval_p,
                           iota, line_c4_norm_bound)

finite = dict(allow_nan=False, allow_infinity=False)
times = st.floats(-50, 50, **finite)
unit = st.floats(0, 1, exclude_max=True, **finite)


def rich_forcing():
    return default_forcing().with_terms([((1, 1), 0.02, -0.03), ((2, -1), 0.0, 0.01)])


def test_iota_examples():
    assert iota((1.0, math.sqrt(2)), 0.0).coords == (0.0, 0.0)
    p = iota((1.0, math.sqrt(2)), 1.0)
    assert p.coords[0] == 0.0
    assert p.coords[1] == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert p.coords[1] == pytest.approx(0.4142136, abs=1e-7)


@given(t=times, s=times)
def test_iota_homomorphism(t, s):
    w = (1.0, math.sqrt(2))
    lhs = np.array(iota(w, t + s).coords)
    rhs = np.array((iota(w, t) + iota(w, s)).coords)
    d = np.abs(lhs - rhs)
    assert np.all(np.minimum(d, 1 - d) < 1e-12)


@given(c=st.lists(st.floats(-1e6, 1e6, **finite), min_size=1, max_size=4))
def test_torus_point_reduced(c):
    p = TorusPoint(tuple(c))
    assert all(0.0 <= x < 1.0 for x in p.coords)


@given(th1=unit, th2=unit, t=times, s=times)
def test_shift_identity(th1, th2, t, s):
    f = rich_forcing()
    th = TorusPoint((th1, th2))
    lhs = f.at(th)(t + s)
    rhs = f.at(th + iota(f.omega, s))(t)
    assert abs(lhs - rhs) < 1e-12 * (1 + np.abs(f.a).sum() + np.abs(f.b).sum())


@given(th1=unit, th2=unit, shift=st.integers(-5, 5))
def test_torus_periodicity(th1, th2, shift):
    f = rich_forcing()
    a = f.torus_eval(TorusPoint((th1, th2)))
    b = f.torus_eval(np.array([th1 + shift, th2 - shift]))
    assert abs(a - b) < 1e-12


def test_constant_forcing_has_zero_derivatives():
    f = TorusForcing.from_terms((1.0,), [((0,), 0.7, 0.0)])
    for order in range(1, 5):
        assert eval_p(f, TorusPoint((0.3,)), 1.234, order) == 0.0
    assert eval_p(f, TorusPoint((0.3,)), 1.234, 0) == pytest.approx(0.7)


def test_single_cosine_derivative(single_cos):
    t = np.linspace(-2, 2, 41)
    got = eval_p(single_cos, TorusPoint((0.0,)), t, 1)
    assert np.allclose(got, -2 * math.pi * np.sin(2 * math.pi * t), atol=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_match_finite_differences(order):
    f = rich_forcing()
    th = TorusPoint((0.17, 0.61))
    t = np.linspace(-3, 3, 25)
    h = 1e-4
    fd = (eval_p(f, th, t + h, order - 1) - eval_p(f, th, t - h, order - 1)) / (2 * h)
    ex = eval_p(f, th, t, order)
    scale = np.max(np.abs(ex))
    assert np.max(np.abs(fd - ex)) / scale < 1e-6


def test_order_out_of_range():
    with pytest.raises(DomainError):
        eval_p(default_forcing(), TorusPoint((0, 0)), 0.0, 5)
    with pytest.raises(DomainError):
        eval_p(default_forcing(), TorusPoint((0, 0)), 0.0, -1)


def test_norm_bound_examples(single_cos):
    assert c4_norm_bound(TorusForcing.zero()) == 0.0
    assert c4_norm_bound(single_cos) == pytest.approx((2 * math.pi) ** 4)
    assert c4_norm_bound(single_cos) == pytest.approx(1558.5, abs=0.1)
    f = default_forcing()
    g = f.with_terms([((3, 0), 0.001, 0.0)])
    assert c4_norm_bound(g) >= c4_norm_bound(f)
    assert line_c4_norm_bound(f) == pytest.approx(4 * c4_norm_bound(f))


@given(th1=unit, th2=unit, t=times, order=st.integers(0, 4))
def test_values_below_norm_bound(th1, th2, t, order):
    f = rich_forcing()
    v = eval_p(f, TorusPoint((th1, th2)), t, order)
    assert abs(v) <= line_c4_norm_bound(f) + 1e-12
    assert abs(v) <= f.sup_bound(order) * (1 + 1e-12)


def test_batch_matches_scalar():
    f = rich_forcing()
    thetas = np.random.default_rng(3).random((7, 2))
    t = np.linspace(0, 5, 7)
    batch = f.at(thetas)(t, 2)
    single = [f.at(thetas[i])(t[i], 2) for i in range(7)]
    assert np.allclose(batch, single, rtol=0, atol=1e-13)


def test_shifted_forcing():
    f = rich_forcing()
    ph = f.at(np.array([0.2, 0.9]))
    sh = ph.shifted(3.7)
    t = np.linspace(-1, 1, 9)
    assert np.allclose(sh(t), ph(t + 3.7), atol=1e-13)
    assert np.allclose(sh.theta, iota(f.omega, 3.7).as_array() + [0.2, 0.9] - np.floor(
        iota(f.omega, 3.7).as_array() + [0.2, 0.9]))


def test_bad_frequencies():
    with pytest.raises(DomainError):
        TorusForcing.from_terms((1.0, -1.0), [])
