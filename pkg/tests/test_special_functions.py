import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad, solve_ivp
from scipy.special import ellipk

from qposc.errors import DomainError
from qposc.special_functions import (HALF_PI, TWO_PI, build_table, cached_table, derive_params,
                                     eval_c1, eval_cs, load_table, quarter_period, save_table)

ALPHAS = (3.0, 4.0, 5.0)


def elliptic_T1():
    # x'' + x^3 = 0 from (1, 0): quarter period sqrt(2) * K(1/2) / sqrt(2), parameter m = 1/2
    return 4 * ellipk(0.5)


@pytest.fixture(scope="module", params=ALPHAS)
def pt(request):
    P = derive_params(request.param)
    return P, build_table(P)


def test_alpha3_constants_match_elliptic_oracle():
    P = derive_params(3.0)
    T1 = elliptic_T1()
    assert P.T1 == pytest.approx(T1, rel=1e-13)
    assert P.T1 == pytest.approx(7.4162987, abs=1e-7)
    assert P.Lambda == pytest.approx(T1 / TWO_PI, rel=1e-13)
    assert P.Lambda == pytest.approx(1.1803406, abs=1e-7)


def test_b_alpha_values():
    assert derive_params(3.0).b_alpha == pytest.approx(-0.25, abs=1e-15)
    assert derive_params(3.0).e_exp == 0.0
    assert derive_params(5.0).b_alpha == pytest.approx(-7 / 12, abs=1e-15)


@pytest.mark.parametrize("alpha", ALPHAS + (3.5, 7.0))
def test_quarter_period_against_plain_quadrature(alpha):
    # algebraic endpoint weight (1 - x)^(-1/2) absorbs the singularity
    def g(x):
        return 1 / math.sqrt(2 / (alpha + 1) * (1 - x ** (alpha + 1)) / (1 - x)) if x < 1 else \
            1 / math.sqrt(2.0)

    ref = quad(g, 0, 1, weight="alg", wvar=(0.0, -0.5), epsabs=1e-14, epsrel=1e-13)[0]
    assert quarter_period(alpha) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("alpha", ALPHAS + (6.5,))
def test_defining_identities(alpha):
    P = derive_params(alpha)
    a = alpha
    assert P.period(P.Lambda) == pytest.approx(TWO_PI, rel=1e-13)
    assert P.gamma ** ((a + 3) / 2) * (2 / (a + 3)) * P.Lambda ** (a + 1) == pytest.approx(1, rel=1e-12)
    assert P.kappa1 == pytest.approx((P.gamma * P.Lambda) ** (a + 1) / (a + 1), rel=1e-12)
    assert P.kappa0 == pytest.approx(P.kappa1 ** (-(a + 3) / (2 * (a + 1))), rel=1e-12)
    assert P.b_alpha < (3 - a) / (2 * (a + 1)) <= 0
    assert max(P.identity_residuals().values()) < 1e-12


def test_alpha_below_three_rejected():
    with pytest.raises(DomainError):
        derive_params(2.9)


def test_exp_table_entries():
    P = derive_params(3.0)
    assert P.exp_table["3(1-a)/(2(a+1))"] == pytest.approx(-0.75)
    assert P.exp_table["(a+3)/(2(a+1))"] == pytest.approx(0.75)


def test_energy_identity_on_dense_grid(pt):
    P, tb = pt
    a = P.alpha
    t = np.linspace(-20, 20, 10_000)
    c, s = eval_cs(P, tb, t)
    res = np.abs(0.5 * s * s + np.abs(c) ** (a + 1) / (a + 1) - P.Lambda ** (a + 1) / (a + 1))
    assert res.max() < 1e-9 * P.Lambda ** (a + 1)


def test_anchor_values(pt):
    P, tb = pt
    c, s = eval_cs(P, tb, 0.0)
    assert c == P.Lambda and s == 0.0
    c, s = eval_cs(P, tb, HALF_PI)
    assert abs(c) < 1e-12 and s < 0
    assert s == pytest.approx(-math.sqrt(2 / (P.alpha + 1)) * P.Lambda ** ((P.alpha + 1) / 2),
                              rel=1e-11)
    assert eval_c1(P, tb, 0.0) == 0.0


@given(t=st.floats(-1e3, 1e3, allow_nan=False))
def test_symmetries(pt, t):
    P, tb = pt
    c, s, c1 = tb.eval(t)
    cm, sm, c1m = tb.eval(-t)
    cp, sp, c1p = tb.eval(t + math.pi)
    tol = 1e-10
    assert abs(cm - c) < tol and abs(sm + s) < tol and abs(c1m + c1) < tol
    assert abs(cp + c) < tol and abs(sp + s) < tol and abs(c1p + c1) < tol


def test_zero_means_and_c1_derivative(pt):
    P, tb = pt
    for f in (tb.c, tb.s, tb.c1):
        assert abs(quad(f, 0, TWO_PI, limit=400, epsabs=1e-13)[0]) < 1e-10
    t = np.linspace(0.1, 6.0, 37)
    for h in (1e-2, 5e-3):
        fd = (tb.c1(t + h) - tb.c1(t - h)) / (2 * h)
        err = np.max(np.abs(fd - tb.c(t)))
        assert err < 0.5 * h * h * P.Lambda * 10
    # second-order convergence
    e1 = np.max(np.abs((tb.c1(t + 1e-2) - tb.c1(t - 1e-2)) / 2e-2 - tb.c(t)))
    e2 = np.max(np.abs((tb.c1(t + 5e-3) - tb.c1(t - 5e-3)) / 1e-2 - tb.c(t)))
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)


def test_s_is_derivative_of_c(pt):
    P, tb = pt
    t = np.linspace(0.05, 6.2, 40)
    h = 1e-4
    assert np.max(np.abs((tb.c(t + h) - tb.c(t - h)) / (2 * h) - tb.s(t))) < 1e-7


def test_clockwise_sign_convention(pt):
    _, tb = pt
    t = np.linspace(0.01, math.pi - 0.01, 50)
    assert np.all(tb.s(t) < 0)


def test_unperturbed_flow_returns_after_two_pi(pt):
    P, _ = pt
    a = P.alpha
    sol = solve_ivp(lambda t, y: [y[1], -abs(y[0]) ** (a - 1) * y[0]], (0, TWO_PI),
                    [P.Lambda, 0.0], method="DOP853", rtol=1e-13, atol=1e-14)
    assert abs(sol.y[0, -1] - P.Lambda) < 1e-8 and abs(sol.y[1, -1]) < 1e-8


def test_table_cache_roundtrip(tmp_path):
    P = derive_params(3.0)
    tb = build_table(P)
    save_table(tb, tmp_path / "t.bin")
    tb2 = load_table(tmp_path / "t.bin")
    assert tb2.alpha == 3.0 and tb2.n_nodes == tb.n_nodes
    t = np.linspace(-5, 5, 101)
    assert np.array_equal(np.array(tb.eval(t)), np.array(tb2.eval(t)))
    tb3 = cached_table(P, cache_dir=tmp_path / "cache")
    tb4 = cached_table(P, cache_dir=tmp_path / "cache")
    assert np.array_equal(tb3.values, tb4.values)
    raw = (tmp_path / "t.bin").read_bytes()
    assert len(raw) == 24 + 4 * 8 * tb.n_nodes


def test_table_is_deterministic():
    P = derive_params(4.0)
    t = np.linspace(0, 7, 333)
    assert np.array_equal(np.array(build_table(P).eval(t)), np.array(build_table(P).eval(t)))
