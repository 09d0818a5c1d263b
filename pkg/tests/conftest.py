import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qposc.forcing import TorusForcing, default_forcing
from qposc.special_functions import build_table, derive_params
from qposc.transforms import compute_thresholds, make_model

settings.register_profile(
    "qposc", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow])
settings.load_profile("qposc")


def _setup(alpha, torus):
    P = derive_params(alpha)
    tb = build_table(P)
    th = compute_thresholds(P, tb, torus)
    return make_model(P, tb, torus, thresholds=th)


@pytest.fixture(scope="session")
def model3():
    return _setup(3.0, default_forcing())


@pytest.fixture(scope="session")
def model5():
    return _setup(5.0, default_forcing())


@pytest.fixture(scope="session")
def model3_free():
    return _setup(3.0, TorusForcing.zero())


@pytest.fixture(scope="session")
def single_cos():
    return TorusForcing.from_terms((1.0,), [((1,), 1.0, 0.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


TWO_PI = 2 * math.pi


# -- acceptance report --------------------------------------------------------


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects (criterion, CheckResult) pairs; printed in the terminal summary."""
    store = getattr(request.config, "_qposc_acceptance", None)
    if store is None:
        store = {}
        request.config._qposc_acceptance = store
    return store


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_qposc_acceptance", None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(store):
        title, res = store[num]
        terminalreporter.write_line(f"criterion {num:2d} {title:<28s} {res.line()}")
