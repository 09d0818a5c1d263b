"""The ten acceptance criteria at their stated sizes and tolerances.

Each test records its CheckResult; the terminal summary prints one
pass/fail line per criterion.  The sandwich criterion runs last because it
audits every Phi integration made earlier in the session.
"""

import pytest

from qposc.checks import (CheckContext, check_adiabatic, check_campaign, check_constants,
                          check_cross_route, check_identity, check_implicit_H, check_measure,
                          check_remainder, check_sandwich, check_symplectic)
from qposc.successor import EnsembleConfig

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

CTX = CheckContext(alpha=3.0, det_samples=30, cross_samples=100, gap_samples=64, seed=0)


def _record(report, num, title, res):
    report[num] = (title, res)
    print(res.line(), res.detail)
    assert res.passed, f"criterion {num} ({title}) failed: {res.detail}"


def test_c01_constants(acceptance_report):
    _record(acceptance_report, 1, "constants", check_constants(CTX))


def test_c02_special_function_identity(acceptance_report):
    _record(acceptance_report, 2, "special-function identity", check_identity(CTX))


def test_c03_symplecticity(acceptance_report):
    _record(acceptance_report, 3, "symplecticity", check_symplectic(CTX))


def test_c04_implicit_hamiltonian(acceptance_report):
    _record(acceptance_report, 4, "implicit Hamiltonian", check_implicit_H(CTX))


def test_c05_remainder_scaling(acceptance_report):
    _record(acceptance_report, 5, "remainder scaling", check_remainder(CTX))


def test_c06_adiabatic_invariant(acceptance_report):
    _record(acceptance_report, 6, "adiabatic invariant", check_adiabatic(CTX))


def test_c08_cross_route(acceptance_report):
    _record(acceptance_report, 8, "cross-route oracle", check_cross_route(CTX))


def test_c09_measure_certificate(acceptance_report):
    _record(acceptance_report, 9, "measure certificate", check_measure(CTX))


def test_c10_rarity_probe(acceptance_report):
    cfg = EnsembleConfig(n_theta=64, n_orbits=256, n_max=1000, calI_lo=1e4, calI_hi=1e5,
                         seed=42)
    _record(acceptance_report, 10, "rarity probe", check_campaign(CTX, cfg))


def test_c07_sandwiches(acceptance_report):
    _record(acceptance_report, 7, "sandwiches", check_sandwich(CTX))
