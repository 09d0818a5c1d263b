import json

import pytest

from qposc.cli import main
from qposc.results import read_orbit_csv, read_summary

FAST_VERIFY = """
det_samples = 2
cross_samples = 2
gap_samples = 8
"""


def run(tmp_path, argv, cfg_text=None):
    args = list(argv)
    if cfg_text is not None:
        p = tmp_path / "run.cfg"
        p.write_text(cfg_text)
        args += ["--config", str(p)]
    return main(args)


def test_params_report(tmp_path, capsys):
    assert run(tmp_path, ["params", "--out", str(tmp_path / "a")]) == 0
    doc = read_summary(tmp_path / "a" / "params.json")
    assert doc["constants"]["Lambda"] == pytest.approx(1.1803406, abs=1e-7)
    assert doc["constants"]["b_alpha"] == -0.25
    assert max(doc["identity_residuals"].values()) < 1e-12
    assert doc["thresholds"]["calI_top"] > 0
    assert run(tmp_path, ["params", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "params.json").read_bytes() == \
        (tmp_path / "b" / "params.json").read_bytes()


def test_params_to_stdout(tmp_path, capsys):
    assert run(tmp_path, ["params"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "params"


def test_rejected_configs(tmp_path, capsys):
    assert run(tmp_path, ["params"], "alpha = 2.9\n") == 2
    assert "alpha" in capsys.readouterr().err
    assert run(tmp_path, ["params"], "colour = blue\n") == 2
    assert run(tmp_path, ["params", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert run(tmp_path, ["nonsense"]) == 2
    assert run(tmp_path, ["params", "--seed", "-3"]) == 2
    assert run(tmp_path, ["params", "--threads", "-1"]) == 2


def test_orbit_start_below_v_star(tmp_path, capsys):
    assert run(tmp_path, ["orbit", "--out", str(tmp_path)], "v0 = -1\nn_max = 3\n") == 2
    assert "v_*" in capsys.readouterr().err


def test_orbit_free_forcing_constant_calI(tmp_path):
    cfg = "term = 1,0 0 0\nv0 = -200\nn_max = 25\n"
    assert run(tmp_path, ["orbit", "--out", str(tmp_path)], cfg) == 0
    rows = read_orbit_csv(tmp_path / "orbit.csv")
    assert len(rows) == 26
    assert len({r["calI_n"] for r in rows}) == 1
    doc = read_summary(tmp_path / "orbit.json")
    assert doc["summary"]["n_completed"] == 25 and not doc["summary"]["escape_suspect"]


def test_successor_routes(tmp_path):
    assert run(tmp_path, ["successor", "--out", str(tmp_path)], "v0 = -150\nt0 = 2\n") == 0
    doc = read_summary(tmp_path / "successor.json")
    assert doc["rel_discrepancy"]["v"] < 1e-6 and doc["rel_discrepancy"]["t"] < 1e-6
    assert run(tmp_path, ["successor"], "t0 = 1\n") == 2


ENS = "n_theta = 2\nn_orbits = 4\nn_max = 20\nrecord_stride = 5\ngap_samples = 4\nn_det = 1\n"


def test_ensemble_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path, ["ensemble", "--out", str(tmp_path / d), "--seed", "42"], ENS) == 0
    for f in ("ensemble.csv", "ensemble.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert run(tmp_path, ["ensemble", "--out", str(tmp_path / "c"), "--seed", "43"], ENS) == 0
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() != \
        (tmp_path / "c" / "ensemble.csv").read_bytes()
    doc = read_summary(tmp_path / "a" / "ensemble.json")
    assert doc["seed"] == 42 and doc["summary"]["escape_fraction"] == 0.0
    rows = read_orbit_csv(tmp_path / "a" / "ensemble.csv")
    keys = [(r["orbit_id"], r["n"]) for r in rows]
    assert keys == sorted(keys)


def test_ensemble_threads_do_not_change_output(tmp_path):
    assert run(tmp_path, ["ensemble", "--out", str(tmp_path / "a"), "--threads", "1"], ENS) == 0
    assert run(tmp_path, ["ensemble", "--out", str(tmp_path / "b"), "--threads", "0"], ENS) == 0
    a = read_summary(tmp_path / "a" / "ensemble.json")
    b = read_summary(tmp_path / "b" / "ensemble.json")
    a["config"].pop("threads"), b["config"].pop("threads")
    assert a == b
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() == \
        (tmp_path / "b" / "ensemble.csv").read_bytes()


@pytest.mark.slow
def test_verify_tampered_kappa1_fails(tmp_path, capsys):
    code = run(tmp_path, ["verify", "--out", str(tmp_path)], FAST_VERIFY + "tamper_kappa1 = 0.01\n")
    assert code == 1
    doc = read_summary(tmp_path / "verify.json")
    by = {c["name"]: c for c in doc["checks"]}
    assert by["constants"]["passed"] is False
    assert "constants" in doc["failed"]
    assert "[FAIL] constants" in capsys.readouterr().out


@pytest.mark.slow
def test_verify_zero_forcing_skips_fits(tmp_path, capsys):
    code = run(tmp_path, ["verify", "--out", str(tmp_path)], FAST_VERIFY + "term = 1,0 0 0\n")
    doc = read_summary(tmp_path / "verify.json")
    by = {c["name"]: c for c in doc["checks"]}
    assert by["remainder_scaling"]["passed"] is None
    assert by["adiabatic_invariant"]["passed"] is None
    assert code == 0, doc["failed"]
    out = capsys.readouterr().out
    assert "[SKIP] remainder_scaling" in out
