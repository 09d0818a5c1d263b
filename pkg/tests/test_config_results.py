import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qposc.config import RunConfig, default_config, load_config, parse_config
from qposc.errors import ConfigError
from qposc.results import (CSV_MAGIC, SCHEMA_VERSION, dumps, orbit_columns, read_orbit_csv,
                           read_summary, write_json, write_orbit_csv)
from qposc.successor import OrbitSummary

SAMPLE = """
# two-frequency forcing
alpha = 3
omega = 1 1.4142135623730951
theta 0.25 0.5
term = 1,0  0.1  0      # cosine on the first angle
term = 0,1  0    0.05
seed = 9
n_max = 10
"""


def test_parse_sample():
    cfg = parse_config(SAMPLE)
    assert cfg.alpha == 3.0 and cfg.seed == 9 and cfg.n_max == 10
    assert cfg.theta == (0.25, 0.5)
    assert cfg.terms == (((1, 0), 0.1, 0.0), ((0, 1), 0.0, 0.05))
    assert cfg.torus().N == 2
    assert cfg.theta_point().coords == (0.25, 0.5)


def test_defaults():
    cfg = default_config()
    assert cfg == RunConfig()
    assert cfg.n_theta == 64 and cfg.n_orbits == 256 and cfg.n_max == 1000
    assert (cfg.calI_lo, cfg.calI_hi) == (1e4, 1e5)


@pytest.mark.parametrize("text, msg", [
    ("alpha = 2.9", "alpha"),
    ("bogus = 1", "unknown key"),
    ("seed = 1\nseed = 2", "duplicate"),
    ("n_max = 1.5", "integer"),
    ("n_max = 0", "n_max"),
    ("alpha = nan", "finite"),
    ("alpha = three", "not a number"),
    ("term = 1 0.1", "term"),
    ("term = 1,x 0.1 0", "multi-index"),
    ("theta = 0.1", "theta"),
    ("term = 1,0,0 1 0", "multi-index"),
    ("delta = 1.5", "delta"),
    ("seed = -1", "seed"),
    ("v0 = 5", "v0"),
    ("omega = 1 -2", "omega"),
])
def test_rejections(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text, "cfg")


def test_error_carries_line_number():
    with pytest.raises(ConfigError, match=r"cfg:3"):
        parse_config("alpha = 3\n\nfoo = 2\n", "cfg")


def test_overrides_and_files(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(SAMPLE)
    cfg = load_config(p, {"seed": 123, "threads": None})
    assert cfg.seed == 123 and cfg.threads == 1
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


def test_echo_is_json_ready():
    d = parse_config(SAMPLE).echo()
    assert json.loads(dumps(d))["terms"] == [[[1, 0], 0.1, 0.0], [[0, 1], 0.0, 0.05]]


def test_zero_forcing_config():
    cfg = parse_config("term = 1,0 0 0")
    assert cfg.torus().is_zero


# -- results --------------------------------------------------------------------


def _summary(rows, left=False):
    return OrbitSummary(len(rows) - 1, rows, left, False, 0, 1.0)


def test_json_roundtrip_and_version(tmp_path):
    p = write_json(tmp_path / "s.json", "test", {"x": np.float64(1.5), "y": float("nan"),
                                                   "n": np.int64(3), "b": np.bool_(True)})
    doc = read_summary(p)
    assert doc["schema_version"] == SCHEMA_VERSION and doc["x"] == 1.5 and doc["y"] is None
    assert doc["n"] == 3 and doc["b"] is True
    doc["schema_version"] = 99
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="schema_version"):
        read_summary(tmp_path / "bad.json")


@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=4,
                     max_size=4))
def test_csv_float_roundtrip(tmp_path_factory, vals):
    d = tmp_path_factory.mktemp("csv")
    rows = [(0, vals[0], vals[1], vals[2], vals[3], (0.5, 0.25))]
    write_orbit_csv(d / "o.csv", 2, [(0, _summary(rows))])
    back = read_orbit_csv(d / "o.csv")[0]
    assert [back["t_n"], back["v_n"], back["varphi_n"], back["calI_n"]] == vals


def test_csv_sorted_and_header(tmp_path):
    a = _summary([(1, 1.0, -1.0, 0.0, 1.0, (0.1,)), (0, 0.0, -1.0, 0.0, 1.0, (0.0,))])
    b = _summary([(0, 0.0, -2.0, 0.0, 2.0, (0.3,))], left=True)
    p = write_orbit_csv(tmp_path / "o.csv", 1, [(5, a), (2, b)])
    lines = p.read_text().splitlines()
    assert lines[0] == CSV_MAGIC
    assert lines[1].split(",") == orbit_columns(1)
    rows = read_orbit_csv(p)
    assert [(r["orbit_id"], r["n"]) for r in rows] == [(2, 0), (5, 0), (5, 1)]
    assert rows[0]["left_domain"] == 1


def test_csv_nan_and_bad_header(tmp_path):
    s = _summary([(0, math.nan, math.nan, 0.0, 1.0, (0.0,))])
    p = write_orbit_csv(tmp_path / "o.csv", 1, [(0, s)])
    assert math.isnan(read_orbit_csv(p)[0]["t_n"])
    (tmp_path / "x.csv").write_text("# qposc-orbits schema_version=0\n")
    with pytest.raises(ValueError):
        read_orbit_csv(tmp_path / "x.csv")
