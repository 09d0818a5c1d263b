"""Bit-stable writers and version-checked readers for run outputs.

Floats are written with 17 significant digits (CSV) or Python's shortest
round-trip repr (JSON), so values survive a write/read cycle exactly and a
rerun with the same configuration produces identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
CSV_MAGIC = f"# qposc-orbits schema_version={SCHEMA_VERSION}"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, kind: str, payload: dict) -> Path:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}
    p = Path(path)
    p.write_text(dumps(doc))
    return p


def read_summary(path) -> dict:
    doc = json.loads(Path(path).read_text())
    v = doc.get("schema_version")
    if v != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {v!r} (expected {SCHEMA_VERSION})")
    return doc


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else format(x, ".17g")


def orbit_columns(N: int) -> list[str]:
    return (["orbit_id", "n", "t_n", "v_n", "varphi_n", "calI_n"]
            + [f"theta_{i + 1}" for i in range(N)]
            + ["left_domain", "escape_suspect"])


def write_orbit_csv(path, N: int, orbits) -> Path:
    """``orbits``: iterable of (orbit_id, OrbitSummary), written sorted by (orbit_id, n)."""
    buf = io.StringIO()
    buf.write(CSV_MAGIC + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(orbit_columns(N))
    for oid, s in sorted(orbits, key=lambda o: o[0]):
        for (n, t, v, vphi, J, th) in sorted(s.iterates, key=lambda r: r[0]):
            w.writerow([_fmt(oid), _fmt(n), _fmt(t), _fmt(v), _fmt(vphi), _fmt(J),
                        *(_fmt(c) for c in th), _fmt(s.left_domain), _fmt(s.escape_suspect)])
    p = Path(path)
    p.write_text(buf.getvalue())
    return p


def read_orbit_csv(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_MAGIC:
        raise ValueError(f"{path}: missing or unsupported schema header")
    rows = list(csv.DictReader(lines[1:]))
    out = []
    for r in rows:
        d = {}
        for k, v in r.items():
            if k in ("orbit_id", "n", "left_domain", "escape_suspect"):
                d[k] = int(v)
            else:
                d[k] = float(v)
        out.append(d)
    return out
