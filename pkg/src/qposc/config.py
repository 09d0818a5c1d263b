"""Flat key-value run configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, and forcing
terms are given on repeated ``term`` lines::

    alpha = 3
    omega = 1 1.4142135623730951
    theta = 0 0
    term = 1,0  0.1  0        # k-vector, cosine coeff, sine coeff
    term = 0,1  0    0.05
    seed = 42

Unknown keys and malformed values are rejected with the line number.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .forcing import TorusForcing, TorusPoint

_DEFAULT_OMEGA = (1.0, math.sqrt(2.0))
_DEFAULT_TERMS = (((1, 0), 0.1, 0.0), ((0, 1), 0.0, 0.05))


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 3.0
    omega: tuple = _DEFAULT_OMEGA
    theta: tuple | None = None
    terms: tuple = _DEFAULT_TERMS
    safety: float = 2.0
    tol_integrator: float = 1e-12
    tol_newton: float = 1e-12
    tol_event: float = 1e-15
    # orbit / successor
    v0: float | None = None
    t0: float = 0.0
    calI0: float | None = None
    varphi0: float = 0.0
    # ensemble
    n_theta: int = 64
    n_orbits: int = 256
    n_max: int = 1000
    calI_lo: float = 1e4
    calI_hi: float = 1e5
    seed: int = 42
    growth_factor: float = 4.0
    delta: float = 0.05
    burn_in: int | None = None
    n_steps: int = 16
    orbit_n_steps: int = 64
    record_stride: int = 100
    gap_levels: tuple = (1e3, 1e4, 1e5, 1e6, 1e7)
    gap_samples: int = 64
    n_det: int = 4
    threads: int = 1
    # verify
    det_samples: int = 30
    cross_samples: int = 100
    tamper_kappa1: float = 0.0
    # campaign inside verify is off unless requested
    verify_campaign: bool = False

    def torus(self) -> TorusForcing:
        return TorusForcing.from_terms(self.omega, self.terms)

    def theta_point(self) -> TorusPoint:
        th = self.theta if self.theta is not None else (0.0,) * len(self.omega)
        return TorusPoint(th)

    def echo(self) -> dict:
        d = asdict(self)
        d["terms"] = [[list(k), a, b] for k, a, b in self.terms]
        d["omega"] = list(self.omega)
        d["theta"] = list(self.theta_point().coords)
        d["gap_levels"] = list(self.gap_levels)
        return d


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT = {"n_theta", "n_orbits", "n_max", "seed", "burn_in", "n_steps", "orbit_n_steps",
        "record_stride", "gap_samples", "n_det", "threads", "det_samples", "cross_samples"}
_POS_FLOAT = {"safety", "tol_integrator", "tol_newton", "tol_event", "calI_lo", "calI_hi",
              "growth_factor", "delta", "calI0"}
_VECTORS = {"omega", "theta", "gap_levels"}
_BOOL = {"verify_campaign"}


def _num(tok: str, where: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ConfigError(f"{where}: not a number: {tok!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where}: value must be finite")
    return x


def _vec(val: str, where: str) -> tuple:
    toks = val.replace(",", " ").split()
    if not toks:
        raise ConfigError(f"{where}: empty vector")
    return tuple(_num(t, where) for t in toks)


def _int(val: str, where: str) -> int:
    x = _num(val, where)
    if x != int(x):
        raise ConfigError(f"{where}: expected an integer, got {val!r}")
    return int(x)


def _term(val: str, where: str):
    toks = val.split()
    if len(toks) != 3:
        raise ConfigError(f"{where}: term needs 'k1,...,kN a b'")
    try:
        k = tuple(int(t) for t in toks[0].split(","))
    except ValueError:
        raise ConfigError(f"{where}: bad multi-index {toks[0]!r}") from None
    return k, _num(toks[1], where), _num(toks[2], where)


def parse_config(text: str, source: str = "<config>", overrides: dict | None = None) -> RunConfig:
    vals: dict = {}
    terms: list = []
    seen_term = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" in line:
            key, val = (s.strip() for s in line.split("=", 1))
        else:
            parts = line.split(None, 1)
            key, val = parts[0], (parts[1] if len(parts) > 1 else "")
        if key == "term":
            seen_term = True
            terms.append(_term(val, where))
            continue
        if key not in _FIELDS or key == "terms":
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in vals:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        if key in _VECTORS:
            vals[key] = _vec(val, where)
        elif key in _INT:
            vals[key] = _int(val, where)
        elif key in _BOOL:
            if val.lower() not in ("0", "1", "true", "false", "yes", "no"):
                raise ConfigError(f"{where}: expected a boolean, got {val!r}")
            vals[key] = val.lower() in ("1", "true", "yes")
        else:
            vals[key] = _num(val, where)
    if seen_term:
        vals["terms"] = tuple(terms)
    vals.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate(RunConfig(**vals), source)


def validate(cfg: RunConfig, source: str = "<config>") -> RunConfig:
    def bad(msg):
        raise ConfigError(f"{source}: {msg}")

    if not cfg.alpha >= 3.0:
        bad(f"alpha must be >= 3, got {cfg.alpha}")
    if any(w <= 0 for w in cfg.omega):
        bad("omega entries must be positive")
    N = len(cfg.omega)
    if cfg.theta is not None and len(cfg.theta) != N:
        bad(f"theta has {len(cfg.theta)} coordinates, omega has {N}")
    for k, _, _ in cfg.terms:
        if len(k) != N:
            bad(f"term multi-index {k} does not match N={N}")
    for name in _POS_FLOAT:
        v = getattr(cfg, name)
        if v is not None and not v > 0:
            bad(f"{name} must be positive")
    if cfg.safety < 1:
        bad("safety must be >= 1")
    if not 0 < cfg.delta < 1:
        bad("delta must lie in (0, 1)")
    if cfg.growth_factor <= 1:
        bad("growth_factor must exceed 1")
    if cfg.calI_lo > cfg.calI_hi:
        bad("calI_lo must not exceed calI_hi")
    for name in ("n_theta", "n_orbits", "n_max", "record_stride", "gap_samples",
                 "det_samples", "cross_samples"):
        if getattr(cfg, name) < 1:
            bad(f"{name} must be >= 1")
    if cfg.n_steps < 4 or cfg.orbit_n_steps < 4:
        bad("step counts must be >= 4")
    if cfg.n_det < 0 or cfg.threads < 0 or (cfg.burn_in is not None and cfg.burn_in < 0):
        bad("n_det, threads and burn_in must be non-negative")
    if not 0 <= cfg.seed < 2**64:
        bad("seed must be an unsigned 64-bit integer")
    if cfg.v0 is not None and not cfg.v0 < 0:
        bad("v0 must be negative")
    if any(L <= 0 for L in cfg.gap_levels):
        bad("gap_levels must be positive")
    if not -0.5 < cfg.tamper_kappa1 < 0.5:
        bad("tamper_kappa1 must lie in (-0.5, 0.5)")
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, str(p), overrides)


def default_config(overrides: dict | None = None) -> RunConfig:
    return parse_config("", "<defaults>", overrides)
