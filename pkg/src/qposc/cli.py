"""Command-line front end: ``qposc {params,verify,orbit,ensemble,successor}``.

Exit codes: 0 success, 1 failed check, 2 usage or configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .checks import BATTERY, CheckContext, CheckResult, check_campaign
from .config import RunConfig, default_config, load_config
from .direct_flow import psi_direct
from .errors import ConfigError, DomainError, InvariantBreach, NumericError, QposcError
from .results import dumps, write_json, write_orbit_csv
from .special_functions import build_table, derive_params
from .successor import (EnsembleConfig, OrbitPolicy, SuccessorPoint, ensemble_run,
                        iterate_batch, poincare_Phi, psi_transformed)
from .transforms import Model, compute_thresholds, forward_chain

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _params(cfg: RunConfig):
    P = derive_params(cfg.alpha)
    if cfg.tamper_kappa1:
        P = replace(P, kappa1=P.kappa1 * (1.0 + cfg.tamper_kappa1))
    return P


def build_model(cfg: RunConfig, with_thresholds: bool = True) -> Model:
    P = _params(cfg)
    tb = build_table(P)
    torus = cfg.torus()
    th = compute_thresholds(P, tb, torus, safety=cfg.safety) if with_thresholds else None
    return Model(P, tb, torus.at(cfg.theta_point()), th)


def _emit(out: Path | None, name: str, kind: str, payload: dict):
    if out is None:
        sys.stdout.write(dumps({"schema_version": 1, "kind": kind, **payload}))
    else:
        write_json(out / name, kind, payload)


# --------------------------------------------------------------------------
# subcommands


def cmd_params(cfg: RunConfig, out: Path | None) -> int:
    m = build_model(cfg)
    P, tb, th = m.params, m.table, m.thresholds
    t = np.linspace(0.0, 2 * math.pi, 10_000)
    c, s, _ = tb.eval(t)
    a = P.alpha
    ident = float(np.max(np.abs(0.5 * s * s + np.abs(c) ** (a + 1) / (a + 1)
                                - P.Lambda ** (a + 1) / (a + 1))))
    payload = dict(
        config=cfg.echo(),
        constants=dict(alpha=a, T1=P.T1, Lambda=P.Lambda, gamma=P.gamma, kappa1=P.kappa1,
                       kappa0=P.kappa0, b_alpha=P.b_alpha),
        exponents=P.exp_table,
        identity_residuals=P.identity_residuals(),
        table=dict(n_nodes=tb.n_nodes, achieved=tb.achieved, s_half_pi=tb.s_half_pi,
                   c1_max=tb.c1_max, energy_identity_max_residual=ident),
        thresholds=th.as_dict(),
    )
    _emit(out, "params.json", "params", payload)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path | None) -> int:
    ctx = CheckContext(alpha=cfg.alpha, torus=cfg.torus(), theta=cfg.theta_point().coords,
                       safety=cfg.safety, tol=cfg.tol_integrator, seed=cfg.seed,
                       det_samples=cfg.det_samples, cross_samples=cfg.cross_samples,
                       gap_samples=cfg.gap_samples, tamper_kappa1=cfg.tamper_kappa1)
    results = []
    for name, fn in BATTERY.items():
        try:
            r = fn(ctx)
        except QposcError as exc:
            r = CheckResult(name, False, detail=dict(error=f"{type(exc).__name__}: {exc}"))
        results.append(r)
        print(r.line(), flush=True)
    if cfg.verify_campaign:
        ens = _ensemble_config(cfg)
        try:
            r = check_campaign(ctx, ens)
        except QposcError as exc:
            r = CheckResult("rarity_probe", False, detail=dict(error=str(exc)))
        results.append(r)
        print(r.line(), flush=True)
    failed = [r.name for r in results if r.passed is False]
    payload = dict(config=cfg.echo(), checks=[r.as_dict() for r in results],
                   failed=failed, passed=not failed)
    if out is not None:
        write_json(out / "verify.json", "verify", payload)
    return EXIT_CHECK if failed else EXIT_OK


def _orbit_start(cfg: RunConfig, m: Model):
    if cfg.v0 is not None:
        th = m.thresholds
        if not cfg.v0 < th.v_star:
            raise DomainError(f"v0={cfg.v0} is not below v_*={th.v_star:.6g}")
        vphi, J = forward_chain(m, cfg.v0, cfg.t0)
        return float(vphi), float(J)
    if cfg.calI0 is not None:
        return cfg.varphi0, cfg.calI0
    raise ConfigError("orbit needs either v0 or calI0")


def cmd_orbit(cfg: RunConfig, out: Path) -> int:
    m = build_model(cfg)
    vphi0, J0 = _orbit_start(cfg, m)
    pol = OrbitPolicy(cfg.growth_factor, cfg.delta, cfg.burn_in, cfg.orbit_n_steps, 1)
    theta = np.asarray(cfg.theta_point().coords)
    s = iterate_batch(m, theta[None, :], [vphi0], [J0], cfg.n_max, pol)[0]
    write_orbit_csv(out / "orbit.csv", len(theta), [(0, s)])
    payload = dict(config=cfg.echo(), start=dict(varphi0=vphi0, calI0=J0),
                   summary=dict(n_completed=s.n_completed, left_domain=s.left_domain,
                                escape_suspect=s.escape_suspect,
                                recurrence_count=s.recurrence_count,
                                growth_ratio=s.growth_ratio),
                   thresholds=m.thresholds.as_dict())
    write_json(out / "orbit.json", "orbit", payload)
    return EXIT_OK


def _ensemble_config(cfg: RunConfig) -> EnsembleConfig:
    pol = OrbitPolicy(cfg.growth_factor, cfg.delta, cfg.burn_in, cfg.n_steps, cfg.record_stride)
    return EnsembleConfig(n_theta=cfg.n_theta, n_orbits=cfg.n_orbits, n_max=cfg.n_max,
                          calI_lo=cfg.calI_lo, calI_hi=cfg.calI_hi, seed=cfg.seed, policy=pol,
                          gap_levels=tuple(cfg.gap_levels), gap_samples=cfg.gap_samples,
                          n_det=cfg.n_det, threads=cfg.threads)


def cmd_ensemble(cfg: RunConfig, out: Path) -> int:
    m = build_model(cfg)
    ens = _ensemble_config(cfg)
    res = ensemble_run(m, ens)
    N = len(cfg.omega)
    write_orbit_csv(out / "ensemble.csv", N, [(oid, s) for oid, _, s in res.orbits])
    payload = dict(config=cfg.echo(), seed=cfg.seed, summary=res.summary(),
                   thresholds=m.thresholds.as_dict())
    write_json(out / "ensemble.json", "ensemble", payload)
    return EXIT_OK


def cmd_successor(cfg: RunConfig, out: Path | None) -> int:
    if cfg.v0 is None:
        raise ConfigError("successor needs v0")
    m = build_model(cfg)
    v1, t1 = psi_transformed(m, cfg.v0, cfg.t0, cfg.tol_integrator)
    ev = psi_direct(m.params, m.forcing, cfg.v0, cfg.t0, cfg.tol_integrator,
                    tol_event=cfg.tol_event)
    vphi0, J0 = forward_chain(m, cfg.v0, cfg.t0)
    phi = poincare_Phi(m, SuccessorPoint(float(vphi0), float(J0)), cfg.tol_integrator)
    payload = dict(
        config=cfg.echo(),
        transformed=dict(v1=v1, t1=t1),
        direct=dict(v1=ev.v1, t1=ev.t1),
        rel_discrepancy=dict(v=abs(v1 - ev.v1) / abs(ev.v1), t=abs(t1 - ev.t1) / abs(ev.t1)),
        Phi=dict(varphi0=float(vphi0), calI0=float(J0), varphi1=phi.varphi1, calI1=phi.calI1,
                 ratio_min=phi.ratio_min, ratio_max=phi.ratio_max),
    )
    _emit(out, "successor.json", "successor", payload)
    return EXIT_OK


COMMANDS = {"params": cmd_params, "verify": cmd_verify, "orbit": cmd_orbit,
            "ensemble": cmd_ensemble, "successor": cmd_successor}
NEEDS_OUT = {"orbit", "ensemble"}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qposc", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="flat key-value config file")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--threads", type=int, help="worker threads for ensembles (0 = auto)")
    ap.add_argument("--version", action="version", version=f"qposc {__version__}")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    overrides = {"seed": args.seed, "threads": args.threads}
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        cfg = load_config(args.config, overrides) if args.config else default_config(overrides)
        out = args.out
        if out is None and args.command in NEEDS_OUT:
            out = Path("qposc_out")
        if out is not None:
            try:
                out.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise ConfigError(f"cannot create output directory {out}: {exc.strerror}")
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, DomainError) as exc:
        print(f"qposc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, InvariantBreach) as exc:
        print(f"qposc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qposc: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
