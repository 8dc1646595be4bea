# cli.py
#
# Command-line front end:
#   nlslab <subcommand> --config <path> [--seed N] [--out DIR]
# Subcommands: groundstate, spectrum, evolve, classify, onepass,
# threshold, virialcheck.
#
# Config is an INI file (sections [grid], [evolution], [modulation],
# [experiment]).  Outputs are CSV/JSON files whose headers carry the
# sha256 of the config and the seed, so identical config+seed runs are
# byte-identical.  Exit codes: 0 ok, 1 numeric failure, 2 usage error.

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    DataFamily,
    FATES,
    make_initial_data,
    make_modulation_hooks,
    make_virial_hooks,
    one_pass_check,
    run_scenario_scan,
    threshold_shoot,
)
from .evolution import EvolutionConfig, evolve
from .functionals import evaluate
from .ground_state import solve_ground_state
from .modulation import ModulationConstants, calibrate_constants
from .radial_grid import grad_norm2, make_grid
from .spectral import build_linearized, build_matrix_hamiltonian, gap_scan, \
    solve_unstable_mode
from .virial import make_weight, verify_identity

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["time", "M", "E", "K", "dQ", "lambda_plus", "lambda_minus",
               "S", "virial_bu", "virial_sc", "grad_norm"]


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    n: int
    r_max: float
    evo: EvolutionConfig
    consts: ModulationConstants | None   # None -> calibrate at runtime
    experiment: dict
    config_hash: str
    seed: int


def _get(cp, sec, key, cast, default):
    if cp.has_option(sec, key):
        return cast(cp.get(sec, key))
    return default


def load_config(path: str, seed_override: int | None = None) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = p.read_bytes()
    cp = configparser.ConfigParser()
    try:
        cp.read_string(raw.decode())
    except (configparser.Error, UnicodeDecodeError) as e:
        raise ConfigError(f"bad config: {e}") from e

    n = _get(cp, "grid", "n", int, 4096)
    r_max = _get(cp, "grid", "r_max", float, 30.0)
    if n < 64 or r_max <= 0:
        raise ConfigError("grid: need n >= 64 and r_max > 0")

    try:
        evo = EvolutionConfig(
            dt=_get(cp, "evolution", "dt", float, 1e-3),
            t_max=_get(cp, "evolution", "t_max", float, 10.0),
            sample_every=_get(cp, "evolution", "sample_every", int, 10),
            blowup_gradient_threshold=_get(cp, "evolution",
                                           "blowup_gradient_threshold",
                                           float, None),
            scatter_window=_get(cp, "evolution", "scatter_window", float, 2.0),
            outer_shell_fraction=_get(cp, "evolution", "outer_shell_fraction",
                                      float, 1e-3),
            snapshot_every=_get(cp, "evolution", "snapshot_every", int, 0),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e

    consts = None
    if cp.has_option("modulation", "delta_e"):
        dE = float(cp.get("modulation", "delta_e"))
        consts = ModulationConstants(
            delta_E=dE,
            delta_X=_get(cp, "modulation", "delta_x", float, dE / 2),
            delta_S=_get(cp, "modulation", "delta_s", float, dE / 8),
            R_star=_get(cp, "modulation", "r_star", float, dE / 80),
            eps_star=_get(cp, "modulation", "eps_star", float, dE / 800),
            eps0=_get(cp, "modulation", "eps0", float, dE),
        )
        # smallness hierarchy: each scale at least 4x the one below
        if consts.R_star < 4.0 * consts.eps_star or \
                consts.delta_S < 4.0 * consts.R_star:
            raise ConfigError("modulation: hierarchy eps* << R* << delta_S "
                              "violated (ratios must be >= 4)")

    experiment = dict(cp["experiment"]) if cp.has_section("experiment") else {}
    seed = seed_override if seed_override is not None else \
        int(experiment.get("seed", 0))
    return RunConfig(n=n, r_max=r_max, evo=evo, consts=consts,
                     experiment=experiment,
                     config_hash=hashlib.sha256(raw).hexdigest()[:16],
                     seed=seed)


def _header_lines(rc: RunConfig) -> list:
    return [f"# nlslab {__version__}",
            f"# config_hash={rc.config_hash}",
            f"# seed={rc.seed}"]


def _write_csv(path: Path, rc: RunConfig, rows: list):
    with open(path, "w", newline="") as f:
        for line in _header_lines(rc):
            f.write(line + "\n")
        wr = csv.writer(f)
        wr.writerow(CSV_COLUMNS)
        for row in rows:
            wr.writerow([f"{x:.12g}" if isinstance(x, float) else x
                         for x in row])


def _write_json(path: Path, rc: RunConfig, payload: dict):
    payload = {"nlslab": __version__, "config_hash": rc.config_hash,
               "seed": rc.seed, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=str) + "\n")


def _setup(rc: RunConfig):
    grid = make_grid(rc.n, rc.r_max)
    gs = solve_ground_state(grid)
    return grid, gs


def _spectral(rc: RunConfig, gs):
    pair = build_linearized(gs)
    sd = solve_unstable_mode(pair)
    consts = rc.consts or calibrate_constants(sd, gs, seed=rc.seed)
    return pair, sd, consts


def _traj_rows(traj) -> list:
    d = traj.diag
    n = len(traj.t)
    nancol = np.full(n, np.nan)

    def col(name):
        return d.get(name, nancol)

    return [[float(traj.t[i])] + [float(col(c)[i]) for c in CSV_COLUMNS[1:]]
            for i in range(n)]


# ---- subcommands ----

def cmd_groundstate(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    rep = evaluate(gs.Q, grid)
    checks = {
        "residual": (gs.residual_norm, gs.residual_norm <= 1e-6),
        "E_over_M": (rep.energy / rep.mass,
                     abs(rep.energy / rep.mass - 1.0) <= 1e-5),
        "K_over_grad2": (rep.K / rep.grad2, abs(rep.K) <= 1e-6 * rep.grad2),
        "pohozaev": (rep.grad2 / (3.0 * 2.0 * rep.mass),
                     abs(rep.grad2 / (6.0 * rep.mass) - 1.0) <= 1e-5),
        "J_eq_G": (rep.action / rep.G, abs(rep.action / rep.G - 1.0) <= 1e-6),
        "J_eq_I": (rep.action / rep.I, abs(rep.action / rep.I - 1.0) <= 1e-6),
    }
    ok = all(v[1] for v in checks.values())
    for name, (val, good) in checks.items():
        print(f"{name}: {val:.12g} [{'PASS' if good else 'FAIL'}]")
    print(f"q0: {gs.q0:.10f}")
    _write_json(out / "groundstate.json",
                rc, {"q0": gs.q0, "residual": gs.residual_norm,
                     "checks": {k: {"value": v, "pass": g}
                                for k, (v, g) in checks.items()}})
    return 0 if ok else 1


def cmd_spectrum(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    pair, sd, _ = _spectral(rc, gs)
    H = build_matrix_hamiltonian(gs, 1.0, 0.0, spectral=sd)
    scan = gap_scan(H)
    gap_ok = (scan.zero_multiplicity == 2
              and len(scan.eigenvalues) == 4 and not scan.spurious)
    print(f"mu: {sd.mu:.10f}")
    print(f"L-Q residual: {pair.lm_q_residual:.3e}")
    print(f"L+Q'+2Q residual: {pair.lp_qprime_residual:.3e}")
    print(f"gap contents: {scan.eigenvalues} "
          f"(zero x{scan.zero_multiplicity}) [{'PASS' if gap_ok else 'FAIL'}]")
    print(f"mu two-grid drift: {scan.mu_drift:.3e}")
    _write_json(out / "spectrum.json", rc,
                {"mu": sd.mu, "gap_eigenvalues": scan.eigenvalues,
                 "zero_multiplicity": scan.zero_multiplicity,
                 "mu_drift": scan.mu_drift, "spurious": scan.spurious})
    return 0 if gap_ok else 1


def _initial_datum(rc: RunConfig, sd, gs):
    ex = rc.experiment
    family = ex.get("family", "soliton")
    if family == "soliton":
        return gs.Q.astype(complex)
    if family == "gaussian":
        amp = float(ex.get("amplitude", 3.0))
        return amp * np.exp(-gs.grid.r**2) + 0j
    if family == "mode_seed":
        fam = DataFamily(a=float(ex.get("a", 0.05)),
                         b=float(ex.get("b", 0.0)),
                         phase=float(ex.get("phase", 0.0)))
        return make_initial_data(fam, sd, gs)
    raise ConfigError(f"unknown data family {family!r}")


def cmd_evolve(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    _, sd, consts = _spectral(rc, gs)
    u0 = _initial_datum(rc, sd, gs)
    hooks = {**make_modulation_hooks(sd, gs, consts),
             **make_virial_hooks(grid)}
    traj = evolve(u0, rc.evo, grid, hooks=hooks,
                  gradQ=float(np.sqrt(grad_norm2(gs.Q, grid))))
    _write_csv(out / "trajectory.csv", rc, _traj_rows(traj))
    print(f"stop: {traj.stop_reason} at t={traj.stop_time:.4f}")
    return 0


def cmd_classify(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    _, sd, consts = _spectral(rc, gs)
    eps = float(rc.experiment.get("eps", 0.05))
    table = run_scenario_scan(sd, gs, consts, eps=eps, cfg=None)
    rows = []
    for back in FATES:
        for fwd in FATES:
            fam = table.exemplars.get((back, fwd))
            rows.append({"backward": back, "forward": fwd,
                         "count": table.cell(back, fwd),
                         "exemplar": None if fam is None else
                         {"a": fam.a, "b": fam.b, "kind": fam.kind}})
    all_filled = all(r["count"] >= 1 for r in rows)
    with open(out / "scenarios.csv", "w", newline="") as f:
        for line in _header_lines(rc):
            f.write(line + "\n")
        wr = csv.writer(f)
        wr.writerow(["backward", "forward", "count", "a", "b", "kind"])
        for r in rows:
            ex = r["exemplar"] or {}
            wr.writerow([r["backward"], r["forward"], r["count"],
                         ex.get("a", ""), ex.get("b", ""), ex.get("kind", "")])
    _write_json(out / "scenarios.json", rc,
                {"cells": rows, "undecided": len(table.undecided),
                 "all_nine": all_filled})
    for r in rows:
        print(f"({r['backward']:>7s}, {r['forward']:>7s}): {r['count']}")
    return 0 if all_filled else 1


def cmd_onepass(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    _, sd, consts = _spectral(rc, gs)
    ex = rc.experiment
    rep = one_pass_check(sd, gs, consts,
                         R=float(ex["r"]) if "r" in ex else None,
                         n_traj=int(ex.get("ensemble_size", 100)),
                         seed=rc.seed)
    print(f"exiting trajectories: {rep.n_exiting}")
    print(f"violations: {rep.violations}")
    print(f"sign flips: {rep.sign_flips}")
    _write_json(out / "onepass.json", rc, rep.__dict__)
    return 0 if rep.violations == 0 and rep.sign_flips == 0 else 1


def cmd_threshold(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    _, sd, consts = _spectral(rc, gs)
    ex = rc.experiment
    res = threshold_shoot(int(ex.get("direction", 1)),
                          float(ex.get("tol", 1e-6)), sd, gs, consts)
    print(f"bracket: [{res.s_lo:.12g}, {res.s_hi:.12g}]")
    print(f"dwell times: {res.dwell}")
    print(f"approach rate: {res.approach_rate:.4f} (mu={sd.mu:.4f})")
    _write_json(out / "threshold.json", rc,
                {"s_lo": res.s_lo, "s_hi": res.s_hi, "b0": res.b0,
                 "dwell": {f"{k:g}": v for k, v in res.dwell.items()},
                 "approach_rate": res.approach_rate, "mu": sd.mu})
    return 0


def cmd_virialcheck(rc: RunConfig, out: Path) -> int:
    grid, gs = _setup(rc)
    m = float(rc.experiment.get("m", 20.0))
    cfg = EvolutionConfig(dt=rc.evo.dt, t_max=min(rc.evo.t_max, 2.0),
                          sample_every=10, snapshot_every=1)
    results = {}
    worst = 0.0
    for name, u0 in [("soliton", gs.Q.astype(complex)),
                     ("gaussian", 0.5 * np.exp(-grid.r**2) + 0j)]:
        traj = evolve(u0, cfg, grid,
                      gradQ=float(np.sqrt(grad_norm2(gs.Q, grid))))
        for variant in ("blowup", "scatter"):
            res = verify_identity(traj, make_weight(variant, grid, m))
            results[f"{name}_{variant}"] = res
            worst = max(worst, res)
            print(f"{name} / {variant}: residual {res:.3e}")
    # residual is splitting error, second order with a large constant on
    # soliton-shadowing runs (the unstable mode amplifies it)
    tol = max(1e-5, 1e4 * cfg.dt**2)
    _write_json(out / "virialcheck.json", rc,
                {"residuals": results, "tolerance": tol})
    return 0 if worst <= tol else 1


COMMANDS = {
    "groundstate": cmd_groundstate,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "classify": cmd_classify,
    "onepass": cmd_onepass,
    "threshold": cmd_threshold,
    "virialcheck": cmd_virialcheck,
}


def main(argv: list | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="nlslab",
        description="Numerical laboratory for the 3D radial focusing cubic NLS")
    ap.add_argument("subcommand", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI config file")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s [%(levelname)s] %(message)s")

    try:
        rc = load_config(args.config, seed_override=args.seed)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.subcommand](rc, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("run failed")
        print(f"numeric failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
