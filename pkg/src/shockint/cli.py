"""Command-line front end: JSON configuration in, CSV fields and a JSON
report out.

    shockint run <config.json> [--out DIR] [--auto-eps] [--refine K]
                               [--print-report]
    shockint check <config.json>

Exit codes: 0 success, 2 no admissible interaction point, 3 solver failure
(no convergence, containment or determinism loss), 4 configuration error.
All logging goes to standard error; standard output carries only the
requested report.  Exports are byte-stable across runs and thread counts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import ahead as ahead_mod
from . import eos as eos_mod
from . import origin as origin_mod
from . import scheme as scheme_mod
from . import verify as verify_mod
from .errors import (
    ConfigError,
    ContainmentViolated,
    DegenerateJump,
    DeterminismViolated,
    HorizonExceeded,
    NewtonDiverged,
    NoAdmissibleRoot,
    AmbiguousRoot,
    NotConverged,
    ShockIntError,
    SingularJacobian,
    BadResolution,
)
from .grid import build_grid
from .jump import ShockSide

_SOLVER_ERRORS = (NotConverged, ContainmentViolated, DeterminismViolated,
                  HorizonExceeded, DegenerateJump, NewtonDiverged,
                  SingularJacobian)
_DATA_ERRORS = (NoAdmissibleRoot, AmbiguousRoot)

EXIT_OK = 0
EXIT_NO_ROOT = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4


def _log(msg):
    print(msg, file=sys.stderr)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read configuration {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON in {path}: {err}") from err
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("configuration root must be a JSON object")
    for key in ("eos", "ahead_left", "ahead_right", "epsilon"):
        if key not in cfg:
            raise ConfigError(f"configuration is missing required key {key!r}")
    if not (isinstance(cfg["epsilon"], (int, float)) and cfg["epsilon"] > 0):
        raise ConfigError(f"epsilon={cfg['epsilon']!r} must be a positive number")
    grid_blk = cfg.setdefault("grid", {})
    grid_blk.setdefault("N", 64)
    grid_blk.setdefault("Nsig", 64)
    for key in ("N", "Nsig"):
        if not (isinstance(grid_blk[key], int) and grid_blk[key] > 0):
            raise ConfigError(f"grid.{key}={grid_blk[key]!r} must be a positive integer")
    tol = cfg.setdefault("tolerances", {})
    tol.setdefault("tol_newton", 1e-12)
    tol.setdefault("tol_iter", 1e-11)
    tol.setdefault("max_iter", 200)
    for key in ("tol_newton", "tol_iter"):
        if not (isinstance(tol[key], (int, float)) and tol[key] > 0):
            raise ConfigError(f"tolerances.{key} must be positive")
    if not (isinstance(tol["max_iter"], int) and tol["max_iter"] > 0):
        raise ConfigError("tolerances.max_iter must be a positive integer")
    flags = cfg.setdefault("flags", {})
    flags.setdefault("auto_eps", False)
    flags.setdefault("validate_ahead", False)
    threads = os.environ.get("SHOCKINT_THREADS")
    if threads is not None:
        try:
            ival = int(threads)
        except ValueError as err:
            raise ConfigError(f"SHOCKINT_THREADS={threads!r} is not an integer") from err
        if ival < 1:
            raise ConfigError("SHOCKINT_THREADS must be >= 1")
    return cfg


def _setup(cfg):
    eos = eos_mod.from_config(cfg["eos"])
    left = ahead_mod.field_from_config(eos, ShockSide.LEFT, cfg["ahead_left"])
    right = ahead_mod.field_from_config(eos, ShockSide.RIGHT, cfg["ahead_right"])
    if cfg["flags"]["validate_ahead"]:
        for name, fld in (("ahead_left", left), ("ahead_right", right)):
            ts = np.linspace(0.0, 0.5 * fld.t_max, 9)
            xs = np.linspace(-1.0, 1.0, 9)
            worst, ok = ahead_mod.validate_field(fld, ts, xs)
            if not ok:
                _log(f"warning: {name} PDE residual {worst:.3e} exceeds 1e-06")
    ipd, left, right = origin_mod.build_interaction_data(eos, left, right)
    return eos, left, right, ipd


def _fmt(x) -> str:
    return format(float(x), ".17g")


def export_physical(solution, grid, eos, path):
    """One CSV row per grid node (v-major, sigma-minor): coordinates, the
    kinematic map, invariants and primitive variables."""
    alpha = solution.alpha_plus(grid.u)
    beta = np.broadcast_to(solution.beta_plus.values[:, None], grid.u.shape)
    rho, w, eta = eos_mod.invariants_arrays(eos, alpha, beta)
    cols = (grid.u, np.broadcast_to(grid.v[:, None], grid.u.shape),
            solution.t.values, solution.x.values, alpha, beta, rho, w,
            w - eta, w + eta)
    with open(path, "w", newline="") as fh:
        fh.write("u,v,t,x,alpha,beta,rho,w,c_in,c_out\n")
        for j in range(grid.N + 1):
            for i in range(grid.Nsig + 1):
                fh.write(",".join(_fmt(c[j, i]) for c in cols) + "\n")


def export_shock(trace, path):
    with open(path, "w", newline="") as fh:
        fh.write("param,t,x,V,alpha_plus,beta_plus,alpha_minus,beta_minus,"
                 "J_residual,margin_lo,margin_hi\n")
        for k in range(len(trace.param)):
            row = (trace.param[k], trace.t_plus[k], trace.x_plus[k], trace.V[k],
                   trace.alpha_plus[k], trace.beta_plus[k],
                   trace.alpha_minus[k], trace.beta_minus[k],
                   trace.j_residual[k], trace.margin_lo[k], trace.margin_hi[k])
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _run_once(eos, left, right, ipd, epsilon, n, nsig, tol):
    grid = build_grid(epsilon, ipd.a, n, nsig)
    cfg = scheme_mod.SchemeConfig(
        eos=eos, left_field=left, right_field=right, ipd=ipd, grid=grid,
        tol_newton=tol["tol_newton"], tol_iter=tol["tol_iter"],
        max_iter=tol["max_iter"], progress=True)
    solution, diag = scheme_mod.run_iteration(cfg)
    return grid, cfg, solution, diag


def run(config_path, out_dir=None, auto_eps=False, refine=0,
        print_report=False) -> int:
    """Full pipeline: origin solve, iteration, certification, exports."""
    try:
        cfg = load_config(config_path)
    except ConfigError as err:
        _log(f"configuration error: {err}")
        return EXIT_CONFIG

    out_dir = out_dir or cfg.get("output_dir", "out")
    try:
        eos, left, right, ipd = _setup(cfg)
    except ConfigError as err:
        _log(f"configuration error: {err}")
        return EXIT_CONFIG
    except _DATA_ERRORS as err:
        _log(f"no admissible interaction point: {err}")
        return EXIT_NO_ROOT

    n = cfg["grid"]["N"] * (2 ** refine)
    nsig = cfg["grid"]["Nsig"] * (2 ** refine)
    epsilon = float(cfg["epsilon"])
    tol = cfg["tolerances"]
    auto_eps = auto_eps or cfg["flags"]["auto_eps"]

    attempts = 0
    while True:
        try:
            grid, scfg, solution, diag = _run_once(
                eos, left, right, ipd, epsilon, n, nsig, tol)
            ratios = diag.ratios()
            if auto_eps and ratios and ratios[0] >= 0.9 and attempts < 8:
                _log(f"auto-eps: first ratio {ratios[0]:.3f} >= 0.9, halving "
                     f"epsilon to {epsilon / 2}")
                epsilon *= 0.5
                attempts += 1
                continue
            break
        except (ContainmentViolated, NotConverged) as err:
            if auto_eps and attempts < 8:
                _log(f"auto-eps: {err}; halving epsilon to {epsilon / 2}")
                epsilon *= 0.5
                attempts += 1
                continue
            _log(f"solver failure: {err}")
            return EXIT_SOLVER
        except BadResolution as err:
            _log(f"configuration error: {err}")
            return EXIT_CONFIG
        except _SOLVER_ERRORS as err:
            _log(f"solver failure: {err}")
            return EXIT_SOLVER

    try:
        residuals = verify_mod.residual_suite(solution, eos, left, right, ipd, grid)
        traces = scheme_mod.trace_shocks(solution, left, right, ipd)
    except _SOLVER_ERRORS as err:
        _log(f"solver failure during certification: {err}")
        return EXIT_SOLVER

    report = {
        "schema": 1,
        "converged": diag.converged,
        "iterations": diag.iterations,
        "epsilon": epsilon,
        "grid": {"N": n, "Nsig": nsig},
        "interaction_point": ipd.as_dict(),
        "convergence": diag.as_dict(),
        "residuals": residuals.as_dict(),
    }
    os.makedirs(out_dir, exist_ok=True)
    export_physical(solution, grid, eos, os.path.join(out_dir, "solution.csv"))
    export_shock(traces.left, os.path.join(out_dir, "shock_left.csv"))
    export_shock(traces.right, os.path.join(out_dir, "shock_right.csv"))
    text = json.dumps(report, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(text + "\n")
    if print_report:
        print(text)
    _log(f"run complete: {diag.iterations} iterations, outputs in {out_dir}")
    return EXIT_OK


def check(config_path) -> int:
    """Origin solve and determinism check only; interaction-point report to
    standard output."""
    try:
        cfg = load_config(config_path)
        _, _, _, ipd = _setup(cfg)
    except ConfigError as err:
        _log(f"configuration error: {err}")
        return EXIT_CONFIG
    except _DATA_ERRORS as err:
        _log(f"no admissible interaction point: {err}")
        return EXIT_NO_ROOT
    print(json.dumps({"schema": 1, "interaction_point": ipd.as_dict()},
                     indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shockint",
        description="Local solution of two colliding shocks in plane-symmetric "
                    "barotropic flow.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="solve, certify and export")
    p_run.add_argument("config", help="JSON run configuration")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--auto-eps", action="store_true",
                       help="halve epsilon (up to 8 times) until containment "
                            "holds and the first contraction ratio is < 0.9")
    p_run.add_argument("--refine", type=int, default=0, metavar="K",
                       help="double N and Nsig K times")
    p_run.add_argument("--print-report", action="store_true",
                       help="also print report.json to standard output")
    p_check = sub.add_parser("check", help="origin solve and determinism only")
    p_check.add_argument("config", help="JSON run configuration")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, out_dir=args.out, auto_eps=args.auto_eps,
                   refine=args.refine, print_report=args.print_report)
    return check(args.config)


if __name__ == "__main__":
    sys.exit(main())
