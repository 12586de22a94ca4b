"""
Command-line interface of the lattice laboratory.

Exit codes: 0 ok, 1 check failure, 2 usage error, 3 numeric or domain error.
"""

import argparse
import csv
import json
import logging
import sys
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from config import Config, config
from equilibria import bifurcation_curves, d_plus, solve_equilibria, trace_branches
from exceptions import CriteriaConflict, LatticeLabError
from lattice_sim import (
    build_ic,
    estimate_speed,
    estimate_upper_speed,
    integrate,
    write_interface_csv,
    write_trajectory_csv,
)
from models import ICKind, Params, SimConfig, SimulatePolicy
from region_scan import scan, write_csv
from standing_front import find_standing_front, write_profile_csv
from verification import run_suite
from wave_criteria import classify, classify_upper, gamma_fn

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats, empty for None"""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(header: Sequence[str], rows, out: Optional[str]) -> None:
    handle = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])
    finally:
        if out:
            handle.close()


def _axis(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError(f"--steps must be at least 1, got {steps}")
    return np.linspace(lo, hi, steps + 1)


def cmd_equilibria(args) -> int:
    roots = solve_equilibria(Params(a=args.a, d=args.d))
    if args.json:
        print(json.dumps([root.model_dump(mode="json") for root in roots], indent=2))
    else:
        _write_rows(["u", "v", "branch", "stability"],
                    [(r.u, r.v, r.branch.value, r.stability.value) for r in roots], None)
    return EXIT_OK


def cmd_curves(args) -> int:
    curves = [bifurcation_curves(float(a)) for a in _axis(args.a_min, args.a_max, args.steps)]
    rows = [(c.a, c.d_minus, c.d_plus) for c in curves]
    _write_rows(["a", "d_minus", "d_plus"], rows, args.out)
    return EXIT_OK


def cmd_gamma(args) -> int:
    rows = [(float(a), gamma_fn(float(a))) for a in _axis(args.a_min, args.a_max, args.steps)]
    _write_rows(["a", "gamma"], rows, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    params = Params(a=args.a, d=args.d)
    report = classify_upper(params) if args.upper else classify(params)
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_regions(args) -> int:
    grid = scan(
        (args.a_min, args.a_max), (args.d_min, args.d_max), args.res,
        simulate=SimulatePolicy(args.simulate), sim_budget=args.budget, seed=args.seed,
        workers=args.workers,
    )
    write_csv(grid, args.out)
    logger.info(f"Wrote {grid.shape[0]}x{grid.shape[1]} grid to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = Params(a=args.a, d=args.d)
    sim_config = SimConfig.for_params(
        params, N=args.n or config.SIM_N, t_end=args.t_end or config.SIM_T_END,
        record_stride=config.SIM_RECORD_STRIDE, dt_max=config.SIM_DT_MAX,
    )
    kind = ICKind(args.kind)
    trajectory = integrate(build_ic(kind, params, sim_config, width=args.width), params, sim_config)
    write_trajectory_csv(trajectory, args.out)
    if kind == ICKind.BICHROMATIC_FRONT:
        print(estimate_speed(trajectory, params).model_dump_json(indent=2))
        if args.interface_out:
            write_interface_csv(trajectory, params, args.interface_out)
    elif kind == ICKind.UPPER_BICHROMATIC_FRONT:
        print(estimate_upper_speed(trajectory, params).model_dump_json(indent=2))
    return EXIT_OK


def cmd_standing(args) -> int:
    profile = find_standing_front(Params(a=args.a, d=args.d), args.n, shift=args.shift)
    write_profile_csv(profile, args.out)
    print(f"residual {profile.residual_norm!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")
    failed = sum(not result.passed for result in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def cmd_branches(args) -> int:
    a = args.a
    d_values = np.linspace(0.0, d_plus(a), args.steps + 1)[:-1]
    samples = trace_branches(a, d_values)
    _write_rows(["branch", "d", "u", "v"], [(s.branch.value, s.d, s.u, s.v) for s in samples], args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-lab", description="Bichromatic Nagumo lattice laboratory")
    parser.add_argument("--config", help="Plain-text KEY=value configuration file")
    parser.add_argument("--log-level", help="Logging level (overrides LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", help="Print all roots with stability")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_equilibria)

    for name, handler, text in (("curves", cmd_curves, "CSV of a,d_minus,d_plus"),
                                ("gamma", cmd_gamma, "CSV of a,gamma")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--a-min", type=float, required=True)
        p.add_argument("--a-max", type=float, required=True)
        p.add_argument("--steps", type=int, required=True)
        p.add_argument("--out")
        p.set_defaults(handler=handler)

    p = sub.add_parser("classify", help="Criterion report at one point")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--upper", action="store_true", help="Classify the upper front instead")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("regions", help="Scan a parameter rectangle into CSV")
    p.add_argument("--a-min", type=float, required=True)
    p.add_argument("--a-max", type=float, required=True)
    p.add_argument("--d-min", type=float, required=True)
    p.add_argument("--d-max", type=float, required=True)
    p.add_argument("--res", type=int, required=True)
    p.add_argument("--simulate", choices=[policy.value for policy in SimulatePolicy], default="never")
    p.add_argument("--budget", type=int, help="Maximum number of simulated cells")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_regions)

    p = sub.add_parser("simulate", help="Integrate the lattice equation")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--kind", choices=[kind.value for kind in ICKind], default="bichromatic")
    p.add_argument("--t-end", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--width", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.add_argument("--interface-out")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("standing", help="Newton solve for a standing front")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_standing)

    p = sub.add_parser("verify", help="Run acceptance checks")
    p.add_argument("--suite", choices=["corner", "cusp", "gamma", "all"], default="all")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("branches", help="CSV of the traced branch diagram at fixed a")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_branches)
    return parser


def _configure(args) -> None:
    overrides = {"LOG_LEVEL": args.log_level}
    if args.config:
        loaded = Config.from_file(args.config, overrides=overrides)
    else:
        loaded = config.with_values({k: v for k, v in overrides.items() if v is not None})
    config.update_from(loaded)
    level = getattr(logging, config.LOG_LEVEL.upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level {config.LOG_LEVEL!r}")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        _configure(args)
    except (ValueError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except CriteriaConflict as e:
        print(f"check failed: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (LatticeLabError, ValidationError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
