from __future__ import annotations

# Plan:
# 1) Load the scenario config (plus --set overrides) and resolve the shock closure.
# 2) Build the profile, run the half-line solver with the shift, record diagnostics.
# 3) Write records/summary and map failures to exit codes (1 invalid input or failed verdict, 2 numerical).

import argparse
import asyncio
import logging
from pathlib import Path

import numpy as np

from .config import DEFAULT_RIGHT_STATE, load_config
from .errors import NumericalError
from .poincare import poincare_check, poincare_suite
from .profile import build_profile_sweep, verify_profile_properties
from .scenario import run_scenario
from .sweep import load_sweep, run_sweep
from .thermo import GasParams


PROFILE_DELTAS = (0.2, 0.1, 0.05)


def main() -> None:
    args = _parse_args()
    _configure_logging(args.verbose)
    if args.init_config:
        _init_config(Path(args.config))
        return
    logger = logging.getLogger(__name__)
    try:
        code = _dispatch(args)
    except NumericalError as exc:
        logger.error("Numerical failure: %s", exc)
        raise SystemExit(2)
    except ValueError as exc:
        logger.error("Invalid input: %s", exc)
        raise SystemExit(1)
    if code:
        raise SystemExit(code)


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "run":
        config = load_config(args.config, args.overrides)
        summary = run_scenario(config, args.output)
        return 0 if summary.passed in (True, None) else 1
    if args.command == "sweep":
        sweep = load_sweep(args.sweep)
        output = Path(args.output or "./runs/sweep")
        report = asyncio.run(run_sweep(sweep, output, tuple(args.overrides)))
        logging.getLogger(__name__).info(
            "Sweep complete: %s members, %s failed -> %s", len(report.members), report.failed, output
        )
        return 0
    if args.command == "check-profile":
        return _check_profile(args)
    if args.command == "check-poincare":
        return _check_poincare(args)
    raise ValueError(f"unknown command: {args.command}")


def _parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Viscous shock stability lab for the half-line Navier-Stokes-Fourier system")
    parser.add_argument("--config", default="./config.yaml")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--init-config", action="store_true", help="Create a config.yaml template and exit")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="Run one scenario")
    run.add_argument("--output", default=None, help="Output directory (default: output.directory)")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")

    sweep = sub.add_parser("sweep", help="Run a parameter sweep")
    sweep.add_argument("sweep", help="Sweep file (YAML)")
    sweep.add_argument("--output", default=None)
    sweep.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")

    profile = sub.add_parser("check-profile", help="Verify profile properties over a delta sweep")
    profile.add_argument("--gamma", type=float, default=GasParams().gamma)
    profile.add_argument("--mu", type=float, default=1.0)
    profile.add_argument("--kappa", type=float, default=1.0)
    profile.add_argument("--delta", type=float, action="append", dest="deltas", default=None)

    poincare = sub.add_parser("check-poincare", help="Run the weighted Poincare inequality checks")
    poincare.add_argument("--count", type=int, default=1000)
    poincare.add_argument("--seed", type=int, default=0)

    args = parser.parse_args()
    if not args.init_config and args.command is None:
        parser.error("a command is required (run, sweep, check-profile, check-poincare)")
    return args


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(message)s")


def _init_config(target: Path) -> None:
    if target.exists():
        raise SystemExit(f"Config already exists at {target}")
    root = Path(__file__).resolve().parents[1]
    template = root / "config.example.yaml"
    if not template.exists():
        raise SystemExit("config.example.yaml not found")
    target.write_text(template.read_text(encoding="utf-8"), encoding="utf-8")
    print(f"Wrote config template to {target}")


def _check_profile(args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    gas = GasParams(R=1.0, gamma=args.gamma, mu=args.mu, kappa=args.kappa)
    deltas = sorted(args.deltas or PROFILE_DELTAS, reverse=True)
    profiles = build_profile_sweep(gas, DEFAULT_RIGHT_STATE, deltas)
    report = verify_profile_properties(profiles)
    for entry in report.entries:
        logger.info(
            "delta=%.4g monotone=%s tail=(%.4g, %.4g) rho_ratio=%.4g theta_ratio=%.4g vshock=%.2e",
            entry.delta,
            entry.monotone,
            entry.tail_rate_left,
            entry.tail_rate_right,
            entry.rho_ratio,
            entry.theta_ratio,
            entry.vshock_residual,
        )
    for key, slope in sorted(report.slopes.items()):
        logger.info("slope %s: %.3f", key, slope)
    for delta, deviation in zip(deltas, report.jacobian_deviations):
        logger.info("jacobian deviation delta=%.4g: %.3e", delta, deviation)
    logger.info("slope jacobian_deviation: %.3f", report.jacobian_slope)
    for failure in report.failures:
        logger.warning("%s", failure)
    return 0 if report.ok else 1


def _check_poincare(args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    y = np.linspace(0.0, 1.0, 4001)
    lhs, rhs, ok = poincare_check(y - 0.5, 0.0, 1.0)
    logger.info("linear case: lhs=%.10g rhs=%.10g ok=%s", lhs, rhs, ok)
    report = poincare_suite(count=args.count, seed=args.seed)
    logger.info("random suite: %s polynomials, %s failures, worst ratio %.6f", report.count, len(report.failures), report.worst_ratio)
    return 0 if ok and report.ok else 1


if __name__ == "__main__":
    main()
