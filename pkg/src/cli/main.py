"""Command-line entry point: ``udisc <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence, Tuple

import yaml

from src.cli.commands import (
    CommandContext,
    cmd_bounds,
    cmd_canonical,
    cmd_generate,
    cmd_scan,
    cmd_solve,
    cmd_table1,
    cmd_verify,
)
from src.errors import ParseError, UdiscError
from src.sdp.certify import CertificateReport
from src.utils.config import load_config
from src.utils.io import write_text
from src.utils.logging import setup_logging


LOGGER = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udisc", description="Optimal unambiguous discrimination of mixed quantum states"
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config file (built-in defaults otherwise)")
    common.add_argument("--output", default=None, help="Write the result here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=float, default=None)
    solver.add_argument("--max-iter", type=int, default=None)
    solver.add_argument("--workers", type=int, default=None, help="Grid points solved concurrently")

    tabular = argparse.ArgumentParser(add_help=False)
    tabular.add_argument("--csv", action="store_true", help="Emit CSV instead of JSON")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, solver], help="Solve a problem file")
    p.add_argument("problem")

    p = sub.add_parser("bounds", parents=[common, tabular], help="Closed-form bounds of a two-state problem")
    p.add_argument("problem")

    p = sub.add_parser("canonical", parents=[common, tabular], help="Canonical vectors of a two-state problem")
    p.add_argument("problem")

    p = sub.add_parser("table1", parents=[common, solver, tabular], help="Rank-two bound comparison table")
    p.add_argument("--theta1", type=float, default=None, help="Angle in radians")
    p.add_argument("--theta2", type=float, default=None, help="Angle in radians")
    p.add_argument("--cos1", type=float, default=None, help="cos(theta1), instead of --theta1")
    p.add_argument("--cos2", type=float, default=None, help="cos(theta2), instead of --theta2")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--ru-split", choices=["fidelity", "table"], default="fidelity")
    p.add_argument("--no-sdp", action="store_true", help="Skip the P_sdp column")

    p = sub.add_parser("scan", parents=[common, solver, tabular], help="Sweep the prior eta1")
    p.add_argument("problem")
    p.add_argument("--eta-grid", default=None, help="Point count N or a comma-separated list")

    p = sub.add_parser("verify", parents=[common], help="Recheck a solution file")
    p.add_argument("problem")
    p.add_argument("solution")

    p = sub.add_parser("generate", parents=[common], help="Write a random problem file")
    p.add_argument("--kind", choices=["pure-pair", "mixed"], default="mixed")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    return parser


def _context(args: argparse.Namespace) -> CommandContext:
    overrides = {"cli.workers": getattr(args, "workers", None)}
    try:
        cfg = load_config(args.config, overrides=overrides)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        raise ParseError(f"cannot load config: {exc}", location=args.config) from exc
    flags = {"tol": getattr(args, "tol", None), "max_iter": getattr(args, "max_iter", None)}
    return CommandContext(config=cfg, flags=flags, csv=getattr(args, "csv", False))


def _dispatch(args: argparse.Namespace, ctx: CommandContext) -> Tuple[str, Optional[CertificateReport]]:
    if args.command == "solve":
        return cmd_solve(args.problem, ctx), None
    if args.command == "bounds":
        return cmd_bounds(args.problem, ctx), None
    if args.command == "canonical":
        return cmd_canonical(args.problem, ctx), None
    if args.command == "table1":
        text = cmd_table1(
            ctx,
            theta1=args.theta1,
            theta2=args.theta2,
            cos1=args.cos1,
            cos2=args.cos2,
            grid=args.grid,
            x_max=args.x_max,
            ru_split=args.ru_split,
            with_sdp=not args.no_sdp,
        )
        return text, None
    if args.command == "scan":
        return cmd_scan(args.problem, ctx, args.eta_grid), None
    if args.command == "verify":
        return cmd_verify(args.problem, args.solution, ctx)
    return cmd_generate(args.kind, dim=args.dim, rank=args.rank, count=args.count, seed=args.seed), None


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        ctx = _context(args)
        level = "WARNING" if args.quiet else str(ctx.config.get("logging.level", "INFO")).upper()
        setup_logging(ctx.config.get("logging.log_dir"), level)

        text, report = _dispatch(args, ctx)
        if args.output:
            write_text(text, args.output)
            LOGGER.info("Wrote %s", args.output)
        else:
            sys.stdout.write(text)
        if report is not None:
            report.raise_for_failures()
    except UdiscError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
