"""Command-line entry point: ``lagsoliton <command> [flags]``.

Exit codes: 0 overall pass, 1 any failure, 2 inconclusive, 64 usage error.
"""

import argparse
import os
import re
import sys
from dataclasses import dataclass, field
from math import gcd

from . import __version__, suites
from .report_io import write_csv_series, write_json

COMMANDS = ("verify-immersion", "verify-soliton", "brakke", "cones", "theorem", "sweep", "lambda")
EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2}
EXIT_USAGE = 64


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    p: int = None
    q: int = None
    lambdas: list = field(default_factory=list)
    level: float = 1.0
    which: str = "1.1"
    times: tuple = (0.25, 1.0, 4.0)
    t0: float = 1.0
    levels: int = 10
    grid: int = 20
    samples: int = 2048
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str = "lagsoliton-out"
    quiet: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="lagsoliton", description="Numerical verification suites for Lagrangian solitons.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--p", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--out", default="lagsoliton-out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--grid", type=int, default=20, help="parameter grid size per dimension")
        sp.add_argument("--quiet", action="store_true", help="print only the overall verdict")
        for key, val in suites.DEFAULT_TOLERANCES.items():
            sp.add_argument(f"--tol-{key}", type=float, default=None, metavar="X", help=f"default {val:g}")
        if name in ("verify-soliton", "lambda"):
            sp.add_argument("--lambdas", type=_floats, action="append", default=None,
                            help="comma-separated weights; repeat for several members")
            sp.add_argument("--level", type=float, default=1.0)
        if name == "brakke":
            sp.add_argument("--times", type=_floats, default=[0.25, 1.0, 4.0], help="|t| values")
        if name == "theorem":
            sp.add_argument("--which", choices=("1.1", "1.2"), default="1.1")
            sp.add_argument("--t0", type=float, default=1.0)
            sp.add_argument("--levels", type=int, default=10)
            sp.add_argument("--flow-times", type=_floats, default=[1.0])
        if name in ("cones", "sweep"):
            sp.add_argument("--samples", type=int, default=None)
    return parser


def config_from_args(args):
    tols = {k: getattr(args, f"tol_{k}") for k in suites.DEFAULT_TOLERANCES if getattr(args, f"tol_{k}") is not None}
    cfg = CliConfig(command=args.command, p=args.p, q=args.q, out=args.out, seed=args.seed, grid=args.grid,
                    tolerances=tols, quiet=args.quiet)
    cfg.lambdas = getattr(args, "lambdas", None) or []
    cfg.level = getattr(args, "level", 1.0)
    cfg.times = tuple(getattr(args, "times", cfg.times))
    cfg.which = getattr(args, "which", "1.1")
    cfg.t0 = getattr(args, "t0", 1.0)
    cfg.levels = getattr(args, "levels", 10)
    cfg.flow_times = tuple(getattr(args, "flow_times", (1.0,)))
    samples = getattr(args, "samples", None)
    cfg.samples = samples if samples is not None else (512 if args.command == "sweep" else 2048)
    return cfg


def validate(cfg):
    """Raise UsageError naming the violated constraint."""
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if (cfg.p is None) != (cfg.q is None):
        raise UsageError("--p and --q must be given together")
    if cfg.p is not None:
        if cfg.q < 1 or cfg.p <= cfg.q:
            raise UsageError(f"need p > q >= 1, got p={cfg.p}, q={cfg.q}")
        if gcd(cfg.p, cfg.q) != 1:
            raise UsageError(f"p={cfg.p} and q={cfg.q} must be coprime")
    if cfg.command == "theorem" and cfg.which == "1.2" and cfg.q is not None and cfg.q < 2:
        raise UsageError(f"--which 1.2 needs q > 1, got q={cfg.q}: the boundary circle term does not cancel for q = 1")
    for lam in cfg.lambdas:
        if len(lam) < 2:
            raise UsageError("--lambdas needs at least two weights")
        if any(x == 0 for x in lam):
            raise UsageError("every lambda_i must be nonzero")
    if cfg.command == "lambda" and cfg.level == 0:
        raise UsageError("--level must be nonzero")
    if cfg.grid < 2:
        raise UsageError("--grid must be at least 2")
    if cfg.command == "theorem" and cfg.levels < 2:
        raise UsageError("--levels must be at least 2")
    if cfg.command == "theorem" and not cfg.t0 > 0:
        raise UsageError("--t0 must be positive")
    if cfg.command == "brakke" and not all(t > 0 for t in cfg.times):
        raise UsageError("--times are magnitudes |t| and must be positive")
    if cfg.samples < 16:
        raise UsageError("--samples must be at least 16")
    for k, v in cfg.tolerances.items():
        if not v > 0:
            raise UsageError(f"--tol-{k} must be positive")


def _pairs(cfg, default):
    return [(cfg.p, cfg.q)] if cfg.p is not None else default


def build_report(cfg):
    c, tol = cfg.command, cfg.tolerances
    if c == "verify-immersion":
        return suites.verify_immersion(_pairs(cfg, suites.sweep_pairs()), cfg.grid, tol)
    if c == "verify-soliton":
        lams = cfg.lambdas or ([] if cfg.p is not None else list(suites.DEFAULT_LAMBDAS))
        return suites.verify_soliton(_pairs(cfg, suites.sweep_pairs()), cfg.grid, tol, lams)
    if c == "brakke":
        return suites.brakke_suite(_pairs(cfg, [(3, 2)]), cfg.times, tol)
    if c == "cones":
        p, q = (cfg.p, cfg.q) if cfg.p is not None else (3, 2)
        return suites.cones_suite(p, q, cfg.samples, cfg.seed, tol)
    if c == "theorem":
        p, q = (cfg.p, cfg.q) if cfg.p is not None else (3, 2)
        return suites.theorem_report(cfg.which, p, q, cfg.t0, cfg.levels, tol, cfg.flow_times)
    if c == "sweep":
        return suites.sweep_suite(_pairs(cfg, suites.sweep_pairs()), cfg.grid, cfg.samples, cfg.seed, tol)
    if c == "lambda":
        return suites.lambda_suite(cfg.lambdas or list(suites.DEFAULT_LAMBDAS), cfg.level, cfg.grid, tol)
    raise UsageError(c)


def _slug(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_")


def run(cfg):
    """Validate, run the suite, write ``<out>/<command>.json`` plus CSV series."""
    try:
        validate(cfg)
    except UsageError as exc:
        print(f"lagsoliton: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = build_report(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, f"{cfg.command}.json")
    write_json(report, path)
    for name, columns, rows in report.series:
        write_csv_series(name, columns, rows, os.path.join(cfg.out, f"{cfg.command}_{_slug(name)}.csv"))
    if not cfg.quiet:
        for cell in report.cells:
            print(f"{cell.verdict:<12} {cell.key}")
    print(f"{report.verdict:<12} overall ({len(report.cells)} cells) -> {path}")
    return EXIT_CODES[report.verdict]


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
