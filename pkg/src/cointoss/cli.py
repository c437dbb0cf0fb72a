"""Command-line interface: runs, bias reports, optimization, scans, Monte Carlo.

Reports are deterministic: the same configuration (including the seed)
produces a byte-identical body. Structured output is flat ``key: value``
lines; tabular output is CSV with the configuration echoed in ``#``
comment lines. Scan output is always a CSV table.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import analysis
from .protocol import run_cheating_alice, run_cheating_bob, run_honest
from .qstate import NotNormalizedError
from .strategies import (
    AliceCheatStrategy,
    StrategyRegisterMismatchError,
    UnknownStrategyError,
    parse_strategy_id,
)

REPORT_SCHEMA = "cointoss.report/1"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNKNOWN_STRATEGY = 3
EXIT_INVARIANT = 4

_EPILOG = """\
exit codes:
  0  success
  2  invalid arguments or configuration
  3  unknown strategy identifier
  4  internal invariant violation

strategies:
  honest | optimal-alice | coefficients:<a00,a01,a10,a11> |
  measure-and-pick | random-bob:<seed>

The default seed is 0, or the value of COINTOSS_SEED when set;
an explicit --seed always wins.
"""


def _default_seed() -> int:
    return int(os.environ.get("COINTOSS_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointoss",
        description="Entanglement-based strong coin tossing: simulation and cheating analysis.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, strategy_default=None, with_trials=False):
        if strategy_default is not None:
            sub.add_argument("--strategy", default=strategy_default)
        sub.add_argument("--target", type=int, choices=(0, 1), default=0)
        if with_trials:
            sub.add_argument("--trials", type=int, default=100_000)
            sub.add_argument(
                "--engine", choices=("kernel", "protocol"), default="kernel"
            )
            sub.add_argument(
                "--transcript",
                metavar="PATH",
                default=None,
                help="also write the JSONL transcript of one run with this seed",
            )
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--format", choices=("structured", "tabular"), default="structured")
        sub.add_argument("--out", metavar="PATH", default=None)

    add_common(subparsers.add_parser("honest", help="honest runs"), with_trials=True)
    add_common(
        subparsers.add_parser("cheat-alice", help="runs with a cheating Alice"),
        strategy_default="optimal-alice",
        with_trials=True,
    )
    add_common(
        subparsers.add_parser("cheat-bob", help="runs with a cheating Bob"),
        strategy_default="measure-and-pick",
        with_trials=True,
    )
    add_common(
        subparsers.add_parser("bias", help="exact win/abort probabilities"),
        strategy_default="optimal-alice",
    )
    add_common(
        subparsers.add_parser("montecarlo", help="sampled frequencies vs exact values"),
        strategy_default="optimal-alice",
        with_trials=True,
    )

    optimize = subparsers.add_parser("optimize", help="maximize Alice's objective")
    optimize.add_argument("--grid-resolution", type=int, default=100)
    optimize.add_argument("--seed", type=int, default=None)
    optimize.add_argument("--format", choices=("structured", "tabular"), default="structured")
    optimize.add_argument("--out", metavar="PATH", default=None)

    scan = subparsers.add_parser("scan", help="honest-to-optimal sensitivity scan")
    scan.add_argument("--steps", type=int, default=50)
    scan.add_argument("--seed", type=int, default=None)
    scan.add_argument("--format", choices=("structured", "tabular"), default="structured")
    scan.add_argument("--out", metavar="PATH", default=None)

    return parser


def _config_mapping(args: argparse.Namespace, seed: int) -> dict:
    config = {"command": args.command, "seed": seed}
    for key in ("strategy", "target", "trials", "engine", "grid_resolution", "steps"):
        if hasattr(args, key):
            config[key] = getattr(args, key)
    config["format"] = args.format
    return config


def _render(config: dict, result: dict, output_format: str) -> str:
    if output_format == "structured":
        lines = [f"schema: {REPORT_SCHEMA}"]
        lines += [f"config.{k}: {analysis.format_value(v)}" for k, v in config.items()]
        lines += [f"result.{k}: {analysis.format_value(v)}" for k, v in result.items()]
        return "\n".join(lines) + "\n"
    lines = [f"# schema: {REPORT_SCHEMA}"]
    lines += [f"# config.{k}: {analysis.format_value(v)}" for k, v in config.items()]
    lines += analysis.csv_lines(list(result.keys()), [list(result.values())])
    return "\n".join(lines) + "\n"


def _render_table(config: dict, header, rows, constants: dict | None = None) -> str:
    lines = [f"# schema: {REPORT_SCHEMA}"]
    lines += [f"# config.{k}: {analysis.format_value(v)}" for k, v in config.items()]
    for key, value in (constants or {}).items():
        lines.append(f"# {key}: {analysis.format_value(value)}")
    lines += analysis.csv_lines(header, rows)
    return "\n".join(lines) + "\n"


def _infer_run_kind(strategy_id: str, target: int) -> str:
    if strategy_id == "honest":
        return "honest"
    strategy = parse_strategy_id(strategy_id, target)
    return "cheat-alice" if isinstance(strategy, AliceCheatStrategy) else "cheat-bob"


def _write_transcript(args: argparse.Namespace, run_kind: str, seed: int) -> None:
    if run_kind == "honest":
        _, transcript = run_honest(seed)
    else:
        strategy = parse_strategy_id(args.strategy, args.target)
        if isinstance(strategy, AliceCheatStrategy):
            _, transcript = run_cheating_alice(strategy, args.target, seed)
        else:
            _, transcript = run_cheating_bob(strategy, args.target, seed)
    with open(args.transcript, "w", encoding="utf-8") as handle:
        handle.write(transcript.to_jsonl())


def dispatch(args: argparse.Namespace) -> str:
    seed = args.seed if args.seed is not None else _default_seed()
    config = _config_mapping(args, seed)

    if args.command in ("honest", "cheat-alice", "cheat-bob", "montecarlo"):
        if args.command == "montecarlo":
            run_kind = _infer_run_kind(args.strategy, args.target)
        elif args.command == "honest":
            run_kind = "honest"
        else:
            run_kind = args.command
        strategy_id = getattr(args, "strategy", "honest")
        # Reject unknown identifiers before any sampling starts.
        if run_kind != "honest":
            parse_strategy_id(strategy_id, args.target)
        report = analysis.monte_carlo(
            run_kind,
            strategy_id=strategy_id,
            target=args.target,
            trials=args.trials,
            root_seed=seed,
            engine=args.engine,
        )
        if args.transcript:
            _write_transcript(args, run_kind, seed)
        return _render(config, report.as_mapping(), args.format)

    if args.command == "bias":
        strategy = parse_strategy_id(args.strategy, args.target)
        report = analysis.exact_win_probability(strategy, args.target)
        return _render(config, report.as_mapping(), args.format)

    if args.command == "optimize":
        result = analysis.optimize_alice(grid_resolution=args.grid_resolution)
        if args.format == "tabular":
            mapping = result.as_mapping()
            return _render_table(config, list(mapping.keys()), [list(mapping.values())])
        return _render(config, result.as_mapping(), args.format)

    if args.command == "scan":
        points = analysis.sensitivity_scan(args.steps)
        return _render_table(
            config,
            ("strategy", "p_win", "p_detect"),
            analysis.scan_rows(points),
            constants={
                "analytic_bound": analysis.ANALYTIC_BOUND,
                "kitaev_reference": analysis.KITAEV_REFERENCE,
            },
        )

    raise analysis.InvariantViolationError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    try:
        _default_seed()
    except ValueError:
        print("cointoss: COINTOSS_SEED must be an integer", file=sys.stderr)
        return EXIT_PARSE
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body = dispatch(args)
    except UnknownStrategyError as exc:
        print(f"cointoss: unknown strategy: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_STRATEGY
    except (ValueError, NotNormalizedError, StrategyRegisterMismatchError) as exc:
        print(f"cointoss: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except analysis.InvariantViolationError as exc:
        print(f"cointoss: internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(body)
    else:
        sys.stdout.write(body)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
