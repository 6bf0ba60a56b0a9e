"""Command-line entry point: ``reduce``, ``simulate`` and ``analyze``.

Exit codes: 0 success, 2 the unreduced input is not interesting, 3 the
oracle could not be run (or misbehaved), 4 invalid arguments, 130 interrupted.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from pathlib import Path
from typing import IO, Sequence

from .algorithms import ALGORITHM_NAMES
from .core import OracleCache, token_count
from .metrics import ReductionReport, correlation_analysis, read_session_log
from .oracle import (
    DirectoryCache,
    InitialTestFailed,
    OracleConfig,
    OracleError,
    ScriptOracle,
    verify_initial,
)
from .simulation import ALGORITHMS as SIM_ALGORITHMS
from .simulation import run_simulation
from .tree import TreeFormatError, build_tree, fixpoint_reduce, hdd_reduce, render
from .validation import check_p0

log = logging.getLogger("wdd")

EXIT_OK = 0
EXIT_INITIAL_FAILED = 2
EXIT_ORACLE_ERROR = 3
EXIT_BAD_ARGS = 4
EXIT_INTERRUPTED = 130

GRANULARITIES = {
    "token": "flat-token",
    "line": "flat-line",
    "tree-delimiters": "delimiters",
    "tree-json": "external-json",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: error: {message}")


def _p0(text: str) -> float:
    try:
        return check_p0(float(text))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def _algorithm_list(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    unknown = [n for n in names if n not in SIM_ALGORITHMS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm(s) {', '.join(unknown) or '(none)'}; choose from {', '.join(SIM_ALGORITHMS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wdd", description="Weight-aware delta debugging test-input reducer.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    red = sub.add_parser("reduce", help="minimize an input file against an oracle script")
    red.add_argument("--input", required=True, type=Path, help="file to reduce")
    red.add_argument("--oracle", required=True, type=Path,
                     help="executable; gets the candidate path as argv[1] and in REDUCE_CANDIDATE, exit 0 = interesting")
    red.add_argument("--algorithm", choices=ALGORITHM_NAMES, default="wddmin", help="default: wddmin")
    red.add_argument("--granularity", choices=tuple(GRANULARITIES), default="tree-delimiters",
                     help="default: tree-delimiters")
    red.add_argument("--fixpoint", action=argparse.BooleanOptionalAction, default=True,
                     help="repeat level sweeps until nothing more is deleted")
    red.add_argument("--p0", type=_p0, default=0.2, help="initial deletion probability for probdd/wprobdd")
    red.add_argument("--seed", type=int, default=None,
                     help="randomize probdd/wprobdd tie-breaking with this seed (default: deterministic)")
    red.add_argument("--output", type=Path, default=None, help="where to write the result (default: INPUT.min)")
    red.add_argument("--filename", default=None, help="candidate file name inside the oracle's directory "
                     "(default: the input's name)")
    red.add_argument("--timeout", type=_positive_float, default=60.0, help="seconds per oracle run")
    red.add_argument("--timeout-verdict", choices=("reject", "abort"), default="reject",
                     help="what a timed-out oracle run means")
    red.add_argument("--cache-dir", type=Path, default=None, help="persist oracle verdicts here")
    red.add_argument("--keep-temps", action="store_true", help="keep each oracle run's directory")
    red.add_argument("--env", action="append", default=None, metavar="NAME",
                     help="pass only these environment variables to the oracle (repeatable)")
    red.add_argument("--log", type=Path, default=None, help="write a JSON-lines session log")
    red.add_argument("--report", type=Path, default=None, help="write the report as CSV")

    sim = sub.add_parser("simulate", help="race the algorithms on synthetic weighted lists")
    sim.add_argument("--count", type=_positive_int, default=5000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--algorithms", type=_algorithm_list, default=("ddmin", "wddmin"),
                     help="comma-separated subset of " + ",".join(SIM_ALGORITHMS))
    sim.add_argument("--engine", choices=("auto", "compiled", "python"), default="auto")
    sim.add_argument("--out", type=Path, default=None, help="per-instance CSV")

    ana = sub.add_parser("analyze", help="weight/deletion correlation from a session log")
    ana.add_argument("log", type=Path, help="JSON-lines log written by reduce --log")
    return parser


class _SessionLog:
    def __init__(self, stream: IO[str] | None) -> None:
        self.stream = stream

    def __call__(self, record: dict) -> None:
        if self.stream is not None:
            self.stream.write(json.dumps(record, sort_keys=True) + "\n")


def _reduce(args: argparse.Namespace, out: IO[str]) -> int:
    fmt = GRANULARITIES[args.granularity]
    try:
        source = args.input.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    try:
        tree = build_tree(source, fmt)
    except TreeFormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    output = args.output or args.input.with_name(args.input.name + ".min")
    config = OracleConfig(
        script=args.oracle,
        filename=args.filename or args.input.name,
        timeout=args.timeout,
        cache_dir=args.cache_dir,
        env_passthrough=args.env,
        keep_temps=args.keep_temps,
        on_timeout=args.timeout_verdict,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    stream = open(args.log, "w", encoding="utf-8") if args.log else None
    session_log = _SessionLog(stream)
    try:
        start = time.monotonic()
        initial = render(tree)
        session_log({"event": "session", "input": str(args.input), "algorithm": args.algorithm,
                     "granularity": args.granularity, "fixpoint": args.fixpoint})
        verify_initial(initial, config)
        oracle = ScriptOracle(config)
        cache = DirectoryCache(args.cache_dir) if args.cache_dir else OracleCache()
        reducer = fixpoint_reduce if args.fixpoint else hdd_reduce
        rng = random.Random(args.seed) if args.seed is not None else None
        reduced = reducer(tree, args.algorithm, oracle, cache=cache, p0=args.p0, rng=rng,
                          log=session_log if stream else None)
        result = render(reduced)
        spawns = oracle.invocations + 2
        if not ScriptOracle(config)(result):
            raise OracleError("the reduced output is not interesting; is the oracle deterministic?")
        elapsed = time.monotonic() - start
        output.write_bytes(result)
        report = ReductionReport(
            initial_tokens=token_count(initial, "lexical"),
            final_tokens=token_count(result, "lexical"),
            elapsed=elapsed,
            tests=spawns,
            cache_hits=cache.hits,
            algorithm=args.algorithm,
            granularity=args.granularity,
        )
        session_log({"event": "report", **{k: getattr(report, k) for k in ReductionReport.CSV_COLUMNS}})
    finally:
        if stream is not None:
            stream.close()
    out.write(f"wrote {output}\n")
    out.write(report.to_text())
    if args.report:
        args.report.write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def _simulate(args: argparse.Namespace, out: IO[str]) -> int:
    report = run_simulation(args.count, seed=args.seed, algorithms=args.algorithms, engine=args.engine)
    if args.out:
        args.out.write_text(report.to_csv(), encoding="utf-8")
    out.write(report.summary() + "\n")
    return EXIT_OK


def _analyze(args: argparse.Namespace, out: IO[str]) -> int:
    try:
        records = read_session_log(args.log)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read session log: {exc}") from None
    out.write(correlation_analysis(records).to_text())
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out: IO[str] | None = None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_BAD_ARGS
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"reduce": _reduce, "simulate": _simulate, "analyze": _analyze}[args.command]
    try:
        return handler(args, out)
    except UsageError as exc:
        print(f"wdd {args.command}: {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS
    except InitialTestFailed as exc:
        print(f"wdd reduce: {exc}", file=sys.stderr)
        return EXIT_INITIAL_FAILED
    except OracleError as exc:
        print(f"wdd reduce: oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_ERROR
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
