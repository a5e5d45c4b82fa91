from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from collections.abc import Callable, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, NoReturn, TextIO

from raagtree import __version__
from raagtree.core.config import get_settings
from raagtree.core.errors import RaagTreeError, UsageError
from raagtree.core.logging import configure_logging
from raagtree.core.metrics import COMMAND_LATENCY, write_metrics
from raagtree.models.stats import Mode, Statistic
from raagtree.models.tree import LabeledTree
from raagtree.schemas.reports import InvariantsReport, RunConfig
from raagtree.services import enumeration, homology, series_engine
from raagtree.services.storage import ArtifactStore, read_tree_file, write_json, write_jsonl
from raagtree.services.tree_core import boundary_profile, in_vanishing_class
from raagtree.services.verification import MONTECARLO_REPETITIONS, MONTECARLO_SAMPLES, SUITES, VerificationService

UTC = timezone.utc  # datetime.UTC is Python 3.11+

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

Records = list[dict[str, Any]]
_FLAG = re.compile(r"argument (--[\w-]+)")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting so run() owns the exit code."""

    def error(self, message: str) -> NoReturn:
        match = _FLAG.search(message)
        raise UsageError(message, flag=match.group(1) if match else None)


def _common_options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--no-timestamp", action="store_true", help="omit timestamps from the header and logs")
    common.add_argument("--workers", type=int, default=None, help="partition count (default: available CPUs)")
    common.add_argument("--metrics-file", type=Path, default=None, help="write prometheus text metrics here")
    common.add_argument("--log-level", default=None)
    common.add_argument("--save", action="store_true", help="also store the report under the output directory")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="raagtree", description="Random trees and the homology of their RAAG automorphism groups")
    parser.add_argument("--version", action="version", version=f"raagtree {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    invariants = sub.add_parser("invariants", parents=[common], help="boundary profile of one tree")
    invariants.add_argument("--input", type=Path, required=True)

    stats = [s.value for s in Statistic]
    enumerate_ = sub.add_parser("enumerate", parents=[common], help="exact statistic by exhaustive enumeration")
    enumerate_.add_argument("--n", type=int, required=True)
    enumerate_.add_argument("--stat", choices=stats, action="append", required=True)

    sample = sub.add_parser("sample", parents=[common], help="Monte Carlo estimate over uniform trees")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--stat", choices=stats, action="append", required=True)
    sample.add_argument("--samples", type=int, default=10_000)
    sample.add_argument("--seed", type=int, default=None)

    exact = sub.add_parser("exact", parents=[common], help="exact value from the generating functions")
    exact.add_argument("--n", type=int, required=True)
    exact.add_argument("--stat", choices=series_engine.EXACT_QUERIES, required=True)
    exact.add_argument("--k", type=int, default=None)

    constants = sub.add_parser("constants", parents=[common], help="limit constants to the requested precision")
    constants.add_argument("--digits", type=int, default=20)

    betti = sub.add_parser(
        "betti",
        parents=[common],
        help="first Betti number of Aut*, generated by transvections, partial conjugations and thin inversions",
    )
    betti.add_argument("--input", type=Path, required=True)
    betti.add_argument("--max-nodes", type=int, default=None)
    betti.add_argument("--emit-matrix", type=Path, default=None)
    betti.add_argument("--no-verify", action="store_true", help="skip the relator automorphism check")

    verify = sub.add_parser("verify", parents=[common], help="run verification suites")
    verify.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    verify.add_argument("--max-n", type=int, default=None)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--repetitions", type=int, default=MONTECARLO_REPETITIONS, help="Monte Carlo runs")
    verify.add_argument("--samples", type=int, default=MONTECARLO_SAMPLES, help="draws per Monte Carlo run")

    discrepancy = sub.add_parser("discrepancy", parents=[common], help="compare exact values with candidate limits")
    discrepancy.add_argument("--n", type=int, action="append", default=None)
    discrepancy.add_argument("--exhaustive-max", type=int, default=8)
    discrepancy.add_argument("--quantity", choices=("upsilon-per-node", "deep-fraction"), default="upsilon-per-node")
    return parser


def _read_tree(path: Path) -> LabeledTree:
    try:
        return read_tree_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}", flag="--input") from exc
    except UsageError:
        raise
    except RaagTreeError as exc:
        raise UsageError(f"{path}: {exc}", flag="--input") from exc


def cmd_invariants(args: argparse.Namespace) -> tuple[int, Records]:
    tree = _read_tree(args.input)
    profile = boundary_profile(tree)
    report = InvariantsReport(
        n=tree.n,
        deep=list(profile.deep),
        upsilon=profile.upsilon,
        shallow=profile.shallow,
        betti_lower_bound=profile.upsilon,
        distances=list(profile.distances),
        vanishing_class=in_vanishing_class(tree),
        equivalence_classes=[list(c) for c in tree.equivalence_classes],
    )
    return EXIT_OK, [report.model_dump()]


def cmd_enumerate(args: argparse.Namespace) -> tuple[int, Records]:
    records = [
        enumeration.estimate(stat, args.n, Mode.EXHAUSTIVE, workers=args.workers).as_record() for stat in args.stat
    ]
    return EXIT_OK, records


def cmd_sample(args: argparse.Namespace) -> tuple[int, Records]:
    if args.samples < 1:
        raise UsageError("--samples must be positive", flag="--samples")
    records = [
        enumeration.estimate(
            stat, args.n, Mode.MONTECARLO, seed=args.seed, samples=args.samples, workers=args.workers
        ).as_record()
        for stat in args.stat
    ]
    return EXIT_OK, records


def cmd_exact(args: argparse.Namespace) -> tuple[int, Records]:
    return EXIT_OK, [series_engine.exact_query(args.stat, args.n, args.k).model_dump(mode="json")]


def cmd_constants(args: argparse.Namespace) -> tuple[int, Records]:
    if args.digits < 1:
        raise UsageError("--digits must be positive", flag="--digits")
    table = series_engine.constants(args.digits)
    return EXIT_OK, [{"name": c.name, "value": c.render(args.digits), "digits": args.digits} for c in table.values()]


def cmd_betti(args: argparse.Namespace) -> tuple[int, Records]:
    tree = _read_tree(args.input)
    presentation = homology.build_presentation(tree, max_nodes=args.max_nodes, verify=not args.no_verify)
    if not presentation.verified:
        return EXIT_VERIFICATION_FAILED, [{"record": "failure", **f} for f in presentation.failures]
    if args.emit_matrix is not None:
        homology.write_matrix(presentation, args.emit_matrix)
    result = homology.betti_one(tree, presentation=presentation)
    theorem = homology.theorem_a_report(tree, presentation=presentation)
    vanishing = homology.vanishing_report(tree, presentation=presentation)
    record = {
        "record": "betti",
        "n": tree.n,
        **result.model_dump(),
        "upsilon": theorem.upsilon,
        "omega_rank": theorem.omega_rank,
        "theorem_a": theorem.holds,
        "vanishing_lemma": vanishing.holds,
        "vanishing_class": in_vanishing_class(tree),
    }
    return EXIT_OK, [record]


def cmd_verify(args: argparse.Namespace) -> tuple[int, Records]:
    if args.repetitions < 1:
        raise UsageError("--repetitions must be positive", flag="--repetitions")
    if args.samples < 1:
        raise UsageError("--samples must be positive", flag="--samples")
    service = VerificationService(
        max_n=args.max_n,
        workers=args.workers,
        seed=args.seed,
        repetitions=args.repetitions,
        samples=args.samples,
    )
    results = service.run(args.suite)
    records = [{"record": "suite", **r.model_dump(mode="json")} for r in results]
    passed = all(r.passed for r in results)
    return (EXIT_OK if passed else EXIT_VERIFICATION_FAILED), records


def cmd_discrepancy(args: argparse.Namespace) -> tuple[int, Records]:
    ns = args.n or [50, 100, 200, 400]
    report = series_engine.discrepancy_report(ns, exhaustive_max=args.exhaustive_max, quantity=args.quantity)
    return EXIT_OK, [report.model_dump(mode="json")]


COMMANDS: dict[str, Callable[[argparse.Namespace], tuple[int, Records]]] = {
    "invariants": cmd_invariants,
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
    "exact": cmd_exact,
    "constants": cmd_constants,
    "betti": cmd_betti,
    "verify": cmd_verify,
    "discrepancy": cmd_discrepancy,
}


def run_config(args: argparse.Namespace) -> RunConfig:
    settings = get_settings()
    budgets = settings.budgets()
    if getattr(args, "max_nodes", None):
        budgets["presentation"] = args.max_nodes
    stat = getattr(args, "stat", None)
    n = getattr(args, "n", None)
    seed = getattr(args, "seed", None)
    if seed is None and args.subcommand in ("sample", "verify"):
        seed = settings.default_seed
    return RunConfig(
        subcommand=args.subcommand,
        n=n if isinstance(n, int) else getattr(args, "max_n", None),
        k=getattr(args, "k", None),
        seed=seed,
        samples=getattr(args, "samples", None),
        statistic=",".join(stat) if isinstance(stat, list) else stat,
        suite=getattr(args, "suite", None),
        input=str(args.input) if getattr(args, "input", None) else None,
        output_format=args.output_format,
        precision=getattr(args, "digits", None),
        workers=args.workers or settings.effective_workers,
        budgets=budgets,
        version=__version__,
        timestamp=None if args.no_timestamp else datetime.now(UTC).isoformat(),
    )


def _cell(value: Any) -> Any:
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True)
    return value


def emit(records: Records, output_format: str, stream: TextIO) -> None:
    header, body = records[0], records[1:]
    if output_format == "json":
        for record in records:
            stream.write(json.dumps(record, sort_keys=True) + "\n")
    elif output_format == "csv":
        stream.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fieldnames = list(dict.fromkeys(key for record in body for key in record))
        writer = csv.DictWriter(stream, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for record in body:
            writer.writerow({key: _cell(value) for key, value in record.items()})
    else:
        for record in records:
            stream.write("  ".join(f"{key}={_cell(value)}" for key, value in record.items()) + "\n")


def _error(message: str, flag: str | None) -> None:
    payload = {"record": "error", "error": message}
    if flag:
        payload["flag"] = flag
    sys.stderr.write(json.dumps(payload) + "\n")


def run(argv: Sequence[str] | None = None, *, stream: TextIO | None = None) -> int:
    stream = stream or sys.stdout
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _error(str(exc), exc.flag)
        return EXIT_USAGE

    configure_logging(args.log_level or settings.log_level, timestamps=not args.no_timestamp)
    if args.workers is not None and args.workers < 1:
        _error("--workers must be positive", "--workers")
        return EXIT_USAGE

    try:
        config = run_config(args)
        with COMMAND_LATENCY.labels(command=args.subcommand).time():
            code, records = COMMANDS[args.subcommand](args)
    except UsageError as exc:
        _error(str(exc), exc.flag)
        return EXIT_USAGE
    except RaagTreeError as exc:
        logger.warning("command_failed", extra={"subcommand": args.subcommand, "error": str(exc)})
        _error(str(exc), getattr(exc, "flag", None))
        return EXIT_USAGE

    records = [config.as_record(), *records]
    emit(records, args.output_format, stream)
    if args.save:
        run_id = "latest" if args.no_timestamp else None
        run_dir = ArtifactStore().run_dir(args.subcommand, run_id)
        write_json(run_dir / "config.json", records[0])
        path = write_jsonl(run_dir / "report.jsonl", records)
        logger.info("report_saved", extra={"path": str(path)})
    if args.metrics_file is not None and settings.enable_metrics:
        write_metrics(args.metrics_file)
    logger.info("command_done", extra={"subcommand": args.subcommand, "exit_code": code})
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
