"""mfd-safe: maximal safe paths for minimum flow decompositions.

Input graphs use the Catfish text format: ``# <graph id>``, a node count
line, then one ``<u> <v> <flow>`` line per edge.  Truth files use the same
headers followed by ``<weight>: <v1> ... <vm>`` lines.  Safe-paths files
hold ``# <graph id> <status>`` followed by one space-separated path per
line.  Exit status is 0 when every graph completed, 2 when some graph was
skipped, refused or fell back after a timeout, and 1 on a fatal error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from contextlib import contextmanager

from . import __version__
from .flow_graph import FlowGraph, ParseError, parse_graph_corpus, parse_truth_corpus, validate
from .metrics import graph_metrics, write_metrics_csv
from .oracle import Limits, OracleRefusal, oracle_maximal_safe
from .pipeline import (
    RunConfig,
    SafetyReport,
    read_safe_paths,
    run_corpus,
    write_safe_paths,
    write_stats,
)
from .safety_engine import VARIANTS

log = logging.getLogger("mfdsafe")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


class Fatal(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise Fatal(f"cannot read {path}: {exc.strerror}") from None


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise Fatal(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _load_graphs(path: str) -> list[FlowGraph]:
    try:
        return parse_graph_corpus(_read(path), strict=False)
    except ParseError as exc:
        raise Fatal(f"{path}: {exc}") from None


def _load_toml(path: str) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise Fatal(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise Fatal(f"{path}: {exc}") from None


def _config(args, variant: str | None = None) -> RunConfig:
    cmd = None
    if args.config:
        cmd = _load_toml(args.config).get("solver", {}).get("external_cmd")
    cmd = os.environ.get("MFD_SAFE_SOLVER") or cmd
    if args.backend == "external" and not cmd:
        raise Fatal("--backend external needs [solver] external_cmd in --config or MFD_SAFE_SOLVER")
    try:
        return RunConfig(
            variant=variant or args.variant,
            budget=args.timeout,
            backend=args.backend,
            external_cmd=cmd,
            prefilter=not args.no_prefilter,
            symmetry=not args.no_symmetry,
            bin_threshold=args.bin_threshold,
            workers=args.workers,
            seed=args.seed,
        )
    except ValueError as exc:
        raise Fatal(str(exc)) from None


def _exit_code(reports: list[SafetyReport]) -> int:
    return EXIT_OK if all(r.status == "complete" for r in reports) else EXIT_PARTIAL


def cmd_safe(args) -> int:
    graphs = _load_graphs(args.graphs)
    cfg = _config(args)
    result = run_corpus(graphs, cfg)
    with _output(args.output) as fh:
        write_safe_paths(result.reports, fh)
    if args.stats:
        with _output(args.stats) as fh:
            write_stats(result.reports, fh, timings=not args.no_timings)
    agg = result.aggregate
    log.info("%d graphs: %d complete, %d fallback, %d skipped, %d ILP calls",
             agg["graphs"], agg["complete"], agg["fallback"], agg["skipped"], agg["ilp_calls"])
    return _exit_code(result.reports)


def cmd_oracle(args) -> int:
    graphs = _load_graphs(args.graphs)
    limits = Limits(args.max_edges, args.max_flow, args.max_states)
    reports = []
    for g in graphs:
        if validate(g):
            reports.append(SafetyReport(g.graph_id, "skipped", "oracle"))
            continue
        try:
            paths = oracle_maximal_safe(g, limits)
        except OracleRefusal as exc:
            log.warning("oracle refused %r: %s", g.graph_id, exc)
            reports.append(SafetyReport(g.graph_id, "refused", "oracle"))
            continue
        reports.append(SafetyReport(
            g.graph_id, "complete", "oracle",
            sorted((g.label_path(p) for p in paths), key=lambda p: (p[0], -len(p), p)),
        ))
    with _output(args.output) as fh:
        write_safe_paths(reports, fh)
    return _exit_code(reports)


def cmd_eval(args) -> int:
    try:
        reported = read_safe_paths(_read(args.safe))
        truths = parse_truth_corpus(_read(args.truth))
    except (ParseError, ValueError) as exc:
        raise Fatal(str(exc)) from None
    rows = []
    missing = 0
    for truth in truths:
        if truth.graph_id not in reported:
            log.warning("no reported paths for graph %r", truth.graph_id)
            missing += 1
            continue
        rows.append(graph_metrics(reported[truth.graph_id][1], truth, weighted=not args.unweighted))
    extra = set(reported) - {t.graph_id for t in truths}
    for gid in sorted(extra):
        log.warning("graph %r has no ground truth", gid)
    with _output(args.output) as fh:
        write_metrics_csv(rows, fh)
    return EXIT_PARTIAL if missing or extra else EXIT_OK


def cmd_bench(args) -> int:
    graphs = _load_graphs(args.graphs)
    by_variant = {}
    for variant in VARIANTS:
        by_variant[variant] = run_corpus(graphs, _config(args, variant)).reports
    ok = [
        j for j in range(len(graphs))
        if all(by_variant[v][j].status == "complete" for v in VARIANTS)
    ]
    dropped = len(graphs) - len(ok)
    if dropped:
        log.info("dropping %d graphs that did not complete in every variant", dropped)
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "graphs", "time_s", "ilp_calls"])
        for variant, reports in by_variant.items():
            chosen = [reports[j] for j in ok]
            time_s = f"{sum(r.wall_time for r in chosen):.3f}" if not args.no_timings else ""
            w.writerow([variant, len(chosen), time_s, sum(r.ilp_calls for r in chosen)])
    return EXIT_PARTIAL if dropped else EXIT_OK


def _run_flags(p: argparse.ArgumentParser, variant: bool = True) -> None:
    if variant:
        p.add_argument("--variant", choices=list(VARIANTS), default="topdown",
                       help="safety search strategy (default: %(default)s)")
    p.add_argument("--timeout", type=float, default=120.0, metavar="SEC",
                   help="per-graph budget in seconds; on overrun the FD-safe paths are "
                        "reported instead (default: %(default)s)")
    p.add_argument("--backend", choices=["builtin", "external"], default="builtin",
                   help="builtin branch and bound, or an LP-file MILP solver (default: %(default)s)")
    p.add_argument("--config", metavar="TOML",
                   help="config file; [solver] external_cmd names the external solver "
                        "(overridden by MFD_SAFE_SOLVER)")
    p.add_argument("--no-prefilter", action="store_true",
                   help="do not certify positive-excess paths without a solver call")
    p.add_argument("--no-symmetry", action="store_true",
                   help="drop the weight-ordering constraints from the k search")
    p.add_argument("--bin-threshold", type=int, default=4, metavar="N",
                   help="twopointerbin scans spans of at most N linearly (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1, metavar="N",
                   help="worker processes; 1 gives fully deterministic output (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed passed to the external solver")
    p.add_argument("--no-timings", action="store_true",
                   help="leave timing columns empty so outputs are byte-reproducible")
    p.add_argument("-o", "--output", metavar="FILE", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfd-safe", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("safe", help="maximal safe paths for every graph in a corpus")
    p.add_argument("graphs", help="graph corpus file")
    _run_flags(p)
    p.add_argument("--stats", metavar="CSV",
                   help="per-graph stats: graph_id,variant,status,ilp_calls,wall_ms,num_safe_paths")
    p.set_defaults(func=cmd_safe)

    p = sub.add_parser("eval", help="precision, coverage and F-score against ground truth")
    p.add_argument("safe", help="safe-paths file")
    p.add_argument("truth", help="ground-truth corpus")
    p.add_argument("--unweighted", action="store_true",
                   help="precision as the fraction of correct paths instead of correct length")
    p.add_argument("-o", "--output", metavar="FILE", help="metrics CSV (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="brute-force maximal safe paths for small graphs")
    p.add_argument("graphs", help="graph corpus file")
    p.add_argument("--max-edges", type=int, default=Limits.max_edges)
    p.add_argument("--max-flow", type=int, default=Limits.max_flow)
    p.add_argument("--max-states", type=int, default=Limits.max_states)
    p.add_argument("-o", "--output", metavar="FILE", help="safe-paths file (default: stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run all four strategies and tabulate time and solver calls")
    p.add_argument("graphs", help="graph corpus file")
    _run_flags(p, variant=False)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Fatal as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
