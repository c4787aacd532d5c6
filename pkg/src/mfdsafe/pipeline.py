"""Per-graph orchestration and corpus runs.

contract -> trivial unitigs -> funnel shortcut -> minimum k -> safety
variant -> (on budget overrun) fall back to maximal FD-safe paths.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .backends import make_backend
from .fd_safety import safe_flow_maximal_paths
from .flow_graph import FlowGraph, Path, validate
from .mfd_model import BudgetExceeded, Deadline, solve_min_k
from .paths import order_key, postprocess
from .preprocess import is_funnel, y_to_v_contract
from .safety_engine import VARIANTS, SafetyContext, all_max_safe_two_pointer_bin

log = logging.getLogger(__name__)

__all__ = ["RunConfig", "SafetyReport", "run_graph", "run_corpus", "postprocess"]


@dataclass
class RunConfig:
    variant: str = "topdown"
    budget: float = 120.0
    backend: str = "builtin"
    external_cmd: str | None = None
    prefilter: bool = True
    symmetry: bool = True
    bin_threshold: int = 4
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.budget > 0:
            raise ValueError("budget must be positive")
        if self.bin_threshold < 1:
            raise ValueError("bin threshold must be at least 1")


@dataclass
class SafetyReport:
    graph_id: str
    status: str  # complete | fallback | skipped
    variant: str
    maximal_safe: list[Path] = field(default_factory=list)  # original node labels
    provenance: list[str] = field(default_factory=list)
    ilp_calls: int = 0
    wall_time: float = 0.0
    k: int | None = None
    error: str | None = None


def _provenance(paths, trivial, certified, fallback):
    out = []
    for p in paths:
        if p in trivial:
            out.append("trivial")
        elif fallback:
            out.append("fallback")
        elif p in certified:
            out.append("excess_flow")
        else:
            out.append("ilp")
    return out


def run_graph(g: FlowGraph, cfg: RunConfig, backend=None) -> SafetyReport:
    t0 = time.monotonic()
    problems = validate(g)
    if problems:
        log.warning("skipping graph %r: %s", g.graph_id, "; ".join(map(str, problems)))
        return SafetyReport(g.graph_id, "skipped", cfg.variant, error="; ".join(map(str, problems)))

    cg, trivial = y_to_v_contract(g)
    if is_funnel(cg):
        paths = postprocess(trivial)
        return SafetyReport(
            g.graph_id, "complete", cfg.variant,
            [g.label_path(p) for p in paths], ["trivial"] * len(paths),
            wall_time=time.monotonic() - t0,
        )

    if backend is None:
        backend = make_backend(cfg.backend, cfg.external_cmd, cfg.seed)
    residual = cg.expanded_residual()
    deadline = Deadline(cfg.budget)
    calls = 0
    ctx = None
    try:
        best = solve_min_k(residual, backend, deadline, symmetry=cfg.symmetry)
        calls = best.calls
        ctx = SafetyContext(
            residual, best.k, [p.nodes for p in best.witness], backend, deadline,
            prefilter=cfg.prefilter, symmetry=False,
        )
        if cfg.variant == "twopointerbin":
            refs = all_max_safe_two_pointer_bin(ctx, cfg.bin_threshold)
        else:
            refs = VARIANTS[cfg.variant](ctx)
        found = [ctx.nodes(r) for r in refs]
        certified = {ctx.nodes(r) for r in ctx.certified}
        status = "complete"
    except BudgetExceeded:
        log.info("graph %r ran out of budget; reporting FD-safe paths", g.graph_id)
        found = safe_flow_maximal_paths(g)
        certified = set()
        status = "fallback"
    if ctx is not None:
        calls += ctx.ilp_calls
    paths = postprocess(list(found) + list(trivial))
    prov = _provenance(paths, set(trivial), certified, status == "fallback")
    labelled = [g.label_path(p) for p in paths]
    order = sorted(range(len(paths)), key=lambda j: order_key(labelled[j]))
    return SafetyReport(
        g.graph_id, status, cfg.variant,
        [labelled[j] for j in order], [prov[j] for j in order],
        ilp_calls=calls, wall_time=time.monotonic() - t0,
        k=ctx.k + len(trivial) if ctx is not None else None,
    )


def _run_one(args):
    g, cfg = args
    try:
        return run_graph(g, cfg)
    except Exception as exc:  # per-graph failure is recorded, never fatal
        log.error("graph %r failed: %s", g.graph_id, exc)
        return SafetyReport(g.graph_id, "skipped", cfg.variant, error=str(exc))


@dataclass
class CorpusResult:
    reports: list[SafetyReport]

    @property
    def aggregate(self) -> dict:
        done = [r for r in self.reports if r.status != "skipped"]
        return {
            "graphs": len(self.reports),
            "complete": sum(r.status == "complete" for r in self.reports),
            "fallback": sum(r.status == "fallback" for r in self.reports),
            "skipped": sum(r.status == "skipped" for r in self.reports),
            "ilp_calls": sum(r.ilp_calls for r in done),
            "wall_time": sum(r.wall_time for r in done),
            "per_variant": {
                v: {
                    "graphs": sum(r.variant == v for r in done),
                    "ilp_calls": sum(r.ilp_calls for r in done if r.variant == v),
                    "wall_time": sum(r.wall_time for r in done if r.variant == v),
                    "fallback": sum(r.status == "fallback" for r in done if r.variant == v),
                }
                for v in sorted({r.variant for r in done})
            },
        }


def run_corpus(graphs: Iterable[FlowGraph], cfg: RunConfig) -> CorpusResult:
    jobs = [(g, cfg) for g in graphs]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_run_one, jobs, chunksize=4))
    else:
        reports = [_run_one(job) for job in jobs]
    return CorpusResult(reports)


# ---------------------------------------------------------------------------
# output files


def write_safe_paths(reports: Iterable[SafetyReport], fh: TextIO) -> None:
    for r in reports:
        fh.write(f"# {r.graph_id} {r.status}\n")
        for p in r.maximal_safe:
            fh.write(" ".join(map(str, p)) + "\n")


def read_safe_paths(text: str) -> dict[str, tuple[str, list[Path]]]:
    out: dict[str, tuple[str, list[Path]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            head = line[1:].strip().rsplit(maxsplit=1)
            if len(head) != 2:
                raise ValueError(f"line {lineno}: header needs '<graph_id> <status>'")
            current = head[0]
            out[current] = (head[1], [])
        elif current is None:
            raise ValueError(f"line {lineno}: path before any header")
        else:
            try:
                out[current][1].append(tuple(int(tok) for tok in line.split()))
            except ValueError:
                raise ValueError(f"line {lineno}: bad path {line!r}") from None
    return out


STATS_COLUMNS = ["graph_id", "variant", "status", "ilp_calls", "wall_ms", "num_safe_paths"]


def write_stats(reports: Iterable[SafetyReport], fh: TextIO, timings: bool = True) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for r in reports:
        wall = f"{r.wall_time * 1000:.1f}" if timings else ""
        writer.writerow([r.graph_id, r.variant, r.status, r.ilp_calls, wall, len(r.maximal_safe)])


def stats_text(reports: Iterable[SafetyReport], timings: bool = True) -> str:
    buf = io.StringIO()
    write_stats(reports, buf, timings)
    return buf.getvalue()
