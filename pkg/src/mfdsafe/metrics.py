"""Quality of reported safe paths against a ground-truth decomposition.

Lengths are counted in nodes.  A reported path is correct when it occurs as
a contiguous run of some truth path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Sequence, TextIO

from .flow_graph import GroundTruth
from .paths import is_subpath

BUCKETS = (("t<=10", 10), ("t<=15", 15), ("all", None))


@dataclass(frozen=True)
class GraphMetrics:
    graph_id: str
    wprec: float
    maxcov: float
    fscore: float
    t: int
    empty: bool = False  # nothing reported; precision is 1 by convention


def _truth_nodes(truth: GroundTruth | Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    paths = truth.paths if isinstance(truth, GroundTruth) else truth
    return [tuple(getattr(p, "nodes", p)) for p in paths]


def weighted_precision(
    reported: Sequence[Sequence[int]],
    truth: GroundTruth | Sequence[Sequence[int]],
    weighted: bool = True,
) -> float:
    """Correct length over reported length, or the plain fraction of correct paths."""
    if not reported:
        return 1.0
    tpaths = _truth_nodes(truth)
    good = [any(is_subpath(p, q) for q in tpaths) for p in reported]
    if not weighted:
        return sum(good) / len(reported)
    total = sum(len(p) for p in reported)
    return sum(len(p) for p, ok in zip(reported, good) if ok) / total


def _longest_common_run(a: Sequence[int], b: Sequence[int]) -> int:
    best = 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
                best = max(best, cur[j])
        prev = cur
    return best


def max_coverage(truth_path: Sequence[int], reported: Iterable[Sequence[int]]) -> float:
    if not truth_path:
        raise ValueError("truth path must have at least one node")
    best = max((_longest_common_run(truth_path, p) for p in reported), default=0)
    return best / len(truth_path)


def f_score(p: float, c: float) -> float:
    return 0.0 if p + c == 0 else 2 * p * c / (p + c)


def graph_metrics(
    reported: Sequence[Sequence[int]],
    truth: GroundTruth,
    weighted: bool = True,
) -> GraphMetrics:
    tpaths = _truth_nodes(truth)
    if not tpaths:
        raise ValueError(f"graph {truth.graph_id!r} has no truth paths")
    wp = weighted_precision(reported, tpaths, weighted)
    mc = fmean(max_coverage(q, reported) for q in tpaths)
    fs = 0.0 if not reported else f_score(wp, mc)
    return GraphMetrics(truth.graph_id, wp, mc, fs, len(tpaths), empty=not reported)


def corpus_metrics(per_graph: Sequence[GraphMetrics]) -> dict:
    """Means overall, per bucket (t<=10, t<=15, all) and per exact t."""

    def mean(rows):
        rows = list(rows)
        if not rows:
            return None
        return {
            "graphs": len(rows),
            "wprec": fmean(m.wprec for m in rows),
            "maxcov": fmean(m.maxcov for m in rows),
            "fscore": fmean(m.fscore for m in rows),
        }

    return {
        "overall": mean(per_graph),
        "buckets": {name: mean(m for m in per_graph if cap is None or m.t <= cap)
                    for name, cap in BUCKETS},
        "per_t": {t: mean(m for m in per_graph if m.t == t)
                  for t in sorted({m.t for m in per_graph})},
    }


def write_metrics_csv(per_graph: Sequence[GraphMetrics], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["graph_id", "t", "wprec", "maxcov", "fscore", "empty"])
    for m in per_graph:
        w.writerow([m.graph_id, m.t, f"{m.wprec:.6f}", f"{m.maxcov:.6f}", f"{m.fscore:.6f}",
                    int(m.empty)])
    summary = corpus_metrics(per_graph)
    fh.write("\n")
    w.writerow(["bucket", "graphs", "wprec", "maxcov", "fscore"])
    for name, row in summary["buckets"].items():
        if row is None:
            w.writerow([name, 0, "", "", ""])
        else:
            w.writerow([name, row["graphs"], f"{row['wprec']:.6f}", f"{row['maxcov']:.6f}",
                        f"{row['fscore']:.6f}"])
