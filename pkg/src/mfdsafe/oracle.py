"""Brute-force ground truth for small graphs.

Decompositions are enumerated directly from the definition: pick distinct
s-t paths in index order, give each a positive integer weight, and keep the
choices whose superposition is exactly the flow.  Nothing here touches the
solver backends or the safety engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .flow_graph import FlowGraph, Path, WeightedPath


class OracleRefusal(Exception):
    """The graph is outside the limits within which the oracle is exhaustive."""


@dataclass(frozen=True)
class Limits:
    max_edges: int = 12
    max_flow: int = 20
    max_states: int = 10**6


@dataclass
class DecompositionSet:
    k: int
    decompositions: list[tuple[WeightedPath, ...]]


class _Enumerator:
    def __init__(self, g: FlowGraph, limits: Limits, exclude: Path | None = None):
        if g.num_edges > limits.max_edges:
            raise OracleRefusal(f"{g.num_edges} edges exceeds {limits.max_edges}")
        if g.total_flow > limits.max_flow:
            raise OracleRefusal(f"source outflow {g.total_flow} exceeds {limits.max_flow}")
        self.g = g
        self.limits = limits
        paths = g.st_paths()
        if exclude is not None:
            paths = [p for p in paths if not _contains(p, exclude)]
        self.paths = paths
        self.edge_lists = [[g.edge_id(a, b) for a, b in zip(p, p[1:])] for p in paths]
        # edges that some path with index >= j could still cover
        self.coverable = [set() for _ in range(len(paths) + 1)]
        for j in range(len(paths) - 1, -1, -1):
            self.coverable[j] = self.coverable[j + 1] | set(self.edge_lists[j])
        self.states = 0

    def run(self, size: int | None) -> Iterator[tuple[WeightedPath, ...]]:
        residual = [e.flow for e in self.g.edges]
        chosen: list[WeightedPath] = []

        def rec(start: int) -> Iterator[tuple[WeightedPath, ...]]:
            self.states += 1
            if self.states > self.limits.max_states:
                raise OracleRefusal(f"more than {self.limits.max_states} search states")
            open_edges = [e for e, r in enumerate(residual) if r > 0]
            if not open_edges:
                if size is None or len(chosen) == size:
                    yield tuple(chosen)
                return
            if size is not None and len(chosen) >= size:
                return
            if any(e not in self.coverable[start] for e in open_edges):
                return
            for j in range(start, len(self.paths)):
                eids = self.edge_lists[j]
                cap = min(residual[e] for e in eids)
                for w in range(1, cap + 1):
                    for e in eids:
                        residual[e] -= w
                    chosen.append(WeightedPath(self.paths[j], w))
                    yield from rec(j + 1)
                    chosen.pop()
                    for e in eids:
                        residual[e] += w

        yield from rec(0)


def _contains(hay: Sequence[int], needle: Sequence[int]) -> bool:
    n = len(needle)
    return any(tuple(hay[a:a + n]) == tuple(needle) for a in range(len(hay) - n + 1))


def enumerate_all_mfds(g: FlowGraph, limits: Limits = Limits()) -> DecompositionSet:
    """Every minimum decomposition, each as a sorted tuple of weighted paths."""
    for k in range(1, g.num_edges + 1):
        found = sorted({tuple(sorted(d)) for d in _Enumerator(g, limits).run(k)})
        if found:
            return DecompositionSet(k, found)
    raise OracleRefusal("flow has no path decomposition")


def _mfds(g: FlowGraph, limits: Limits, mfds: DecompositionSet | None) -> DecompositionSet:
    return mfds if mfds is not None else enumerate_all_mfds(g, limits)


def oracle_safe(
    g: FlowGraph, p: Sequence[int], limits: Limits = Limits(), mfds: DecompositionSet | None = None
) -> bool:
    """True if ``p`` lies inside some path of every minimum decomposition."""
    dset = _mfds(g, limits, mfds)
    return all(any(_contains(q.nodes, p) for q in d) for d in dset.decompositions)


def oracle_maximal_safe(
    g: FlowGraph, limits: Limits = Limits(), mfds: DecompositionSet | None = None
) -> list[Path]:
    """Containment-maximal safe paths, in internal node ids.

    Any safe path lies in a path of every decomposition, in particular of
    the first one, so its windows are the only candidates.
    """
    dset = _mfds(g, limits, mfds)
    first = dset.decompositions[0]
    candidates = {
        q.nodes[a:b]
        for q in first
        for a in range(len(q.nodes))
        for b in range(a + 2, len(q.nodes) + 1)
    }
    safe = [c for c in candidates if oracle_safe(g, c, limits, dset)]
    maximal = [c for c in safe if not any(c != o and _contains(o, c) for o in safe)]
    return sorted(maximal, key=lambda c: (c[0], -len(c), c))


def oracle_fd_safe(g: FlowGraph, p: Sequence[int], limits: Limits = Limits()) -> bool:
    """True if ``p`` lies inside some path of every flow decomposition.

    Searches the decompositions built only from paths that do not contain
    ``p`` (repeated paths can always be merged, so distinct paths suffice).
    """
    if len(p) < 2 or not g.is_path(p):
        raise ValueError(f"{tuple(p)} is not a path with an edge")
    for _ in _Enumerator(g, limits, exclude=tuple(p)).run(None):
        return False
    return True


def oracle_min_k(g: FlowGraph, limits: Limits = Limits()) -> int:
    return enumerate_all_mfds(g, limits).k
