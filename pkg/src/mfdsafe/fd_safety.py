"""Safety for *all* flow decompositions via excess flow.

A path is a subpath of some path in every flow decomposition exactly when
its excess flow is positive: the flow entering its first edge minus the
flow leaving its internal nodes through edges off the path.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .flow_graph import FlowGraph, Path, WeightedPath, topological_order
from .paths import postprocess


def excess_flow(g: FlowGraph, p: Sequence[int]) -> int:
    if len(p) < 2:
        raise ValueError("excess flow needs a path with at least one edge")
    if not g.is_path(p):
        raise ValueError(f"{tuple(p)} is not a path of {g.graph_id!r}")
    value = g.flow(p[0], p[1])
    for a, b in zip(p[1:], p[2:]):
        value -= g.out_flow(a) - g.flow(a, b)
    return value


def is_fd_safe(g: FlowGraph, p: Sequence[int]) -> bool:
    return excess_flow(g, p) > 0


class ExcessFlowState:
    """Excess flow of a sliding window, updated in O(1) per pointer move."""

    def __init__(self, g: FlowGraph, u: int, v: int):
        self.g = g
        self.path: deque[int] = deque((u, v))
        self.excess = g.flow(u, v)

    def extended(self, w: int) -> int:
        """Excess the window would have after appending ``w``."""
        last = self.path[-1]
        return self.excess - (self.g.out_flow(last) - self.g.flow(last, w))

    def extend_right(self, w: int) -> None:
        self.excess = self.extended(w)
        self.path.append(w)

    def advance_left(self) -> None:
        if len(self.path) < 3:
            raise ValueError("window would lose its last edge")
        a = self.path.popleft()
        b = self.path[0]
        self.excess += self.g.out_flow(b) - self.g.flow(a, b)

    def recompute(self) -> int:
        return excess_flow(self.g, list(self.path))


def fd_safe_windows(g: FlowGraph, p: Sequence[int]) -> list[tuple[int, int]]:
    """Maximal FD-safe windows ``(l, r)`` of path ``p`` (1-based, inclusive)."""
    n = len(p)
    out = []
    state = ExcessFlowState(g, p[0], p[1])
    lo, hi = 0, 1
    while True:
        while hi + 1 < n and state.extended(p[hi + 1]) > 0:
            state.extend_right(p[hi + 1])
            hi += 1
        out.append((lo + 1, hi + 1))
        if hi + 1 >= n:
            return out
        state.extend_right(p[hi + 1])
        hi += 1
        while state.excess <= 0:
            state.advance_left()
            lo += 1


def widest_path(g: FlowGraph, residual: list[int], order: list[int]) -> tuple[list[int], int]:
    """Source-to-sink path maximising the bottleneck over ``residual`` flows."""
    best = {g.source: (float("inf"), None)}
    for v in order:
        if v not in best:
            continue
        width, _ = best[v]
        for eid in g.out_edges(v):
            if residual[eid] <= 0:
                continue
            w = g.edges[eid].v
            cand = min(width, residual[eid])
            if w not in best or cand > best[w][0]:
                best[w] = (cand, eid)
    if g.sink not in best:
        return [], 0
    eids = []
    v = g.sink
    while v != g.source:
        eid = best[v][1]
        eids.append(eid)
        v = g.edges[eid].u
    return eids[::-1], int(best[g.sink][0])


def greedy_decomposition(g: FlowGraph) -> list[WeightedPath]:
    """Peel off widest paths until no flow is left."""
    residual = [e.flow for e in g.edges]
    order = topological_order(g)
    paths = []
    while any(residual):
        eids, width = widest_path(g, residual, order)
        if width <= 0:
            raise ValueError(f"flow of {g.graph_id!r} is not decomposable")
        for eid in eids:
            residual[eid] -= width
        nodes = (g.edges[eids[0]].u,) + tuple(g.edges[e].v for e in eids)
        paths.append(WeightedPath(nodes, width))
    return paths


def safe_flow_maximal_paths(g: FlowGraph) -> list[Path]:
    """All maximal FD-safe paths, in internal node ids."""
    found = []
    for nodes, _ in greedy_decomposition(g):
        found.extend(nodes[l - 1:r] for l, r in fd_safe_windows(g, nodes))
    return postprocess(found)
