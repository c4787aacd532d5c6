"""Y-to-V contraction and the trivially safe source-to-sink unitigs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .flow_graph import FlowGraph, Path


@dataclass
class ContractedGraph:
    """Residual contracted graph after the source-to-sink edges were removed.

    ``graph`` is a multigraph whose node ``x`` stands for node
    ``graph.labels[x]`` of ``original``.  ``expansion[eid]`` is the node
    sequence (in ``original`` ids) replaced by contracted edge ``eid``.
    """

    graph: FlowGraph
    expansion: dict[int, Path]
    original: FlowGraph
    trivial: list[Path] = field(default_factory=list)

    def expanded_residual(self) -> FlowGraph:
        """The residual flow laid back onto the original nodes and edges.

        Each original edge carries the sum of the flows of the contracted
        edges whose expansion uses it; edges left without flow are dropped.
        """
        g = self.original
        load: dict[tuple[int, int], int] = {}
        for eid, (_, _, f) in enumerate(self.graph.edges):
            nodes = self.expansion[eid]
            for a, b in zip(nodes, nodes[1:]):
                load[(a, b)] = load.get((a, b), 0) + f
        edges = [(u, v, load[(u, v)]) for u, v, _ in g.edges if load.get((u, v), 0) > 0]
        return FlowGraph(g.graph_id, g.num_nodes, edges, g.labels)


def y_to_v_contract(g: FlowGraph) -> tuple[ContractedGraph, list[Path]]:
    """Contract ``g`` and split off its source-to-sink edges.

    Internal nodes with in-degree 1 are merged into their predecessor and
    internal nodes with out-degree 1 into their successor, until no such
    node is left.  The expansions of the resulting source-to-sink edges are
    returned as trivially safe paths.
    """
    s, t = g.source, g.sink
    edges: dict[int, list] = {}
    out_e: dict[int, set[int]] = {v: set() for v in range(g.num_nodes)}
    in_e: dict[int, set[int]] = {v: set() for v in range(g.num_nodes)}
    counter = 0

    def add(u, v, f, exp):
        nonlocal counter
        edges[counter] = [u, v, f, exp]
        out_e[u].add(counter)
        in_e[v].add(counter)
        counter += 1

    def drop(eid):
        u, v, _, _ = edges.pop(eid)
        out_e[u].discard(eid)
        in_e[v].discard(eid)

    for u, v, f in g.edges:
        add(u, v, f, (u, v))

    changed = True
    while changed:
        changed = False
        for x in range(g.num_nodes):
            if x in (s, t) or not (in_e[x] and out_e[x]):
                continue
            if len(in_e[x]) == 1:
                (a,) = in_e[x]
                p, _, _, pre = edges[a]
                outs = sorted(out_e[x])
                merged = [(edges[b][1], edges[b][2], pre + edges[b][3][1:]) for b in outs]
                drop(a)
                for b in outs:
                    drop(b)
                for y, f, exp in merged:
                    add(p, y, f, exp)
                changed = True
            elif len(out_e[x]) == 1:
                (b,) = out_e[x]
                _, y, _, post = edges[b]
                ins = sorted(in_e[x])
                merged = [(edges[a][0], edges[a][2], edges[a][3] + post[1:]) for a in ins]
                drop(b)
                for a in ins:
                    drop(a)
                for p, f, exp in merged:
                    add(p, y, f, exp)
                changed = True

    trivial = sorted(edges[e][3] for e in edges if edges[e][0] == s and edges[e][1] == t)
    for eid in [e for e in edges if edges[e][0] == s and edges[e][1] == t]:
        drop(eid)

    keep = sorted(edges, key=lambda e: (edges[e][0], edges[e][1], edges[e][3]))
    nodes = sorted({edges[e][0] for e in keep} | {edges[e][1] for e in keep})
    index = {v: i for i, v in enumerate(nodes)}
    residual = FlowGraph(
        g.graph_id,
        len(nodes),
        [(index[edges[e][0]], index[edges[e][1]], edges[e][2]) for e in keep],
        labels=nodes,
    )
    expansion = {i: edges[e][3] for i, e in enumerate(keep)}
    cg = ContractedGraph(residual, expansion, g, list(trivial))
    return cg, list(trivial)


def is_funnel(cg: ContractedGraph) -> bool:
    return cg.graph.num_edges == 0


def expand_edges(cg: ContractedGraph, eids: Sequence[int]) -> Path:
    out: list[int] = []
    for eid in eids:
        nodes = cg.expansion[eid]
        if out and out[-1] != nodes[0]:
            raise ValueError("contracted edges do not form a path")
        out.extend(nodes[1:] if out else nodes)
    return tuple(out)


def expand_path(cg: ContractedGraph, p: Sequence[int]) -> Path:
    """Map a node sequence of the contracted graph to original node ids."""
    g = cg.graph
    if len(p) == 1:
        return (g.labels[p[0]],)
    eids = []
    for a, b in zip(p, p[1:]):
        candidates = [e for e in g.out_edges(a) if g.edges[e].v == b]
        if not candidates:
            raise ValueError(f"({a},{b}) is not an edge of the contracted graph")
        if len(candidates) > 1:
            raise ValueError(f"({a},{b}) has parallel edges; use expand_edges")
        eids.append(candidates[0])
    return expand_edges(cg, eids)
