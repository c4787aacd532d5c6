"""Flow networks on DAGs: data model, corpus parsing and validation.

Node ids are dense integers ``0..n-1`` inside a :class:`FlowGraph`; the ids
found in the input files are kept in ``labels`` so results can be written
back in the original numbering.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, NamedTuple, Sequence

log = logging.getLogger(__name__)

Path = tuple[int, ...]


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ValidationError(ValueError):
    """A graph or decomposition violates a structural invariant."""

    def __init__(self, graph_id: str, violations: Sequence["Violation"]):
        text = "; ".join(str(v) for v in violations)
        super().__init__(f"graph {graph_id!r}: {text}")
        self.graph_id = graph_id
        self.violations = list(violations)


class CycleError(ValueError):
    pass


class Edge(NamedTuple):
    u: int
    v: int
    flow: int


class Violation(NamedTuple):
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class WeightedPath(NamedTuple):
    nodes: Path
    weight: int


@dataclass
class GroundTruth:
    graph_id: str
    paths: list[WeightedPath] = field(default_factory=list)


class FlowGraph:
    """A flow network with integer edge flows.

    The edge list may contain parallel edges (contracted graphs need them);
    :func:`validate` rejects them unless asked not to.  Nodes without incident
    edges are ignored when determining the source and sink.
    """

    def __init__(
        self,
        graph_id: str,
        num_nodes: int,
        edges: Iterable[tuple[int, int, int]],
        labels: Sequence[int] | None = None,
    ):
        self.graph_id = graph_id
        self.num_nodes = num_nodes
        self.edges: tuple[Edge, ...] = tuple(Edge(*e) for e in edges)
        self.labels: tuple[int, ...] = tuple(labels) if labels is not None else tuple(range(num_nodes))
        if len(self.labels) != num_nodes:
            raise ValueError("labels must have one entry per node")
        self._out: list[list[int]] = [[] for _ in range(num_nodes)]
        self._in: list[list[int]] = [[] for _ in range(num_nodes)]
        self._index: dict[tuple[int, int], int] = {}
        self.has_parallel = False
        for eid, (u, v, _) in enumerate(self.edges):
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise ValueError(f"edge ({u},{v}) refers to an unknown node")
            self._out[u].append(eid)
            self._in[v].append(eid)
            if (u, v) in self._index:
                self.has_parallel = True
            else:
                self._index[(u, v)] = eid
        sources = [v for v in range(num_nodes) if self._out[v] and not self._in[v]]
        sinks = [v for v in range(num_nodes) if self._in[v] and not self._out[v]]
        self.sources = sources
        self.sinks = sinks
        self.source = sources[0] if len(sources) == 1 else None
        self.sink = sinks[0] if len(sinks) == 1 else None
        self._outflow = [sum(self.edges[e].flow for e in self._out[v]) for v in range(num_nodes)]
        self._inflow = [sum(self.edges[e].flow for e in self._in[v]) for v in range(num_nodes)]

    def __repr__(self) -> str:
        return f"FlowGraph({self.graph_id!r}, n={self.num_nodes}, m={len(self.edges)})"

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def out_edges(self, v: int) -> list[int]:
        return self._out[v]

    def in_edges(self, v: int) -> list[int]:
        return self._in[v]

    def successors(self, v: int) -> list[int]:
        return [self.edges[e].v for e in self._out[v]]

    def predecessors(self, v: int) -> list[int]:
        return [self.edges[e].u for e in self._in[v]]

    def edge_id(self, u: int, v: int) -> int | None:
        return self._index.get((u, v))

    def flow(self, u: int, v: int) -> int:
        eid = self._index.get((u, v))
        if eid is None:
            raise KeyError(f"no edge ({u},{v})")
        return self.edges[eid].flow

    def out_flow(self, v: int) -> int:
        return self._outflow[v]

    def in_flow(self, v: int) -> int:
        return self._inflow[v]

    @property
    def total_flow(self) -> int:
        return self._outflow[self.source] if self.source is not None else 0

    def active_nodes(self) -> list[int]:
        return [v for v in range(self.num_nodes) if self._out[v] or self._in[v]]

    def is_path(self, nodes: Sequence[int]) -> bool:
        """True if ``nodes`` has at least one edge and follows edges of the graph."""
        if len(nodes) < 2:
            return False
        return all((a, b) in self._index for a, b in zip(nodes, nodes[1:]))

    def path_edges(self, nodes: Sequence[int]) -> list[int]:
        eids = []
        for a, b in zip(nodes, nodes[1:]):
            eid = self._index.get((a, b))
            if eid is None:
                raise ValueError(f"({a},{b}) is not an edge of {self.graph_id!r}")
            eids.append(eid)
        return eids

    def label_path(self, nodes: Sequence[int]) -> Path:
        return tuple(self.labels[v] for v in nodes)

    def unlabel_path(self, labels: Sequence[int]) -> Path:
        index = {lab: v for v, lab in enumerate(self.labels)}
        try:
            return tuple(index[lab] for lab in labels)
        except KeyError as exc:
            raise ValueError(f"node {exc.args[0]} not in graph {self.graph_id!r}") from None

    def st_paths(self) -> list[Path]:
        """All source-to-sink paths, in lexicographic order of node ids."""
        if self.source is None or self.sink is None:
            return []
        out: list[Path] = []
        stack = [self.source]

        def walk(v: int) -> None:
            if v == self.sink:
                out.append(tuple(stack))
                return
            for w in sorted(self.successors(v)):
                stack.append(w)
                walk(w)
                stack.pop()

        walk(self.source)
        return out


def topological_order(g: FlowGraph) -> list[int]:
    """Kahn's algorithm over active nodes; ties go to the smallest node id."""
    indeg = [len(g.in_edges(v)) for v in range(g.num_nodes)]
    active = g.active_nodes()
    heap = [v for v in active if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in g.successors(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != len(active):
        raise CycleError(f"graph {g.graph_id!r} has a cycle")
    return order


def validate(g: FlowGraph, allow_parallel: bool = False) -> list[Violation]:
    out: list[Violation] = []
    if not g.edges:
        return [Violation("empty", "graph has no edges")]
    for u, v, f in g.edges:
        if u == v:
            out.append(Violation("self-loop", f"edge ({g.labels[u]},{g.labels[v]})"))
        if not isinstance(f, int) or f <= 0:
            out.append(Violation("positive-flow", f"edge ({g.labels[u]},{g.labels[v]}) has flow {f}"))
    if g.has_parallel and not allow_parallel:
        seen = set()
        for u, v, _ in g.edges:
            if (u, v) in seen:
                out.append(Violation("parallel-edge", f"edge ({g.labels[u]},{g.labels[v]}) repeated"))
            seen.add((u, v))
    try:
        topological_order(g)
    except CycleError:
        out.append(Violation("acyclicity", "graph contains a directed cycle"))
    if len(g.sources) != 1:
        found = ", ".join(str(g.labels[v]) for v in g.sources) or "none"
        out.append(Violation("unique-source", f"in-degree-0 nodes: {found}"))
    if len(g.sinks) != 1:
        found = ", ".join(str(g.labels[v]) for v in g.sinks) or "none"
        out.append(Violation("unique-sink", f"out-degree-0 nodes: {found}"))
    for v in g.active_nodes():
        if v in (g.source, g.sink) or not g.in_edges(v) or not g.out_edges(v):
            continue
        if g.in_flow(v) != g.out_flow(v):
            out.append(Violation(
                "conservation",
                f"node {g.labels[v]}: inflow {g.in_flow(v)} != outflow {g.out_flow(v)}",
            ))
    return out


def decomposition_errors(g: FlowGraph, paths: Sequence[WeightedPath]) -> list[str]:
    """Check that weighted s-t paths superpose exactly to the edge flows."""
    errors = []
    load = [0] * g.num_edges
    for nodes, weight in paths:
        if weight <= 0:
            errors.append(f"path {nodes} has non-positive weight {weight}")
        if len(set(nodes)) != len(nodes):
            errors.append(f"path {nodes} repeats a node")
        if not nodes or nodes[0] != g.source or nodes[-1] != g.sink:
            errors.append(f"path {nodes} is not a source-to-sink path")
        for a, b in zip(nodes, nodes[1:]):
            eid = g.edge_id(a, b)
            if eid is None:
                errors.append(f"path {nodes} uses missing edge ({a},{b})")
                break
            load[eid] += weight
    for eid, (u, v, f) in enumerate(g.edges):
        if load[eid] != f:
            errors.append(f"edge ({u},{v}) carries {load[eid]} but flow is {f}")
    return errors


def verify_decomposition(g: FlowGraph, paths: Sequence[WeightedPath]) -> bool:
    return not decomposition_errors(g, paths)


# ---------------------------------------------------------------------------
# corpus files


def _text(data: str | bytes) -> str:
    return data.decode() if isinstance(data, bytes) else data


def _records(text: str):
    """Yield (header_lineno, graph_id, [(lineno, line), ...]) per '#' record."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if current is not None:
                yield current
            current = (lineno, line[1:].strip(), [])
        elif current is None:
            raise ParseError(lineno, "data before the first '#' header")
        else:
            current[2].append((lineno, line))
    if current is not None:
        yield current


def _exact_int(token: str, lineno: int, what: str) -> int:
    try:
        value = Decimal(token)
    except InvalidOperation:
        raise ParseError(lineno, f"{what} {token!r} is not a number") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise ParseError(lineno, f"{what} {token!r} is not an integer")
    return int(value)


def _node_id(token: str, lineno: int) -> int:
    try:
        v = int(token)
    except ValueError:
        raise ParseError(lineno, f"node id {token!r} is not an integer") from None
    if v < 0:
        raise ParseError(lineno, f"negative node id {v}")
    return v


def parse_graph_corpus(data: str | bytes, strict: bool = True) -> list[FlowGraph]:
    """Parse a Catfish-style corpus into graphs, in file order.

    Syntax errors always raise :class:`ParseError`.  With ``strict`` every
    graph is validated and the first invalid one raises
    :class:`ValidationError`; otherwise validation is left to the caller.
    """
    graphs = []
    for hline, graph_id, lines in _records(_text(data)):
        if not lines:
            raise ParseError(hline, f"record {graph_id!r} lacks a node count")
        count_line, count = lines[0]
        parts = count.split()
        if len(parts) != 1:
            raise ParseError(count_line, f"expected a node count, got {count!r}")
        declared = _exact_int(parts[0], count_line, "node count")
        raw_edges = []
        for lineno, line in lines[1:]:
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(lineno, f"expected '<u> <v> <flow>', got {line!r}")
            u, v = _node_id(parts[0], lineno), _node_id(parts[1], lineno)
            raw_edges.append((u, v, _exact_int(parts[2], lineno, "flow")))
        labels = sorted({u for u, _, _ in raw_edges} | {v for _, v, _ in raw_edges})
        if declared != len(labels):
            log.debug("graph %r declares %d nodes, edges use %d", graph_id, declared, len(labels))
        index = {lab: i for i, lab in enumerate(labels)}
        g = FlowGraph(graph_id, len(labels), [(index[u], index[v], f) for u, v, f in raw_edges], labels)
        if strict:
            problems = validate(g)
            if problems:
                raise ValidationError(graph_id, problems)
        graphs.append(g)
    return graphs


def serialize_graph_corpus(graphs: Iterable[FlowGraph]) -> str:
    """Canonical text form: original labels, edges sorted by (u, v)."""
    chunks = []
    for g in graphs:
        chunks.append(f"# {g.graph_id}")
        chunks.append(str(len(g.active_nodes())))
        rows = sorted((g.labels[u], g.labels[v], f) for u, v, f in g.edges)
        chunks.extend(f"{u} {v} {f}" for u, v, f in rows)
    return "\n".join(chunks) + "\n"


def parse_truth_corpus(
    data: str | bytes, graphs: Iterable[FlowGraph] | None = None
) -> list[GroundTruth]:
    """Parse ground-truth records (node ids as in the graph file).

    Lines are ``<weight>: <v1> ... <vm>`` or ``<weight> <v1> ... <vm>``.  When
    ``graphs`` is given, each record is checked to be a decomposition of the
    graph with the same id.
    """
    truths = []
    for _, graph_id, lines in _records(_text(data)):
        paths = []
        for lineno, line in lines:
            head, sep, tail = line.partition(":")
            tokens = tail.split() if sep else line.split()[1:]
            weight_token = head.strip() if sep else line.split()[0]
            weight = _exact_int(weight_token, lineno, "weight")
            if weight <= 0:
                raise ParseError(lineno, f"non-positive weight {weight}")
            if len(tokens) < 2:
                raise ParseError(lineno, "a path needs at least two nodes")
            paths.append(WeightedPath(tuple(_node_id(t, lineno) for t in tokens), weight))
        truths.append(GroundTruth(graph_id, paths))
    if graphs is not None:
        by_id = {g.graph_id: g for g in graphs}
        for truth in truths:
            g = by_id.get(truth.graph_id)
            if g is None:
                continue
            check_truth(g, truth)
    return truths


def check_truth(g: FlowGraph, truth: GroundTruth) -> None:
    internal = []
    for nodes, weight in truth.paths:
        try:
            mapped = g.unlabel_path(nodes)
        except ValueError as exc:
            raise ValidationError(g.graph_id, [Violation("truth", f"path {nodes}: {exc}")]) from None
        if not g.is_path(mapped):
            raise ValidationError(g.graph_id, [Violation("truth", f"path {nodes} not in graph")])
        internal.append(WeightedPath(mapped, weight))
    errors = decomposition_errors(g, internal)
    if errors:
        raise ValidationError(g.graph_id, [Violation("truth", e) for e in errors])
