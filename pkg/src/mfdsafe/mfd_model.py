"""Integer program for flow decomposition into k weighted paths.

The model follows the usual path formulation: binary ``x[u,v,i]`` select the
edges of path ``i``, integer ``w[i]`` hold its weight, and
``pi[u,v,i] = x[u,v,i] * w[i]`` is linearised with a big-M bound equal to the
total flow.  A spec is a plain description; backends decide how to solve it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Protocol, Sequence

from .flow_graph import FlowGraph, Path, WeightedPath, decomposition_errors, topological_order


class BudgetExceeded(Exception):
    """The per-graph time budget ran out."""


class BackendError(RuntimeError):
    """A solver failed for a reason other than running out of time."""


class Deadline:
    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.monotonic()
        self.at = None if seconds is None else self.start + seconds

    def remaining(self) -> float | None:
        if self.at is None:
            return None
        return max(0.0, self.at - time.monotonic())

    def expired(self) -> bool:
        return self.at is not None and time.monotonic() >= self.at

    def elapsed(self) -> float:
        return time.monotonic() - self.start


class Var(NamedTuple):
    name: str
    kind: str  # "binary" | "integer"
    lb: int
    ub: int


class Constraint(NamedTuple):
    name: str
    terms: tuple[tuple[str, int], ...]
    sense: str  # "<=" | ">=" | "="
    rhs: int


@dataclass
class MfdModelSpec:
    graph: FlowGraph
    k: int
    w_max: int
    variables: dict[str, Var]
    constraints: list[Constraint]
    objective: dict[str, int] = field(default_factory=dict)
    symmetry: bool = False
    tested: list[Path] = field(default_factory=list)

    @property
    def is_feasibility(self) -> bool:
        return not self.objective


def x_name(u: int, v: int, i: int) -> str:
    return f"x_{u}_{v}_{i}"


def w_name(i: int) -> str:
    return f"w_{i}"


def pi_name(u: int, v: int, i: int) -> str:
    return f"pi_{u}_{v}_{i}"


def gamma_name(j: int) -> str:
    return f"g_{j}"


@dataclass
class SolverOutcome:
    status: str  # "optimal" | "infeasible" | "timeout"
    assignment: dict[str, int] | None = None
    objective: int | None = None


class Backend(Protocol):
    def solve(self, spec: MfdModelSpec, deadline: Deadline | None = None) -> SolverOutcome: ...


def build_mfd_model(g: FlowGraph, k: int, symmetry: bool = True) -> MfdModelSpec:
    if k < 1:
        raise ValueError("k must be at least 1")
    if g.has_parallel:
        raise ValueError("the path model needs a graph without parallel edges")
    s, t = g.source, g.sink
    w_max = g.total_flow
    variables: dict[str, Var] = {}
    cons: list[Constraint] = []
    for i in range(1, k + 1):
        variables[w_name(i)] = Var(w_name(i), "integer", 1, w_max)
        for u, v, _ in g.edges:
            variables[x_name(u, v, i)] = Var(x_name(u, v, i), "binary", 0, 1)
            variables[pi_name(u, v, i)] = Var(pi_name(u, v, i), "integer", 0, w_max)
    for i in range(1, k + 1):
        for v in g.active_nodes():
            terms = [(x_name(g.edges[e].u, v, i), 1) for e in g.in_edges(v)]
            terms += [(x_name(v, g.edges[e].v, i), -1) for e in g.out_edges(v)]
            rhs = 1 if v == t else -1 if v == s else 0
            cons.append(Constraint(f"path_{v}_{i}", tuple(terms), "=", rhs))
    for u, v, f in g.edges:
        terms = tuple((pi_name(u, v, i), 1) for i in range(1, k + 1))
        cons.append(Constraint(f"flow_{u}_{v}", terms, "=", f))
        for i in range(1, k + 1):
            x, w, pi = x_name(u, v, i), w_name(i), pi_name(u, v, i)
            cons.append(Constraint(f"pix_{u}_{v}_{i}", ((pi, 1), (x, -w_max)), "<=", 0))
            cons.append(Constraint(f"piw_{u}_{v}_{i}", ((pi, 1), (w, -1)), "<=", 0))
            cons.append(Constraint(f"pilo_{u}_{v}_{i}", ((pi, 1), (w, -1), (x, -w_max)), ">=", -w_max))
    if symmetry:
        for i in range(1, k):
            cons.append(Constraint(f"order_{i}", ((w_name(i), 1), (w_name(i + 1), -1)), ">=", 0))
    return MfdModelSpec(g, k, w_max, variables, cons, symmetry=symmetry)


def with_symmetry(spec: MfdModelSpec, on: bool) -> MfdModelSpec:
    """Copy of ``spec`` with the weight-ordering constraints toggled."""
    cons = [c for c in spec.constraints if not c.name.startswith("order_")]
    if on:
        cons += [
            Constraint(f"order_{i}", ((w_name(i), 1), (w_name(i + 1), -1)), ">=", 0)
            for i in range(1, spec.k)
        ]
    return replace(spec, constraints=cons, symmetry=on)


def lower_bound_k(g: FlowGraph) -> int:
    """Largest number of edges crossing a cut between topological prefixes."""
    order = topological_order(g)
    best = crossing = 0
    for v in order[:-1]:
        crossing += len(g.out_edges(v)) - len(g.in_edges(v))
        best = max(best, crossing)
    return max(1, best)


def evaluate(spec: MfdModelSpec, assignment: Mapping[str, int]) -> list[str]:
    """Constraint and bound violations of ``assignment`` (missing vars read as 0)."""
    bad = []
    for var in spec.variables.values():
        val = assignment.get(var.name, 0)
        if not var.lb <= val <= var.ub:
            bad.append(f"{var.name}={val} outside [{var.lb},{var.ub}]")
    for c in spec.constraints:
        lhs = sum(coef * assignment.get(name, 0) for name, coef in c.terms)
        ok = lhs <= c.rhs if c.sense == "<=" else lhs >= c.rhs if c.sense == ">=" else lhs == c.rhs
        if not ok:
            bad.append(f"{c.name}: {lhs} {c.sense} {c.rhs} fails")
    return bad


def objective_value(spec: MfdModelSpec, assignment: Mapping[str, int]) -> int:
    return sum(coef * assignment.get(name, 0) for name, coef in spec.objective.items())


def decode_decomposition(spec: MfdModelSpec, assignment: Mapping[str, int]) -> list[WeightedPath]:
    """Read the k weighted paths back out of an assignment and verify them."""
    g = spec.graph
    paths = []
    for i in range(1, spec.k + 1):
        on = [(u, v) for u, v, _ in g.edges if assignment.get(x_name(u, v, i), 0) == 1]
        chosen = dict(on)
        nodes = [g.source]
        while nodes[-1] != g.sink and nodes[-1] in chosen and len(nodes) <= g.num_nodes:
            nodes.append(chosen[nodes[-1]])
        if nodes[-1] != g.sink or len(nodes) - 1 != len(on):
            raise BackendError(f"x variables of index {i} do not form one s-t path")
        w = assignment.get(w_name(i), 0)
        for u, v, _ in g.edges:
            x = assignment.get(x_name(u, v, i), 0)
            if assignment.get(pi_name(u, v, i), 0) != x * w:
                raise BackendError(f"pi_{u}_{v}_{i} differs from x*w")
        paths.append(WeightedPath(tuple(nodes), w))
    errors = decomposition_errors(g, paths)
    if errors:
        raise BackendError("decoded paths are not a decomposition: " + errors[0])
    return paths


@dataclass
class MinKResult:
    k: int
    witness: list[WeightedPath]
    calls: int


def solve_min_k(
    g: FlowGraph,
    backend: Backend,
    deadline: Deadline | None = None,
    symmetry: bool = True,
) -> MinKResult:
    """Smallest feasible k, scanning upward from :func:`lower_bound_k`."""
    calls = 0
    for k in range(lower_bound_k(g), g.num_edges + 1):
        if deadline is not None and deadline.expired():
            raise BudgetExceeded(g.graph_id)
        spec = build_mfd_model(g, k, symmetry)
        outcome = backend.solve(spec, deadline)
        calls += 1
        if outcome.status == "timeout":
            raise BudgetExceeded(g.graph_id)
        if outcome.status == "optimal":
            return MinKResult(k, decode_decomposition(spec, outcome.assignment), calls)
    raise BackendError(f"no decomposition with at most {g.num_edges} paths found")


def decomposition_assignment(
    g: FlowGraph, paths: Sequence[Sequence[int]], weights: Sequence[int]
) -> dict[str, int]:
    """Full variable assignment encoding the given weighted paths."""
    values: dict[str, int] = {}
    for i, (nodes, w) in enumerate(zip(paths, weights), start=1):
        values[w_name(i)] = w
        on = set(zip(nodes, nodes[1:]))
        for u, v, _ in g.edges:
            x = 1 if (u, v) in on else 0
            values[x_name(u, v, i)] = x
            values[pi_name(u, v, i)] = x * w
    return values
