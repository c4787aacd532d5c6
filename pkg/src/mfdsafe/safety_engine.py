"""Maximal safe paths for minimum flow decompositions.

The inner test asks the solver for a minimum decomposition that avoids as
many of a group of candidate paths as possible; any path it manages to
avoid is unsafe, and an optimum of zero certifies the whole group safe.
Four outer strategies drive that test over windows of a fixed minimum
decomposition: top-down trimming, bottom-up extension, and a two-pointer
sweep with a linear or a binary-search pointer advance.

Windows are addressed as :class:`SubpathRef` ``(i, l, r)``: nodes ``l..r``
(1-based, inclusive) of base path ``i`` (0-based).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, NamedTuple, Sequence

from .fd_safety import excess_flow, fd_safe_windows
from .flow_graph import FlowGraph, Path
from .mfd_model import (
    Backend,
    BudgetExceeded,
    Constraint,
    Deadline,
    MfdModelSpec,
    Var,
    build_mfd_model,
    gamma_name,
    x_name,
)
from .paths import postprocess


class SubpathRef(NamedTuple):
    i: int
    l: int
    r: int


@dataclass
class CoreSet:
    members: frozenset[SubpathRef]
    kind: str  # "trimming" | "extending"


def attach_group_constraints(spec: MfdModelSpec, paths: Sequence[Sequence[int]]) -> MfdModelSpec:
    """Add one avoidance indicator per tested path and maximise their sum.

    For every solution index ``i`` and tested path with edges ``e_1..e_m``:
    ``x[e_1,i] + ... + x[e_m,i] + g_P <= m``, so ``g_P = 1`` forces every
    solution path to miss at least one edge of the tested path.
    """
    if not paths:
        raise ValueError("group test needs at least one path")
    g = spec.graph
    variables = dict(spec.variables)
    cons = list(spec.constraints)
    objective = {}
    for j, nodes in enumerate(paths):
        if len(nodes) < 2:
            raise ValueError(f"tested path {tuple(nodes)} has no edge")
        name = gamma_name(j)
        variables[name] = Var(name, "binary", 0, 1)
        objective[name] = 1
        pairs = list(zip(nodes, nodes[1:]))
        if any(g.edge_id(a, b) is None for a, b in pairs):
            continue  # cannot occur in any solution; indicator is free
        m = len(pairs)
        for i in range(1, spec.k + 1):
            terms = tuple((x_name(a, b, i), 1) for a, b in pairs) + ((name, 1),)
            cons.append(Constraint(f"avoid_{j}_{i}", terms, "<=", m))
    return replace(spec, variables=variables, constraints=cons, objective=objective,
                   tested=[tuple(p) for p in paths])


@dataclass
class SafetyContext:
    """One graph's state: base decomposition, solver, budget and counters."""

    graph: FlowGraph
    k: int
    base: list[Path]
    backend: Backend
    deadline: Deadline | None = None
    prefilter: bool = True
    symmetry: bool = False
    ilp_calls: int = 0
    certified: set[SubpathRef] = field(default_factory=set)
    _model: MfdModelSpec | None = None

    def nodes(self, ref: SubpathRef) -> Path:
        return self.base[ref.i][ref.l - 1:ref.r]

    def length(self, i: int) -> int:
        return len(self.base[i])

    @property
    def model(self) -> MfdModelSpec:
        if self._model is None:
            self._model = build_mfd_model(self.graph, self.k, self.symmetry)
        return self._model

    # -- inner tests -------------------------------------------------------

    def group_test(self, refs: Iterable[SubpathRef]) -> set[SubpathRef]:
        """Refs avoided by one minimum decomposition that avoids the most."""
        refs = sorted(refs)
        if self.deadline is not None and self.deadline.expired():
            raise BudgetExceeded(self.graph.graph_id)
        spec = attach_group_constraints(self.model, [self.nodes(r) for r in refs])
        outcome = self.backend.solve(spec, self.deadline)
        self.ilp_calls += 1
        if outcome.status == "timeout":
            raise BudgetExceeded(self.graph.graph_id)
        if outcome.status != "optimal":
            raise RuntimeError(f"group test on a feasible model returned {outcome.status}")
        return {ref for j, ref in enumerate(refs) if outcome.assignment.get(gamma_name(j), 0) == 1}

    def get_safe(self, refs: Iterable[SubpathRef]) -> set[SubpathRef]:
        remaining = set(refs)
        while remaining:
            unsafe = self.group_test(remaining)
            if not unsafe:
                return remaining
            remaining -= unsafe
        return remaining

    def is_safe(self, ref: SubpathRef) -> bool:
        return not self.group_test([ref])

    # -- prefiltered entry points used by the outer strategies --------------

    def safe_subset(self, refs: Iterable[SubpathRef]) -> set[SubpathRef]:
        refs = set(refs)
        if self.prefilter:
            sure, rest = excess_flow_prefilter(self, refs)
            return sure | self.get_safe(rest)
        return self.get_safe(refs)

    def check(self, ref: SubpathRef) -> bool:
        if self.prefilter and excess_flow(self.graph, self.nodes(ref)) > 0:
            self.certified.add(ref)
            return True
        return self.is_safe(ref)

    def sequences(self, refs: Iterable[SubpathRef]) -> list[Path]:
        return postprocess(self.nodes(r) for r in refs)


def excess_flow_prefilter(
    ctx: SafetyContext, refs: Iterable[SubpathRef]
) -> tuple[set[SubpathRef], set[SubpathRef]]:
    """Split ``refs`` into those with positive excess flow and the rest."""
    sure, rest = set(), set()
    for ref in refs:
        (sure if excess_flow(ctx.graph, ctx.nodes(ref)) > 0 else rest).add(ref)
    ctx.certified |= sure
    return sure, rest


# ---------------------------------------------------------------------------
# cores


def trimming_core(ctx: SafetyContext) -> CoreSet:
    return CoreSet(frozenset(SubpathRef(i, 1, len(p)) for i, p in enumerate(ctx.base)), "trimming")


def extending_core(ctx: SafetyContext) -> CoreSet:
    """Maximal FD-safe windows of each base path.

    Every single edge has positive excess, so the windows cover each base
    path and no separate single-edge seed is needed.
    """
    members = set()
    for i, nodes in enumerate(ctx.base):
        windows = fd_safe_windows(ctx.graph, nodes)
        members.update(SubpathRef(i, l, r) for l, r in windows)
    return CoreSet(frozenset(members), "extending")


def single_edge_core(ctx: SafetyContext) -> CoreSet:
    return CoreSet(frozenset(
        SubpathRef(i, j, j + 1) for i, p in enumerate(ctx.base) for j in range(1, len(p))
    ), "extending")


# ---------------------------------------------------------------------------
# outer strategies


def all_max_safe_top_down(ctx: SafetyContext, core: CoreSet | None = None) -> set[SubpathRef]:
    """Trim unsafe windows one node at a time until they test safe."""
    current = set((core or trimming_core(ctx)).members)
    reported: set[SubpathRef] = set()
    while current:
        safe = ctx.safe_subset(current)
        reported |= safe
        unsafe = current - safe
        nxt = set()
        for i, l, r in unsafe:
            if r == ctx.length(i) or (i, l + 1, r + 1) in unsafe:
                nxt.add(SubpathRef(i, l + 1, r))
            if l == 1 or (i, l - 1, r - 1) in unsafe:
                nxt.add(SubpathRef(i, l, r - 1))
        current = {
            ref for ref in nxt
            if ref.r > ref.l and not any(
                s.i == ref.i and s.l <= ref.l and ref.r <= s.r for s in reported
            )
        }
    return reported


def all_max_safe_bottom_up(ctx: SafetyContext, core: CoreSet | None = None) -> set[SubpathRef]:
    """Grow safe windows one node at a time until neither side extends."""
    current = set((core or extending_core(ctx)).members)
    reported: set[SubpathRef] = set()
    while current:
        left = {SubpathRef(i, l - 1, r) for i, l, r in current if l > 1}
        right = {SubpathRef(i, l, r + 1) for i, l, r in current if r < ctx.length(i)}
        safe = ctx.safe_subset(left | right)
        for i, l, r in current:
            if (i, l - 1, r) not in safe and (i, l, r + 1) not in safe:
                reported.add(SubpathRef(i, l, r))
        current = safe
    return reported


def _sweep(ctx: SafetyContext, i: int, grow: Callable, shrink: Callable) -> set[SubpathRef]:
    t = ctx.length(i)
    out = set()
    lo, hi = 1, 1
    while True:
        hi = grow(i, lo, hi, t)  # largest hi with [lo, hi] safe
        out.add(SubpathRef(i, lo, hi))
        if hi == t:
            return out
        hi += 1
        lo = shrink(i, lo, hi)  # smallest lo with [lo, hi] safe


def _grow_linear(ctx):
    def grow(i, lo, hi, t):
        while hi < t and ctx.check(SubpathRef(i, lo, hi + 1)):
            hi += 1
        return hi
    return grow


def _shrink_linear(ctx):
    def shrink(i, lo, hi):
        lo += 1  # [lo, hi] is known unsafe
        while not ctx.check(SubpathRef(i, lo, hi)):
            lo += 1
        return lo
    return shrink


def all_max_safe_two_pointer(ctx: SafetyContext) -> set[SubpathRef]:
    """Per base path: advance the right end while safe, then the left end."""
    out = set()
    for i in range(len(ctx.base)):
        out |= _sweep(ctx, i, _grow_linear(ctx), _shrink_linear(ctx))
    return out


def all_max_safe_two_pointer_bin(ctx: SafetyContext, threshold: int = 4) -> set[SubpathRef]:
    """Two-pointer sweep whose pointer moves use bisection on long spans.

    Safety of ``[lo, hi]`` is monotone in both ends along a fixed path, so
    the largest safe right end and smallest safe left end can be bisected.
    Spans of at most ``threshold`` candidates are scanned linearly.
    """
    linear_grow, linear_shrink = _grow_linear(ctx), _shrink_linear(ctx)

    def grow(i, lo, hi, t):
        candidates = range(hi + 1, t + 1)
        if len(candidates) <= threshold:
            return linear_grow(i, lo, hi, t)
        first_bad = bisect.bisect_left(
            candidates, True, key=lambda r: not ctx.check(SubpathRef(i, lo, r)))
        return hi + first_bad

    def shrink(i, lo, hi):
        candidates = range(lo + 1, hi)
        if len(candidates) <= threshold:
            return linear_shrink(i, lo, hi)
        first_ok = bisect.bisect_left(
            candidates, True, key=lambda l: ctx.check(SubpathRef(i, l, hi)))
        return min(lo + 1 + first_ok, hi - 1)

    out = set()
    for i in range(len(ctx.base)):
        out |= _sweep(ctx, i, grow, shrink)
    return out


VARIANTS = {
    "topdown": all_max_safe_top_down,
    "bottomup": all_max_safe_bottom_up,
    "twopointer": all_max_safe_two_pointer,
    "twopointerbin": all_max_safe_two_pointer_bin,
}
