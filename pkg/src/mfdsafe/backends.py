"""Solver backends for :class:`~mfdsafe.mfd_model.MfdModelSpec`.

``BranchAndBoundBackend`` solves the decomposition model combinatorially:
it branches on which s-t path (and weight) covers the smallest uncovered
edge, so it needs no MILP library.  ``ExternalMilpBackend`` writes the model
as an LP file and runs a solver executable on it.
"""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import tempfile

from .flow_graph import topological_order
from .lp_format import parse_solution, write_lp
from .mfd_model import (
    BackendError,
    Deadline,
    MfdModelSpec,
    SolverOutcome,
    decomposition_assignment,
    evaluate,
    gamma_name,
    objective_value,
)
from .paths import is_subpath

log = logging.getLogger(__name__)

CHECK_EVERY = 64  # branch nodes between deadline checks


class _Timeout(Exception):
    pass


class _Search:
    def __init__(self, spec: MfdModelSpec, deadline: Deadline | None):
        g = spec.graph
        self.g = g
        self.k = spec.k
        self.deadline = deadline
        self.residual = [e.flow for e in g.edges]
        self.lex = sorted(range(g.num_edges), key=lambda e: (g.edges[e].u, g.edges[e].v))
        pos = {v: i for i, v in enumerate(topological_order(g))}
        self.span = [(pos[e.u], pos[e.v]) for e in g.edges]
        self.n_pos = len(pos)
        self.out_flow_s = g.total_flow
        self.tested = list(spec.tested)
        self.group = bool(spec.objective)
        self.hit_count = [0] * len(self.tested)
        self.unhit = len(self.tested)
        self.best = -1
        self.best_solution = None
        self.chosen: list[tuple[tuple[int, ...], int]] = []
        self.nodes = 0

    # -- bounds ------------------------------------------------------------

    def paths_needed(self) -> int:
        diff = [0] * (self.n_pos + 1)
        outdeg = [0] * self.g.num_nodes
        indeg = [0] * self.g.num_nodes
        for eid, r in enumerate(self.residual):
            if r > 0:
                a, b = self.span[eid]
                diff[a] += 1
                diff[b] -= 1
                e = self.g.edges[eid]
                outdeg[e.u] += 1
                indeg[e.v] += 1
        best = run = 0
        for d in diff:
            run += d
            best = max(best, run)
        return max(best, max(outdeg), max(indeg))

    # -- path generation ---------------------------------------------------

    def _prefixes(self, v: int):
        if v == self.g.source:
            yield (v,)
            return
        for eid in self.g.in_edges(v):
            if self.residual[eid] > 0:
                for pre in self._prefixes(self.g.edges[eid].u):
                    yield pre + (v,)

    def _suffixes(self, v: int):
        if v == self.g.sink:
            yield (v,)
            return
        for eid in self.g.out_edges(v):
            if self.residual[eid] > 0:
                for suf in self._suffixes(self.g.edges[eid].v):
                    yield (v,) + suf

    def paths_through(self, eid: int) -> list[tuple[tuple[int, ...], list[int], int]]:
        u, v, _ = self.g.edges[eid]
        out = []
        for pre in self._prefixes(u):
            for suf in self._suffixes(v):
                nodes = pre + suf
                eids = [self.g.edge_id(a, b) for a, b in zip(nodes, nodes[1:])]
                out.append((nodes, eids, min(self.residual[e] for e in eids)))
        out.sort(key=lambda item: item[0])
        return out

    # -- search ------------------------------------------------------------

    def run(self):
        try:
            self._rec(self.k, None, None)
        except _StopSearch:
            pass
        return self.best_solution

    def _leaf(self):
        value = self.unhit
        if value > self.best:
            self.best = value
            self.best_solution = (list(self.chosen), [
                self.hit_count[j] == 0 for j in range(len(self.tested))
            ])
        if not self.group or self.best == len(self.tested):
            raise _StopSearch

    def _rec(self, budget: int, last_edge, last_key):
        self.nodes += 1
        if self.deadline is not None and self.nodes % CHECK_EVERY == 0 and self.deadline.expired():
            raise _Timeout
        edge = next((e for e in self.lex if self.residual[e] > 0), None)
        if edge is None:
            if budget == 0:
                self._leaf()
            return
        if budget == 0 or self.out_flow_s < budget or self.paths_needed() > budget:
            return
        if self.group and self.unhit <= self.best:
            return
        for nodes, eids, width in self.paths_through(edge):
            for w in range(width, 0, -1):
                key = (nodes, w)
                if edge == last_edge and key < last_key:
                    continue
                newly = [j for j in range(len(self.tested))
                         if self.hit_count[j] == 0 and is_subpath(self.tested[j], nodes)]
                self._apply(nodes, eids, w, newly, +1)
                try:
                    self._rec(budget - 1, edge, key)
                finally:
                    self._apply(nodes, eids, w, newly, -1)

    def _apply(self, nodes, eids, w, newly, sign):
        for e in eids:
            self.residual[e] -= sign * w
        self.out_flow_s -= sign * w
        for j in newly:
            self.hit_count[j] += sign
        self.unhit -= sign * len(newly)
        if sign > 0:
            self.chosen.append((nodes, w))
        else:
            self.chosen.pop()


class _StopSearch(Exception):
    pass


class BranchAndBoundBackend:
    """Exact depth-first search over (path, weight) choices.

    Only models produced by :func:`~mfdsafe.mfd_model.build_mfd_model`,
    optionally extended with avoidance constraints for ``spec.tested``, are
    understood; the constraint list itself is not read.
    """

    name = "builtin"

    def __init__(self):
        self.last_nodes = 0

    def solve(self, spec: MfdModelSpec, deadline: Deadline | None = None) -> SolverOutcome:
        if spec.objective and set(spec.objective) != {gamma_name(j) for j in range(len(spec.tested))}:
            raise BackendError("objective does not match the tested paths")
        if deadline is not None and deadline.expired():
            return SolverOutcome("timeout")
        search = _Search(spec, deadline)
        try:
            found = search.run()
        except _Timeout:
            self.last_nodes = search.nodes
            return SolverOutcome("timeout")
        self.last_nodes = search.nodes
        if found is None:
            return SolverOutcome("infeasible")
        chosen, avoided = found
        if spec.symmetry:
            chosen = sorted(chosen, key=lambda item: -item[1])
        values = decomposition_assignment(spec.graph, [p for p, _ in chosen], [w for _, w in chosen])
        for j, flag in enumerate(avoided):
            values[gamma_name(j)] = int(flag)
        return SolverOutcome("optimal", values, objective_value(spec, values))


class ExternalMilpBackend:
    """Run an LP-format MILP solver as a subprocess.

    ``command`` is either a bare executable, invoked CBC-style as
    ``<exe> <model.lp> solve solu <solution>``, or a template using the
    placeholders ``{lp}``, ``{sol}``, ``{seed}`` and ``{time}``.
    """

    name = "external"

    def __init__(self, command: str, seed: int = 0, keep_dir: str | None = None):
        if not command:
            raise BackendError("no external solver command configured")
        self.command = command
        self.seed = seed
        self.keep_dir = keep_dir

    def argv(self, lp: str, sol: str, seconds: float | None) -> list[str]:
        tokens = shlex.split(self.command)
        if "{lp}" not in self.command:
            return tokens + [lp, "solve", "solu", sol]
        limit = "1e9" if seconds is None else f"{max(seconds, 0.01):.2f}"
        return [tok.format(lp=lp, sol=sol, seed=self.seed, time=limit) for tok in tokens]

    def solve(self, spec: MfdModelSpec, deadline: Deadline | None = None) -> SolverOutcome:
        remaining = deadline.remaining() if deadline is not None else None
        if remaining is not None and remaining <= 0:
            return SolverOutcome("timeout")
        with tempfile.TemporaryDirectory(dir=self.keep_dir) as work:
            lp = os.path.join(work, "model.lp")
            sol = os.path.join(work, "model.sol")
            with open(lp, "w") as fh:
                fh.write(write_lp(spec))
            argv = self.argv(lp, sol, remaining)
            try:
                proc = subprocess.run(argv, capture_output=True, text=True, timeout=remaining)
            except subprocess.TimeoutExpired:
                return SolverOutcome("timeout")
            except OSError as exc:
                raise BackendError(f"cannot run {argv[0]!r}: {exc}") from exc
            text = ""
            if os.path.exists(sol):
                with open(sol) as fh:
                    text = fh.read()
        if not text:
            if "infeasible" in proc.stdout.lower():
                return SolverOutcome("infeasible")
            raise BackendError(f"solver exited with {proc.returncode} and wrote no solution")
        status, raw = parse_solution(text)
        if status in ("infeasible", "timeout"):
            return SolverOutcome(status)
        if status != "optimal":
            raise BackendError(f"unrecognised solver status in {sol}")
        values = {}
        for name in spec.variables:
            val = raw.get(name, 0.0)
            rounded = round(val)
            if abs(val - rounded) > 1e-6:
                raise BackendError(f"{name}={val} is not integral")
            values[name] = int(rounded)
        bad = evaluate(spec, values)
        if bad:
            raise BackendError("solver returned an infeasible point: " + bad[0])
        return SolverOutcome("optimal", values, objective_value(spec, values))


def make_backend(kind: str, command: str | None = None, seed: int = 0):
    if kind == "builtin":
        return BranchAndBoundBackend()
    if kind == "external":
        return ExternalMilpBackend(command or "", seed=seed)
    raise ValueError(f"unknown backend {kind!r}")
