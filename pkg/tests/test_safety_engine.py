import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mfdsafe.backends import BranchAndBoundBackend
from mfdsafe.generate import random_instance
from mfdsafe.mfd_model import build_mfd_model, decomposition_assignment, evaluate, gamma_name, solve_min_k
from mfdsafe.oracle import enumerate_all_mfds, oracle_maximal_safe, oracle_safe
from mfdsafe.paths import postprocess
from mfdsafe.safety_engine import (
    VARIANTS,
    CoreSet,
    _grow_linear,
    _shrink_linear,
    _sweep,
    SafetyContext,
    SubpathRef,
    all_max_safe_bottom_up,
    all_max_safe_top_down,
    all_max_safe_two_pointer,
    all_max_safe_two_pointer_bin,
    attach_group_constraints,
    excess_flow_prefilter,
    extending_core,
    single_edge_core,
    trimming_core,
)

import witnesses as W

seeds = st.integers(0, 2**32 - 1)


def context(g, prefilter=True, base=None):
    backend = BranchAndBoundBackend()
    res = solve_min_k(g, backend)
    paths = base if base is not None else [p.nodes for p in res.witness]
    return SafetyContext(g, res.k, paths, backend, prefilter=prefilter)


def ref_of(ctx, nodes):
    for i, p in enumerate(ctx.base):
        for l in range(1, len(p)):
            for r in range(l + 1, len(p) + 1):
                if p[l - 1:r] == tuple(nodes):
                    return SubpathRef(i, l, r)
    raise LookupError(nodes)


# -- group constraints ---------------------------------------------------------


def test_forced_solution_path_cannot_be_avoided():
    g = W.diamond()
    spec = attach_group_constraints(build_mfd_model(g, 2, symmetry=False), [(0, 1, 3)])
    values = decomposition_assignment(g, [(0, 1, 3), (0, 2, 3)], [3, 4])
    assert evaluate(spec, dict(values, **{gamma_name(0): 0})) == []
    # with the path as solution path 1 the row reads 2 + g_0 <= 2
    assert evaluate(spec, dict(values, **{gamma_name(0): 1}))


def test_unforced_path_can_be_avoided():
    g = W.cross()
    spec = attach_group_constraints(build_mfd_model(g, 2, symmetry=False), [(0, 1, 3, 4)])
    values = decomposition_assignment(g, [(0, 1, 3, 5, 6), (0, 2, 3, 4, 6)], [2, 2])
    assert evaluate(spec, dict(values, **{gamma_name(0): 1})) == []


def test_zero_edge_path_rejected():
    spec = build_mfd_model(W.diamond(), 2)
    with pytest.raises(ValueError):
        attach_group_constraints(spec, [(0,)])
    with pytest.raises(ValueError):
        attach_group_constraints(spec, [])


def test_linked_pair_only_one_avoidable():
    g = W.linked_pair()
    d = enumerate_all_mfds(g)
    p, q = (0, 3, 7), (1, 2, 4)
    assert not set(p) & set(q)
    assert not oracle_safe(g, p, mfds=d) and not oracle_safe(g, q, mfds=d)
    spec = attach_group_constraints(build_mfd_model(g, d.k, symmetry=False), [p, q])
    assert BranchAndBoundBackend().solve(spec).objective == 1


# -- inner tests ----------------------------------------------------------------


def test_group_test_on_unique_mfd_paths():
    ctx = context(W.greedy_gap())
    refs = trimming_core(ctx).members
    assert ctx.group_test(refs) == set()
    assert ctx.ilp_calls == 1


def test_mfd_safe_example_path_tests_safe():
    ctx = context(W.two_mfd_example())
    ref = ref_of(ctx, (0, 1, 2, 3, 4))
    assert ctx.group_test([ref]) == set()
    assert ctx.is_safe(ref)


def test_group_test_isolates_the_avoidable_path():
    ctx = context(W.cross())
    q = next(SubpathRef(i, 1, len(p)) for i, p in enumerate(ctx.base))
    common = SubpathRef(q.i, 1, 2)
    assert ctx.group_test([q, common]) == {q}


def test_get_safe_call_counts():
    ctx = context(W.greedy_gap())
    refs = set(trimming_core(ctx).members)
    assert ctx.get_safe(refs) == refs and ctx.ilp_calls == 1
    ctx = context(W.cross())
    unsafe = {SubpathRef(i, 1, len(p)) for i, p in enumerate(ctx.base)}
    # both full paths avoided by the other decomposition; the remainder is empty
    assert ctx.get_safe(unsafe) == set()
    assert ctx.ilp_calls == 1
    before = ctx.ilp_calls
    assert ctx.get_safe(set()) == set() and ctx.ilp_calls == before


def test_get_safe_matches_single_tests():
    ctx = context(W.linked_pair())
    refs = {SubpathRef(i, l, r) for i, p in enumerate(ctx.base)
            for l in range(1, len(p)) for r in range(l + 1, len(p) + 1)}
    safe = ctx.get_safe(refs)
    assert safe == {r for r in refs if ctx.is_safe(r)}


def test_single_edges_are_safe():
    ctx = context(W.linked_pair())
    assert all(ctx.is_safe(r) for r in single_edge_core(ctx).members)


def test_prefilter_certifies_positive_excess():
    ctx = context(W.two_mfd_example())
    short = ref_of(ctx, (0, 1, 2))
    longer = ref_of(ctx, (0, 1, 2, 3))
    sure, rest = excess_flow_prefilter(ctx, [short, longer])
    assert sure == {short} and rest == {longer}
    edges = single_edge_core(ctx).members
    sure, rest = excess_flow_prefilter(ctx, edges)
    assert sure == set(edges) and not rest


# -- cores -------------------------------------------------------------------


def test_cores_are_containment_free():
    ctx = context(W.linked_pair())
    for core in (trimming_core(ctx), extending_core(ctx), single_edge_core(ctx)):
        m = core.members
        assert not any(a != b and a.i == b.i and a.l <= b.l and b.r <= a.r for a in m for b in m)
    assert all(ctx.is_safe(r) for r in extending_core(ctx).members)


# -- outer strategies ----------------------------------------------------------


class Recording(SafetyContext):
    def group_test(self, refs):
        self.log = getattr(self, "log", [])
        self.log.append(set(refs))
        return super().group_test(refs)


def test_top_down_reports_safe_core_without_recursion():
    ctx = context(W.greedy_gap(), prefilter=False)
    out = all_max_safe_top_down(ctx)
    assert out == set(trimming_core(ctx).members)
    assert ctx.ilp_calls == 1


def test_top_down_trims_only_unsafe_paths():
    g = W.two_mfd_example()
    base = context(g)
    ctx = Recording(g, base.k, base.base, base.backend, prefilter=False)
    all_max_safe_top_down(ctx)
    first = ctx.log[0]
    assert first == set(trimming_core(ctx).members)
    unsafe = {r for r in first if not ctx.is_safe(r)}
    safe = first - unsafe
    assert safe and unsafe
    trims = {SubpathRef(i, l + 1, r) for i, l, r in unsafe} | {SubpathRef(i, l, r - 1) for i, l, r in unsafe}
    second = next(s for s in ctx.log[1:] if not s <= first)
    assert second <= trims


def test_bottom_up_reports_whole_path_member_at_once():
    g = W.greedy_gap()
    base = context(g)
    full = trimming_core(base).members
    out = all_max_safe_bottom_up(base, CoreSet(frozenset(full), "extending"))
    assert out == set(full)
    assert base.ilp_calls == 0


def test_bottom_up_carries_safe_extensions():
    ctx = context(W.two_mfd_example())
    start = ref_of(ctx, (0, 1, 2))
    out = all_max_safe_bottom_up(ctx, CoreSet(frozenset({start}), "extending"))
    assert {ctx.nodes(r) for r in out} == {(0, 1, 2, 3, 4)}


def test_two_pointer_fully_safe_path_costs_m_minus_1():
    g = W.greedy_gap()
    ctx = context(g, prefilter=False)
    path = max(ctx.base, key=len)
    ctx = context(g, prefilter=False, base=[path])
    out = all_max_safe_two_pointer(ctx)
    assert out == {SubpathRef(0, 1, len(path))}
    assert ctx.ilp_calls == len(path) - 1


class Stub:
    """Context stand-in whose window safety is given by a predicate."""

    def __init__(self, n, safe):
        self.base = [tuple(range(n))]
        self.safe = safe
        self.probes = []

    def length(self, i):
        return len(self.base[i])

    def check(self, ref):
        self.probes.append((ref.l, ref.r))
        return self.safe(ref.l, ref.r)


def test_bisection_probe_count():
    stub = Stub(9, lambda l, r: r <= 5 or l >= 4)
    all_max_safe_two_pointer_bin(stub, threshold=4)
    grow = [p for p in stub.probes if p[0] == 1]
    assert len(grow) <= math.ceil(math.log2(8 + 1))
    lin = Stub(9, stub.safe)
    out_lin = _sweep(lin, 0, _grow_linear(lin), _shrink_linear(lin))
    assert out_lin == all_max_safe_two_pointer_bin(Stub(9, stub.safe), threshold=4)
    assert len(lin.probes) > len(stub.probes)


def test_bisection_below_threshold_is_linear():
    safe = lambda l, r: r - l <= 2
    a, b = Stub(5, safe), Stub(5, safe)
    _sweep(a, 0, _grow_linear(a), _shrink_linear(a))
    all_max_safe_two_pointer_bin(b, threshold=4)
    assert a.probes == b.probes


@pytest.mark.parametrize("n,threshold", [(12, 1), (12, 2), (12, 4), (20, 3)])
def test_bisection_matches_linear_on_interval_families(n, threshold):
    rng = random.Random(n * 31 + threshold)
    for _ in range(30):
        # [l, r] safe iff r <= reach[l], reach nondecreasing and > l
        reach, cur = [], 2
        for l in range(1, n + 1):
            cur = min(n, max(l + 1, cur + rng.choice([0, 0, 1, 3])))
            reach.append(cur)
        safe = lambda l, r, reach=reach: r <= reach[l - 1]
        lin = Stub(n, safe)
        expected = _sweep(lin, 0, _grow_linear(lin), _shrink_linear(lin))
        assert all_max_safe_two_pointer_bin(Stub(n, safe), threshold) == expected


# -- agreement with the oracle ------------------------------------------------


@pytest.mark.parametrize("variant", sorted(VARIANTS))
@pytest.mark.parametrize("make", W.ALL, ids=lambda f: f.__name__)
def test_witnesses_match_oracle(variant, make):
    g = make()
    ctx = context(g)
    got = ctx.sequences(VARIANTS[variant](ctx))
    assert got == oracle_maximal_safe(g)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_variants_match_oracle_and_properties(seed):
    g, _ = random_instance(random.Random(seed), "r")
    expected = oracle_maximal_safe(g)
    d = enumerate_all_mfds(g)
    for variant, run in VARIANTS.items():
        for prefilter in (True, False):
            ctx = context(g, prefilter=prefilter)
            refs = run(ctx)
            assert ctx.sequences(refs) == expected, variant
    for p in expected:
        for a in range(len(p) - 1):
            assert oracle_safe(g, p[a:a + 2], mfds=d)
