import random

import pytest
from hypothesis import given, settings, strategies as st

from mfdsafe.fd_safety import (
    ExcessFlowState,
    excess_flow,
    fd_safe_windows,
    greedy_decomposition,
    is_fd_safe,
    safe_flow_maximal_paths,
)
from mfdsafe.flow_graph import FlowGraph, verify_decomposition
from mfdsafe.generate import random_instance
from mfdsafe.oracle import oracle_fd_safe, oracle_min_k

import witnesses as W

seeds = st.integers(0, 2**32 - 1)


def test_single_edge_excess_is_its_flow():
    g = FlowGraph("e", 2, [(0, 1, 7)])
    assert excess_flow(g, (0, 1)) == 7
    assert is_fd_safe(g, (0, 1))


def test_split_graph_excess_matches_definition_and_oracle():
    g = W.split()  # s=0 a=1 b=2 t=3
    assert excess_flow(g, (0, 1, 3)) == 3
    assert excess_flow(g, (0, 1, 2, 3)) == 2
    assert oracle_fd_safe(g, (0, 1, 3)) and oracle_fd_safe(g, (0, 1, 2, 3))


def test_zero_excess_path_is_not_fd_safe():
    g = W.cross()
    p = (0, 1, 3, 4)
    assert excess_flow(g, p) == 0
    assert not is_fd_safe(g, p)
    assert not oracle_fd_safe(g, p)


def test_two_mfd_example_excess_values():
    g = W.two_mfd_example()
    assert excess_flow(g, (0, 1, 2)) == 3
    assert excess_flow(g, (0, 1, 2, 3)) == -6
    assert excess_flow(g, (0, 1, 2, 3, 4)) == -6


def test_rejects_short_or_missing_paths():
    g = W.diamond()
    with pytest.raises(ValueError):
        excess_flow(g, (0,))
    with pytest.raises(ValueError):
        excess_flow(g, (0, 3))


def test_funnel_safe_paths_are_its_unitigs():
    assert safe_flow_maximal_paths(W.diamond()) == [(0, 1, 3), (0, 2, 3)]
    assert safe_flow_maximal_paths(W.chain()) == [(0, 1, 2)]


def test_two_mfd_example_fd_pieces():
    fd = safe_flow_maximal_paths(W.two_mfd_example())
    assert (0, 1, 2) in fd and (2, 3, 4) in fd
    assert (0, 1, 2, 3, 4) not in fd


def test_cross_node_gives_exactly_its_four_unitigs():
    assert safe_flow_maximal_paths(W.cross()) == [(0, 1, 3), (0, 2, 3), (3, 4, 6), (3, 5, 6)]


def test_windows_on_example_path():
    assert fd_safe_windows(W.two_mfd_example(), (0, 1, 2, 3, 4, 6)) == [(1, 3), (3, 5), (5, 6)]


def test_greedy_can_exceed_minimum():
    g = W.greedy_gap()
    greedy = greedy_decomposition(g)
    assert verify_decomposition(g, greedy)
    assert len(greedy) == 4
    assert oracle_min_k(g) == 3


@settings(max_examples=60, deadline=None)
@given(seeds, st.randoms(use_true_random=False))
def test_incremental_updates_match_recompute(seed, rnd):
    g, truth = random_instance(random.Random(seed), "r")
    p = rnd.choice(truth.paths).nodes
    state = ExcessFlowState(g, p[0], p[1])
    lo, hi = 0, 1
    while hi + 1 < len(p):
        if hi - lo > 1 and rnd.random() < 0.4:
            state.advance_left()
            lo += 1
        else:
            assert state.extended(p[hi + 1]) == excess_flow(g, p[lo:hi + 2])
            state.extend_right(p[hi + 1])
            hi += 1
        assert state.excess == state.recompute() == excess_flow(g, p[lo:hi + 1])


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fd_safety_agrees_with_oracle(seed):
    g, truth = random_instance(random.Random(seed), "r")
    for q in truth.paths:
        nodes = q.nodes
        for a in range(len(nodes) - 1):
            for b in range(a + 2, len(nodes) + 1):
                p = nodes[a:b]
                assert is_fd_safe(g, p) == oracle_fd_safe(g, p)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_safe_flow_paths_maximal_and_subpath_closed(seed):
    g, truth = random_instance(random.Random(seed), "r")
    paths = safe_flow_maximal_paths(g)
    for p in paths:
        assert g.is_path(p) and is_fd_safe(g, p)
        for a in range(len(p) - 1):
            for b in range(a + 2, len(p) + 1):
                assert is_fd_safe(g, p[a:b])
        for x in g.predecessors(p[0]):
            assert not is_fd_safe(g, (x,) + p)
        for y in g.successors(p[-1]):
            assert not is_fd_safe(g, p + (y,))
    # computed from a different decomposition, the answer is the same
    other = []
    for q in truth.paths:
        other += [q.nodes[l - 1:r] for l, r in fd_safe_windows(g, q.nodes)]
    from mfdsafe.paths import postprocess
    assert postprocess(other) == paths
