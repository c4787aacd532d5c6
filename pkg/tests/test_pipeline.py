import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from mfdsafe.fd_safety import safe_flow_maximal_paths
from mfdsafe.flow_graph import FlowGraph, parse_graph_corpus
from mfdsafe.generate import random_corpus, random_instance
from mfdsafe.paths import is_subpath
from mfdsafe.pipeline import (
    RunConfig,
    postprocess,
    read_safe_paths,
    run_corpus,
    run_graph,
    stats_text,
    write_safe_paths,
)

import witnesses as W

seeds = st.integers(0, 2**32 - 1)


def test_config_checks():
    with pytest.raises(ValueError):
        RunConfig(variant="sideways")
    with pytest.raises(ValueError):
        RunConfig(budget=0)


def test_funnel_needs_no_solver():
    r = run_graph(W.chain(), RunConfig())
    assert (r.status, r.ilp_calls, r.maximal_safe, r.provenance) == (
        "complete", 0, [(0, 1, 2)], ["trivial"])


def test_diamond_reports_both_branches():
    r = run_graph(W.diamond(), RunConfig())
    assert r.status == "complete" and r.ilp_calls == 0
    assert r.maximal_safe == [(0, 1, 3), (0, 2, 3)]


def test_forced_timeout_falls_back_to_fd_safe_paths():
    g = W.two_mfd_example()
    r = run_graph(g, RunConfig(budget=1e-6))
    assert r.status == "fallback"
    assert r.maximal_safe == safe_flow_maximal_paths(g)
    assert set(r.provenance) == {"fallback"}


def test_invalid_graph_is_skipped():
    g = FlowGraph("bad", 3, [(0, 1, 3), (1, 2, 5)])
    r = run_graph(g, RunConfig())
    assert r.status == "skipped" and "conservation" in r.error


def test_labels_are_restored():
    (g,) = parse_graph_corpus("# L\n7\n10 11 2\n10 12 2\n11 13 2\n12 13 2\n13 14 2\n13 15 2\n14 16 2\n15 16 2\n")
    r = run_graph(g, RunConfig())
    assert r.maximal_safe == [(10, 11, 13), (10, 12, 13), (13, 14, 16), (13, 15, 16)]


def test_provenance_and_k():
    r = run_graph(W.two_mfd_example(), RunConfig())
    assert r.k == 4
    assert dict(zip(r.maximal_safe, r.provenance))[(0, 1, 2, 3, 4)] == "ilp"
    assert dict(zip(r.maximal_safe, r.provenance))[(0, 4)] == "excess_flow"


def test_postprocess_examples():
    assert postprocess([(0, 1, 2), (0, 1)]) == [(0, 1, 2)]
    assert postprocess([(1, 2, 3), (2, 3)]) == [(1, 2, 3)]
    assert postprocess([(0, 1, 2), (1, 2, 3)]) == [(0, 1, 2), (1, 2, 3)]


def test_corpus_of_funnels():
    res = run_corpus([W.chain(), W.diamond(), W.single_edge()], RunConfig())
    assert [r.status for r in res.reports] == ["complete"] * 3
    assert res.aggregate["ilp_calls"] == 0


def test_corpus_with_invalid_graph():
    bad = FlowGraph("bad", 3, [(0, 1, 3), (1, 2, 5)])
    res = run_corpus([W.chain(), bad, W.diamond()], RunConfig())
    assert [r.status for r in res.reports] == ["complete", "skipped", "complete"]
    agg = res.aggregate
    assert (agg["complete"], agg["skipped"]) == (2, 1)
    assert agg["per_variant"]["topdown"]["graphs"] == 2


def _files(cfg, graphs):
    reports = run_corpus(graphs, cfg).reports
    buf = io.StringIO()
    write_safe_paths(reports, buf)
    return buf.getvalue(), stats_text(reports, timings=False)


def test_single_worker_runs_are_byte_identical():
    graphs = [g for g, _ in random_corpus(3, 40)]
    assert _files(RunConfig(), graphs) == _files(RunConfig(), graphs)


def test_parallel_run_matches_serial():
    graphs = [g for g, _ in random_corpus(4, 16)]
    assert _files(RunConfig(workers=2), graphs) == _files(RunConfig(), graphs)


def test_safe_paths_file_round_trip():
    reports = run_corpus([W.cross(), W.diamond()], RunConfig()).reports
    reports[0].graph_id = "graph with spaces"
    buf = io.StringIO()
    write_safe_paths(reports, buf)
    back = read_safe_paths(buf.getvalue())
    assert back["graph with spaces"] == ("complete", reports[0].maximal_safe)
    assert back["diamond"] == ("complete", [(0, 1, 3), (0, 2, 3)])
    with pytest.raises(ValueError):
        read_safe_paths("0 1 2\n")


def test_stats_columns():
    reports = run_corpus([W.cross()], RunConfig()).reports
    lines = stats_text(reports).splitlines()
    assert lines[0] == "graph_id,variant,status,ilp_calls,wall_ms,num_safe_paths"
    gid, variant, status, calls, wall, n = lines[1].split(",")
    assert (gid, variant, status, n) == ("cross", "topdown", "complete", "4")
    assert float(wall) >= 0 and int(calls) > 0
    assert stats_text(reports, timings=False).splitlines()[1].split(",")[4] == ""


def test_budget_respected():
    g = W.linked_pair()
    r = run_graph(g, RunConfig(budget=0.05))
    assert r.wall_time < 0.05 + 0.5


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_fallback_is_contained_in_complete_output(seed):
    g, _ = random_instance(random.Random(seed), "r")
    full = run_graph(g, RunConfig())
    fb = run_graph(g, RunConfig(budget=1e-9))
    assert full.status == "complete"
    for p in fb.maximal_safe:
        assert any(is_subpath(p, q) for q in full.maximal_safe)
    for p in full.maximal_safe:
        assert g.is_path(g.unlabel_path(p))
