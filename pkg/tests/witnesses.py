"""Hand-built and searched graphs shared by the tests."""

from mfdsafe.flow_graph import FlowGraph


def graph(gid, edges, n=None):
    n = n if n is not None else 1 + max(max(u, v) for u, v, _ in edges)
    return FlowGraph(gid, n, edges)


def single_edge():
    return graph("single", [(0, 1, 5)])


def chain():
    return graph("chain", [(0, 1, 5), (1, 2, 5)])


def diamond():
    return graph("diamond", [(0, 1, 3), (0, 2, 4), (1, 3, 3), (2, 3, 4)])


def cross():
    """Node 3 has in-degree 2 and out-degree 2; every edge carries 2.

    Two minimum decompositions exist (pair 1->4 with 2->5, or 1->5 with
    2->4), and every path through node 3 has excess flow 0.
    """
    return graph("cross", [
        (0, 1, 2), (0, 2, 2), (1, 3, 2), (2, 3, 2),
        (3, 4, 2), (3, 5, 2), (4, 6, 2), (5, 6, 2),
    ])


def split():
    """s=0, a=1, b=2, t=3: s->a 5, a->t 3, a->b 2, b->t 2."""
    return graph("split", [(0, 1, 5), (1, 3, 3), (1, 2, 2), (2, 3, 2)])


def two_mfd_example():
    """s=0, a=1, b=2, c=3, d=4.

    Decomposes into 4 paths with weights 5,3,7,2 and also with 3,4,1,9.
    (s,a,b) has excess 3, (s,a,b,c) and (s,a,b,c,d) have excess -6, yet
    (s,a,b,c,d) lies inside a path of every minimum decomposition.
    """
    return graph("two-mfd", [
        (0, 1, 3), (0, 2, 9), (0, 4, 5), (1, 2, 3), (2, 3, 3), (2, 4, 9),
        (3, 4, 3), (4, 5, 7), (4, 6, 10), (5, 6, 7),
    ])


def greedy_gap():
    """Widest-path peeling needs 4 paths, the minimum is 3."""
    return graph("greedy-gap", [
        (0, 1, 5), (0, 3, 4), (1, 2, 5), (2, 3, 5), (3, 4, 3),
        (3, 5, 2), (3, 6, 4), (4, 6, 3), (5, 6, 2),
    ])


def linked_pair():
    """(0,3,7) and (1,2,4) are each avoidable, but not both at once."""
    return graph("linked-pair", [
        (0, 1, 3), (0, 2, 5), (0, 3, 1), (1, 2, 3), (2, 3, 6), (2, 4, 2),
        (3, 4, 6), (3, 7, 1), (4, 5, 8), (5, 6, 6), (5, 7, 2), (6, 7, 6),
    ])


ALL = [single_edge, chain, diamond, cross, split, two_mfd_example, greedy_gap, linked_pair]
