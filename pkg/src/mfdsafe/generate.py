"""Random flow networks built by superposing weighted paths.

Mirrors how the RNA datasets were made: pick a few source-to-sink
"transcripts" through a topologically ordered node set, give them
abundances, and sum them into edge flows.  The paths double as a ground
truth decomposition.
"""

from __future__ import annotations

import random

from .flow_graph import FlowGraph, GroundTruth, WeightedPath


def random_instance(
    rng: random.Random,
    graph_id: str,
    max_edges: int = 12,
    max_flow: int = 20,
    max_nodes: int = 8,
    max_paths: int = 5,
) -> tuple[FlowGraph, GroundTruth]:
    while True:
        n = rng.randint(3, max_nodes)
        t = rng.randint(2, max_paths)
        total = rng.randint(t, max_flow)
        cuts = sorted(rng.sample(range(1, total), t - 1))
        weights = [b - a for a, b in zip([0] + cuts, cuts + [total])]
        paths = []
        for w in weights:
            inner = sorted(rng.sample(range(1, n - 1), rng.randint(1, n - 2)))
            paths.append(WeightedPath((0, *inner, n - 1), w))
        flow: dict[tuple[int, int], int] = {}
        for nodes, w in paths:
            for a, b in zip(nodes, nodes[1:]):
                flow[(a, b)] = flow.get((a, b), 0) + w
        if len(flow) > max_edges:
            continue
        used = sorted({v for e in flow for v in e})
        index = {v: i for i, v in enumerate(used)}
        edges = [(index[a], index[b], f) for (a, b), f in sorted(flow.items())]
        g = FlowGraph(graph_id, len(used), edges, labels=range(len(used)))
        truth = GroundTruth(graph_id, [
            WeightedPath(tuple(index[v] for v in nodes), w) for nodes, w in paths
        ])
        return g, truth


def random_corpus(seed: int, count: int, **kwargs) -> list[tuple[FlowGraph, GroundTruth]]:
    rng = random.Random(seed)
    return [random_instance(rng, f"rand{seed}_{j}", **kwargs) for j in range(count)]
