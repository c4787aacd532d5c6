"""Maximal safe paths for minimum flow decompositions of DAG flow networks."""

__version__ = "0.1.0"

from .flow_graph import FlowGraph, GroundTruth, WeightedPath, parse_graph_corpus, parse_truth_corpus
from .pipeline import RunConfig, SafetyReport, postprocess, run_corpus, run_graph

__all__ = [
    "FlowGraph",
    "GroundTruth",
    "WeightedPath",
    "parse_graph_corpus",
    "parse_truth_corpus",
    "RunConfig",
    "SafetyReport",
    "postprocess",
    "run_corpus",
    "run_graph",
]
