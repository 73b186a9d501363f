"""Explicit-state accepting-cycle detection with distributed MAP."""

from .baselines import CycleVerdict, ReachStats, bfs_reach, dfs_reach, map_sequential, ndfs_cycle
from .builtins import builtin_model
from .model import ExplicitGraph, GraphSystem, TransitionSystem, decode_id, encode_id, load_graph, parse_graph
from .runner import Verdict, run_distributed

__version__ = "0.1.0"

__all__ = [
    "CycleVerdict",
    "ExplicitGraph",
    "GraphSystem",
    "ReachStats",
    "TransitionSystem",
    "Verdict",
    "bfs_reach",
    "builtin_model",
    "decode_id",
    "dfs_reach",
    "encode_id",
    "load_graph",
    "map_sequential",
    "ndfs_cycle",
    "parse_graph",
    "run_distributed",
]
