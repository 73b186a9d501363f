"""Seeded random-graph corpus used by tests, acceptance runs and scripts.

Erdos-Renyi digraphs with 1..50 states, edge probability drawn from
{0.02, 0.05, 0.1}, each state accepting with probability 0.2, initial state 0.
"""

from __future__ import annotations

import random

from .model import ExplicitGraph, GraphSystem

EDGE_PROBABILITIES = (0.02, 0.05, 0.1)
ACCEPT_PROBABILITY = 0.2
MAX_STATES = 50


def random_graph(seed: int, max_states: int = MAX_STATES) -> ExplicitGraph:
    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    p = rng.choice(EDGE_PROBABILITIES)
    edges = [(a, b) for a in range(n) for b in range(n) if rng.random() < p]
    accepting = [s for s in range(n) if rng.random() < ACCEPT_PROBABILITY]
    return ExplicitGraph.from_edges(n, [0], accepting, edges)


def random_system(seed: int, max_states: int = MAX_STATES) -> GraphSystem:
    return GraphSystem(random_graph(seed, max_states), name=f"random-{seed}")


def corpus(count: int, start: int = 0) -> list[GraphSystem]:
    return [random_system(seed) for seed in range(start, start + count)]
