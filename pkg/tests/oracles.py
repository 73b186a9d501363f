"""Independent reference computations. Nothing here imports the code under test
beyond the ExplicitGraph container."""

from __future__ import annotations


def closure_reach(adj: dict[int, list[int]], sources) -> set[int]:
    seen = set()
    todo = list(sources)
    while todo:
        s = todo.pop()
        if s in seen:
            continue
        seen.add(s)
        todo.extend(adj.get(s, ()))
    return seen


def brute_force_cycle(num_states, initial, accepting, edges) -> set[int]:
    """Accepting states that are reachable and reach themselves in >= 1 step."""
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    reachable = closure_reach(adj, initial)
    out = set()
    for s in accepting:
        if s in reachable and s in closure_reach(adj, adj.get(s, [])):
            out.add(s)
    return out


def graph_cycle_witnesses(graph) -> set[int]:
    edges = [(a, b) for a, dsts in enumerate(graph.edges) for b in dsts]
    return brute_force_cycle(graph.num_states, graph.initial, graph.accepting, edges)


def naive_parse(text: str):
    """Second, deliberately simple reader for the explicit-graph format."""
    n = None
    init, acc, succ = [], [], {}
    for line in text.split("\n"):
        if "#" in line:
            line = line[: line.index("#")]
        f = line.split()
        if not f:
            continue
        if f[0] == "states":
            n = int(f[1])
        elif f[0] == "init":
            init += [int(x) for x in f[1:]]
        elif f[0] == "accept":
            acc += [int(x) for x in f[1:]]
        elif f[0] == "edge":
            succ.setdefault(int(f[1]), []).append(int(f[2]))
    return n, init, set(acc), succ


def system_graph(model, limit=10**5):
    """Enumerate a TransitionSystem into (states list, index, edges) by plain BFS."""
    order = list(dict.fromkeys(model.initial_states()))
    index = {s: i for i, s in enumerate(order)}
    edges = []
    i = 0
    while i < len(order):
        s = order[i]
        for t in model.successors(s):
            if t not in index:
                index[t] = len(order)
                order.append(t)
                assert len(order) <= limit
            edges.append((index[s], index[t]))
        i += 1
    return order, index, edges


def system_has_cycle(model) -> bool:
    order, index, edges = system_graph(model)
    accepting = [index[s] for s in order if model.accepting(s)]
    init = [index[s] for s in model.initial_states()]
    return bool(brute_force_cycle(len(order), init, accepting, edges))
