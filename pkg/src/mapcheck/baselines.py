"""Sequential reference algorithms: BFS/DFS reachability, nested DFS, MAP."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .model import TransitionSystem
from .store import StateTable, map_max, map_order


@dataclass
class ReachStats:
    states: int = 0
    transitions: int = 0
    peak_frontier: int = 0


@dataclass
class CycleVerdict:
    found: bool
    witness: bytes | None = None
    iterations: int = 0
    excluded_total: int = 0
    states: int = 0
    # number of accepting states excluded at the end of each completed iteration
    excluded_per_iteration: list[int] = field(default_factory=list)


class StateCapExceeded(RuntimeError):
    def __init__(self, cap: int, partial: ReachStats | CycleVerdict | None = None) -> None:
        super().__init__(f"state cap of {cap} exceeded")
        self.cap = cap
        self.partial = partial


def bfs_reach(model: TransitionSystem, state_cap: int | None = None) -> ReachStats:
    stats = ReachStats()
    seen: set[bytes] = set()
    queue: deque[bytes] = deque()
    for s in model.initial_states():
        if s not in seen:
            seen.add(s)
            queue.append(s)
    stats.peak_frontier = len(queue)
    while queue:
        s = queue.popleft()
        for t in model.successors(s):
            stats.transitions += 1
            if t not in seen:
                seen.add(t)
                queue.append(t)
                if state_cap is not None and len(seen) > state_cap:
                    stats.states = len(seen)
                    raise StateCapExceeded(state_cap, stats)
        stats.peak_frontier = max(stats.peak_frontier, len(queue))
    stats.states = len(seen)
    return stats


def dfs_reach(model: TransitionSystem, state_cap: int | None = None) -> ReachStats:
    stats = ReachStats()
    seen: set[bytes] = set()
    for init in model.initial_states():
        if init in seen:
            continue
        seen.add(init)
        stack = [(init, iter(model.successors(init)))]
        while stack:
            _, it = stack[-1]
            for t in it:
                stats.transitions += 1
                if t not in seen:
                    seen.add(t)
                    if state_cap is not None and len(seen) > state_cap:
                        stats.states = len(seen)
                        raise StateCapExceeded(state_cap, stats)
                    stack.append((t, iter(model.successors(t))))
                    stats.peak_frontier = max(stats.peak_frontier, len(stack))
                    break
            else:
                stack.pop()
    stats.states = len(seen)
    return stats


def ndfs_cycle(model: TransitionSystem, state_cap: int | None = None) -> CycleVerdict:
    """Two-phase nested depth-first search.

    The inner search is started from each accepting state in outer post-order
    and looks for a path back to that seed; inner-visited marks are shared
    between inner searches.
    """
    visited: set[bytes] = set()
    flagged: set[bytes] = set()

    def inner(seed: bytes) -> bool:
        stack = [iter(model.successors(seed))]
        while stack:
            for t in stack[-1]:
                if t == seed:
                    return True
                if t not in flagged:
                    flagged.add(t)
                    stack.append(iter(model.successors(t)))
                    break
            else:
                stack.pop()
        return False

    for init in model.initial_states():
        if init in visited:
            continue
        visited.add(init)
        stack = [(init, iter(model.successors(init)))]
        while stack:
            s, it = stack[-1]
            for t in it:
                if t not in visited:
                    visited.add(t)
                    if state_cap is not None and len(visited) > state_cap:
                        raise StateCapExceeded(state_cap, CycleVerdict(False, states=len(visited)))
                    stack.append((t, iter(model.successors(t))))
                    break
            else:
                stack.pop()
                if model.accepting(s) and inner(s):
                    return CycleVerdict(True, witness=s, states=len(visited))
    return CycleVerdict(False, states=len(visited))


def map_sequential(model: TransitionSystem, state_cap: int | None = None) -> CycleVerdict:
    """Maximal accepting predecessors search on a single worker.

    Each iteration propagates, from the initial states, the largest
    non-excluded accepting predecessor of every state. An accepting state that
    receives itself lies on a cycle. Accepting states met in the iteration and
    never dominated are cycle-free and get excluded before the next iteration;
    the search stops once an iteration dominates nothing.
    """
    table = StateTable(model.state_width)
    iteration = 0
    per_iter: list[int] = []

    while True:
        iteration += 1
        shrink: set[bytes] = set()
        dominated = 0
        stack: list[tuple[bytes, bytes | None]] = [(s, None) for s in reversed(model.initial_states())]

        while stack:
            s, p = stack.pop()
            if p == s:
                return CycleVerdict(
                    True, witness=s, iterations=iteration,
                    excluded_total=sum(per_iter), states=len(table),
                    excluded_per_iteration=per_iter,
                )
            entry, _ = table.intern(s)
            if state_cap is not None and len(table) > state_cap:
                raise StateCapExceeded(state_cap, CycleVerdict(False, iterations=iteration, states=len(table)))
            acc = not entry.excluded and model.accepting(s)
            first = entry.iteration_tag != iteration
            if first:
                entry.iteration_tag = iteration
                entry.map_value = None
                entry.dominated = False
                if acc:
                    shrink.add(s)
            new = map_max(entry.map_value, p)
            if acc and not entry.dominated and map_order(new, s) > 0:
                entry.dominated = True
                shrink.discard(s)
                dominated += 1
            if first or map_order(new, entry.map_value) > 0:
                entry.map_value = new
                prop = map_max(new, s) if acc else new
                for t in reversed(model.successors(s)):
                    stack.append((t, prop))

        if dominated == 0:
            return CycleVerdict(
                False, iterations=iteration, excluded_total=sum(per_iter),
                states=len(table), excluded_per_iteration=per_iter,
            )
        for s in shrink:
            table.get(s).excluded = True
        per_iter.append(len(shrink))
