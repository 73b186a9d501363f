"""Transition-system contract, state codec and the explicit-graph format."""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Sequence

ID_WIDTH = 4


class ModelError(Exception):
    """Base class for model construction and codec failures."""


class MalformedState(ModelError):
    pass


class GraphSyntaxError(ModelError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


def encode_id(state_id: int, width: int = ID_WIDTH) -> bytes:
    """Fixed-width big-endian encoding of a non-negative integer id."""
    if state_id < 0 or state_id >= 1 << (8 * width):
        raise ValueError(f"id {state_id} does not fit in {width} bytes")
    return state_id.to_bytes(width, "big")


def decode_id(data: bytes, width: int = ID_WIDTH) -> int:
    if len(data) != width:
        raise MalformedState(f"expected {width} bytes, got {len(data)}")
    return int.from_bytes(data, "big")


class TransitionSystem(ABC):
    """Finite transition system over canonical fixed-width byte states.

    Implementations are immutable once built. ``successors`` returns a fresh
    list on each call and must be deterministic. ``decode`` may not depend on
    any previously decoded state.
    """

    state_width: int
    name: str = "model"

    @abstractmethod
    def initial_states(self) -> list[bytes]: ...

    @abstractmethod
    def successors(self, state: bytes) -> list[bytes]: ...

    @abstractmethod
    def accepting(self, state: bytes) -> bool: ...

    @abstractmethod
    def encode(self, value: Any) -> bytes: ...

    @abstractmethod
    def decode(self, state: bytes) -> Any: ...

    @property
    def fingerprint(self) -> str:
        """Stable description used to check that TCP peers load the same model."""
        return f"{type(self).__name__}:{self.name}:{self.state_width}"

    def check_width(self, state: bytes) -> None:
        if len(state) != self.state_width:
            raise MalformedState(
                f"state has {len(state)} bytes, model width is {self.state_width}"
            )


@dataclass(frozen=True)
class ExplicitGraph:
    num_states: int
    initial: tuple[int, ...]
    accepting: frozenset[int]
    edges: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.edges) != self.num_states:
            raise ValueError("adjacency list length must equal num_states")
        for sid in (*self.initial, *self.accepting):
            if not 0 <= sid < self.num_states:
                raise ValueError(f"state id {sid} out of range")
        for dsts in self.edges:
            for d in dsts:
                if not 0 <= d < self.num_states:
                    raise ValueError(f"state id {d} out of range")

    @classmethod
    def from_edges(
        cls,
        num_states: int,
        initial: Sequence[int],
        accepting: Sequence[int],
        edges: Sequence[tuple[int, int]],
    ) -> ExplicitGraph:
        adj: list[list[int]] = [[] for _ in range(num_states)]
        for src, dst in edges:
            adj[src].append(dst)
        return cls(
            num_states,
            tuple(initial),
            frozenset(accepting),
            tuple(tuple(a) for a in adj),
        )

    def to_text(self) -> str:
        lines = [f"states {self.num_states}"]
        if self.initial:
            lines.append("init " + " ".join(map(str, self.initial)))
        if self.accepting:
            lines.append("accept " + " ".join(map(str, sorted(self.accepting))))
        for src, dsts in enumerate(self.edges):
            lines.extend(f"edge {src} {dst}" for dst in dsts)
        return "\n".join(lines) + "\n"


class GraphSystem(TransitionSystem):
    """Transition system backed by an :class:`ExplicitGraph`; states are ids."""

    state_width = ID_WIDTH

    def __init__(self, graph: ExplicitGraph, name: str = "graph") -> None:
        self.graph = graph
        self.name = name
        self._encoded = tuple(encode_id(i) for i in range(graph.num_states))

    def initial_states(self) -> list[bytes]:
        return [self._encoded[i] for i in self.graph.initial]

    def successors(self, state: bytes) -> list[bytes]:
        enc = self._encoded
        return [enc[d] for d in self.graph.edges[self.decode(state)]]

    def accepting(self, state: bytes) -> bool:
        return self.decode(state) in self.graph.accepting

    def encode(self, value: int) -> bytes:
        if not 0 <= value < self.graph.num_states:
            raise ValueError(f"state id {value} out of range")
        return self._encoded[value]

    def decode(self, state: bytes) -> int:
        sid = decode_id(state)
        if sid >= self.graph.num_states:
            raise MalformedState(f"state id {sid} out of range")
        return sid

    @property
    def fingerprint(self) -> str:
        from .store import fnv1a_64

        digest = fnv1a_64(self.graph.to_text().encode())
        return f"graph:{digest:016x}"


_TOKEN = re.compile(r"\S+")


def parse_graph(text: str) -> ExplicitGraph:
    """Parse the line-oriented explicit-graph format.

    Directives: ``states N``, ``init ID...``, ``accept ID...``, ``edge SRC DST``.
    ``#`` starts a comment. ``states`` must come before any id reference.
    """
    num_states: int | None = None
    initial: list[int] = []
    accepting: list[int] = []
    edges: list[tuple[int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        words = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not words:
            continue
        (directive, dcol), args = words[0], words[1:]

        def ids() -> list[int]:
            out = []
            for word, col in args:
                if not word.isdigit():
                    raise GraphSyntaxError(f"expected decimal id, got {word!r}", lineno, col)
                value = int(word)
                if num_states is None:
                    raise GraphSyntaxError("'states' must precede id references", lineno, col)
                if value >= num_states:
                    raise GraphSyntaxError(
                        f"dangling id {value} (states {num_states})", lineno, col
                    )
                out.append(value)
            return out

        if directive == "states":
            if num_states is not None:
                raise GraphSyntaxError("duplicate 'states' directive", lineno, dcol)
            if len(args) != 1 or not args[0][0].isdigit():
                raise GraphSyntaxError("'states' takes one count", lineno, dcol)
            num_states = int(args[0][0])
        elif directive == "init":
            if not args:
                raise GraphSyntaxError("'init' needs at least one id", lineno, dcol)
            initial.extend(ids())
        elif directive == "accept":
            if not args:
                raise GraphSyntaxError("'accept' needs at least one id", lineno, dcol)
            accepting.extend(ids())
        elif directive == "edge":
            if len(args) != 2:
                raise GraphSyntaxError("'edge' takes exactly two ids", lineno, dcol)
            src, dst = ids()
            edges.append((src, dst))
        else:
            raise GraphSyntaxError(f"unknown directive {directive!r}", lineno, dcol)

    if num_states is None:
        raise GraphSyntaxError("missing 'states' directive", 1, 1)
    return ExplicitGraph.from_edges(num_states, initial, accepting, edges)


def load_graph(text: str, name: str = "graph") -> GraphSystem:
    return GraphSystem(parse_graph(text), name=name)


def reachable_states(model: TransitionSystem, cap: int | None = None) -> list[bytes]:
    """All states reachable from the initial states, in BFS discovery order."""
    seen: dict[bytes, None] = {}
    frontier = []
    for s in model.initial_states():
        if s not in seen:
            seen[s] = None
            frontier.append(s)
    i = 0
    while i < len(frontier):
        for t in model.successors(frontier[i]):
            if t not in seen:
                seen[t] = None
                frontier.append(t)
                if cap is not None and len(seen) > cap:
                    raise ModelError(f"more than {cap} reachable states")
        i += 1
    return frontier
