"""Deterministic in-process network and cooperative scheduler.

Every ordered worker pair has a FIFO queue of frames. At each step a seeded
PRNG picks one event: deliver the head frame of some non-empty queue into the
destination's inbox, or advance one runnable worker to its next yield point.
A worker is runnable if it last yielded ``POLL``, or yielded ``BLOCK`` and has
something in its inbox. Identical seeds replay identical schedules.

With ``policy="token-first"`` the scheduler prefers to deliver termination
tokens, letting a token overtake STATE frames queued ahead of it on the same
edge (never a CONTROL frame). After ``2 * workers`` consecutive preferred
deliveries it schedules one ordinary event so the run cannot livelock.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from ..safra import Token
from ..wire import Message, StateBatch, decode_message, encode_message, kind_of


class SimDeadlock(RuntimeError):
    """No event is possible but some worker has not terminated."""


class SimEndpoint:
    def __init__(self, net: SimNetwork, worker_id: int) -> None:
        self.net = net
        self.worker_id = worker_id
        self.workers = net.workers
        self.inbox: deque[tuple[int, Message]] = deque()

    def send(self, dst: int, msg: Message) -> None:
        self.net.send(self.worker_id, dst, msg)

    def poll(self) -> list[tuple[int, Message]]:
        out = list(self.inbox)
        self.inbox.clear()
        self.net.inbox_states -= sum(len(m) for _, m in out if isinstance(m, StateBatch))
        return out


@dataclass
class _Frame:
    msg: Message
    payload: bytes | None
    states: int


@dataclass
class NetStats:
    frames: dict[str, int] = field(default_factory=lambda: {"STATE": 0, "CONTROL": 0, "TOKEN": 0})
    states: int = 0


class SimNetwork:
    def __init__(
        self, workers: int, width: int, seed: int = 0, serialize: bool = True,
        policy: str = "random",
    ) -> None:
        if policy not in ("random", "token-first"):
            raise ValueError(f"unknown schedule policy {policy!r}")
        self.workers = workers
        self.width = width
        self.rng = random.Random(seed)
        self.serialize = serialize
        self.policy = policy
        self.queues: dict[tuple[int, int], deque[_Frame]] = {}
        self.endpoints = [SimEndpoint(self, i) for i in range(workers)]
        # STATE records sitting in edge queues / in undrained inboxes
        self.queued_states = 0
        self.inbox_states = 0
        self.stats = NetStats()
        self._token_streak = 0

    def send(self, src: int, dst: int, msg: Message) -> None:
        if src == dst:
            raise ValueError("workers route messages to themselves locally")
        payload = encode_message(msg) if self.serialize else None
        n = len(msg) if isinstance(msg, StateBatch) else 0
        self.queues.setdefault((src, dst), deque()).append(_Frame(msg, payload, n))
        self.queued_states += n
        self.stats.frames[kind_of(msg)] += 1
        self.stats.states += n

    @property
    def states_in_flight(self) -> int:
        return self.queued_states + self.inbox_states

    def pending_edges(self) -> list[tuple[int, int]]:
        return [e for e, q in self.queues.items() if q]

    def _token_index(self, q: deque[_Frame]) -> int | None:
        for i, f in enumerate(q):
            if isinstance(f.msg, Token):
                return i
            if not isinstance(f.msg, StateBatch):
                return None
        return None

    def deliver(self, edge: tuple[int, int], index: int = 0) -> _Frame:
        q = self.queues[edge]
        if index == 0:
            frame = q.popleft()
        else:
            frame = q[index]
            del q[index]
        msg = frame.msg
        if frame.payload is not None:
            msg = decode_message(frame.payload, self.width)
        self.queued_states -= frame.states
        self.inbox_states += frame.states
        self.endpoints[edge[1]].inbox.append((edge[0], msg))
        return frame

    def choose(self, runnable: list[int]) -> tuple[str, object]:
        edges = self.pending_edges()
        if self.policy == "token-first" and self._token_streak < 2 * self.workers:
            for e in edges:
                idx = self._token_index(self.queues[e])
                if idx is not None:
                    self._token_streak += 1
                    return "token", (e, idx)
        self._token_streak = 0
        n = len(edges) + len(runnable)
        if n == 0:
            raise SimDeadlock("no deliverable message and no runnable worker")
        k = self.rng.randrange(n)
        if k < len(edges):
            return "deliver", edges[k]
        return "run", runnable[k - len(edges)]
