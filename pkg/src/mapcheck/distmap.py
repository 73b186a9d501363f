"""Distributed MAP worker.

Each worker owns the states that hash to it, keeps their MAP metadata in its
own :class:`StateTable`, and exchanges STATE batches with the other owners.
Within one iteration, the worker runs a prioritized event loop (control
messages, then local work, then the termination token). Worker 0 also
initiates termination probes and decides, once a probe reports quiescence,
whether to start another iteration or stop.

The worker's loop is a generator that yields ``POLL`` after every unit of
work and ``BLOCK`` when it has nothing to do. A driver (the deterministic
simulator or the TCP runner) decides what happens between those points.

Iteration hand-over: the coordinator broadcasts ITERATE, and every worker
relays ITERATE to all peers before sending any STATE of the new iteration.
Channels are FIFO per sender/receiver pair, so a worker always sees some
ITERATE for iteration k+1 before any STATE of iteration k+1. Each worker
counts ITERATE messages per sender to tell stale relays from fresh ones.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Protocol

from .model import TransitionSystem
from .safra import SafraLocal, Token
from .store import StateTable, map_max, map_order, owner
from .wire import Control, ControlCode, Message, StateBatch

POLL = "poll"
BLOCK = "block"

DEFAULT_BATCH = 64


class ProtocolError(RuntimeError):
    """Invariant violation in the distributed protocol (a bug, not a model property)."""


class Endpoint(Protocol):
    worker_id: int
    workers: int

    def send(self, dst: int, msg: Message) -> None: ...

    def poll(self) -> list[tuple[int, Message]]: ...


class Observer(Protocol):
    def on_decide(self, worker: Worker, summary: Token) -> None: ...


@dataclass
class WorkerStats:
    worker_id: int
    owned_states: int = 0
    transitions: int = 0
    expansions: int = 0
    states_sent: int = 0
    states_received: int = 0
    states_discarded: int = 0
    frames_sent: int = 0
    frames_received: int = 0
    controls_sent: int = 0
    tokens_sent: int = 0
    excluded_per_iteration: list[int] = field(default_factory=list)


def coordinator_decide(
    quiescent: bool, dominated_zero: bool, cycle_found: bool, witness: bytes | None = None
) -> Control:
    if not quiescent:
        raise ProtocolError("coordinator asked to decide before quiescence")
    if cycle_found:
        return Control(ControlCode.TERMINATE, witness)
    if dominated_zero:
        return Control(ControlCode.TERMINATE)
    return Control(ControlCode.ITERATE)


class Worker:
    def __init__(
        self,
        worker_id: int,
        workers: int,
        model: TransitionSystem,
        endpoint: Endpoint,
        batch_size: int = DEFAULT_BATCH,
        reach_only: bool = False,
        observer: Observer | None = None,
    ) -> None:
        if not 1 <= batch_size <= 0xFFFF:
            raise ValueError("batch size must be in 1..65535")
        self.id = worker_id
        self.workers = workers
        self.model = model
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.reach_only = reach_only
        self.observer = observer

        self.table = StateTable(model.state_width)
        self.work_stack: list[tuple[bytes, bytes | None]] = []
        self.control_queue: deque[tuple[Control, int]] = deque()
        self.token_queue: deque[Token] = deque()
        self.pending: deque[tuple[int, Message]] = deque()
        # transport extras the loop does not consume (e.g. end-of-run stats)
        self.unhandled: list[tuple[int, object]] = []
        self.out: list[list[tuple[bytes, bytes | None]]] = [[] for _ in range(workers)]
        self.shrink: set[bytes] = set()
        self.dominated_count = 0
        self.flush = False
        self.iteration = 1
        self.witness: bytes | None = None
        self.result: Control | None = None
        self.safra = SafraLocal(worker_id, workers)
        self.stats = WorkerStats(worker_id)
        self._iterate_seen = [0] * workers
        self._start_iteration()

    # -- main loop ---------------------------------------------------------

    def run(self) -> Iterator[str]:
        while (yield from self.do_iteration()):
            pass
        self.stats.owned_states = len(self.table)

    def do_iteration(self) -> Iterator[str]:
        """One MAP iteration; returns True on ITERATE, False on TERMINATE."""
        while True:
            while self.control_queue:
                code = self._process_control(*self.control_queue.popleft())
                if code is ControlCode.TERMINATE:
                    return False
                if code is ControlCode.ITERATE:
                    return True

            while self.work_stack and not self.control_queue:
                s, p = self.work_stack.pop()
                self.dominated_count += self.process_work(s, p)
                yield POLL
                self._poll()

            while self.token_queue and not self.control_queue and not self.work_stack:
                self._process_token(self.token_queue.popleft())

            if not (self.control_queue or self.work_stack or self.token_queue or self.pending):
                self._send_queues()
                yield BLOCK
            else:
                yield POLL
            self._poll()

    # -- state processing --------------------------------------------------

    def process_work(self, s: bytes, p: bytes | None) -> int:
        """Handle one (state, map value) unit; returns 1 if an accepting
        state became dominated, else 0."""
        if p is not None and p == s:
            self._found_cycle(s)
            return 0
        entry, _ = self.table.intern(s)
        first = entry.iteration_tag != self.iteration
        acc = not self.reach_only and not entry.excluded and self.model.accepting(s)
        if first:
            entry.iteration_tag = self.iteration
            entry.map_value = None
            entry.dominated = False
            if acc:
                self.shrink.add(s)
        new = map_max(entry.map_value, p)
        delta = 0
        if acc and not entry.dominated and map_order(new, s) > 0:
            entry.dominated = True
            self.shrink.discard(s)
            delta = 1
        if first or map_order(new, entry.map_value) > 0:
            entry.map_value = new
            prop = map_max(new, s) if acc else new
            succ = self.model.successors(s)
            self.stats.expansions += 1
            if first and self.iteration == 1:
                self.stats.transitions += len(succ)
            for t in succ:
                self._emit(t, prop)
        return delta

    def _emit(self, t: bytes, value: bytes | None) -> None:
        dst = owner(t, self.workers)
        if dst == self.id:
            self.work_stack.append((t, value))
            return
        buf = self.out[dst]
        buf.append((t, value))
        self.safra.on_send()
        if len(buf) >= self.batch_size:
            self._send_batch(dst)

    def _send_batch(self, dst: int) -> None:
        buf = self.out[dst]
        self.out[dst] = []
        self.stats.states_sent += len(buf)
        self.stats.frames_sent += 1
        self.endpoint.send(dst, StateBatch(tuple(buf)))

    def _send_queues(self) -> None:
        for dst, buf in enumerate(self.out):
            if buf:
                self._send_batch(dst)

    def _found_cycle(self, s: bytes) -> None:
        if self.witness is None:
            self.witness = s
        flush = Control(ControlCode.FLUSH, s)
        self._broadcast(flush)
        self.control_queue.append((flush, self.id))

    # -- messages ----------------------------------------------------------

    def _poll(self) -> None:
        self.pending.extend(self.endpoint.poll())
        pending = self.pending
        while pending:
            src, msg = pending.popleft()
            if isinstance(msg, StateBatch):
                self._receive_states(msg)
            elif isinstance(msg, Control):
                self.control_queue.append((msg, src))
                # later messages from any sender may belong to the next phase
                break
            elif isinstance(msg, Token):
                self.token_queue.append(msg)
            else:
                self.unhandled.append((src, msg))

    def _receive_states(self, batch: StateBatch) -> None:
        n = len(batch)
        self.safra.on_receive(n)
        self.stats.frames_received += 1
        self.stats.states_received += n
        if self.flush:
            self.stats.states_discarded += n
            return
        for t, value in reversed(batch.records):
            if owner(t, self.workers) != self.id:
                raise ProtocolError(f"worker {self.id} received state {t.hex()} it does not own")
            self.work_stack.append((t, value))

    def _process_control(self, msg: Control, src: int) -> ControlCode | None:
        if msg.code is ControlCode.FLUSH:
            self.work_stack.clear()
            self.flush = True
            return ControlCode.FLUSH
        if msg.code is ControlCode.TERMINATE:
            self.result = msg
            return ControlCode.TERMINATE
        if src != self.id:
            self._iterate_seen[src] += 1
            if self._iterate_seen[src] + 1 <= self.iteration:
                return None  # stale relay
        if self.id != 0:
            self._broadcast(msg)
        self.apply_iterate()
        return ControlCode.ITERATE

    def _broadcast(self, msg: Control) -> None:
        for dst in range(self.workers):
            if dst != self.id:
                self.stats.controls_sent += 1
                self.endpoint.send(dst, msg)

    def apply_iterate(self) -> None:
        table = self.table
        for s in self.shrink:
            table.get(s).excluded = True
        self.stats.excluded_per_iteration.append(len(self.shrink))
        self.shrink.clear()
        self.dominated_count = 0
        self.flush = False
        self.iteration += 1
        self._start_iteration()

    def _start_iteration(self) -> None:
        self.safra.reset()
        self.token_queue.clear()
        if self.safra.is_initiator:
            self.token_queue.append(self.safra.start_token())
        for s in reversed(self.model.initial_states()):
            if owner(s, self.workers) == self.id:
                self.work_stack.append((s, None))

    # -- termination -------------------------------------------------------

    def _process_token(self, token: Token) -> None:
        detected, t = self.safra.handle_token(token, self.dominated_count == 0, self.witness)
        if detected:
            if self.observer is not None:
                self.observer.on_decide(self, t)
            decision = coordinator_decide(True, t.dominated_zero, t.cycle_found, t.witness)
            self._broadcast(decision)
            self.control_queue.append((decision, self.id))
            return
        dst = self.safra.successor
        if dst == self.id:
            self.token_queue.append(t)
        else:
            self.stats.tokens_sent += 1
            self.endpoint.send(dst, t)
