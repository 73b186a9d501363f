"""Drive a set of MAP workers to completion and summarize the run."""

from __future__ import annotations

import time
from typing import Callable
from dataclasses import dataclass, field

from .distmap import BLOCK, DEFAULT_BATCH, POLL, ProtocolError, Worker, WorkerStats
from .model import TransitionSystem
from .safra import Token
from .store import fnv1a_64
from .transport.sim import SimNetwork
from .transport.tcp import (
    DEFAULT_CONNECT_TIMEOUT,
    DEFAULT_WATCHDOG,
    PeerStats,
    ProtocolStall,
    TcpEndpoint,
)
from .wire import StateBatch

READY, BLOCKED, DONE = 0, 1, 2


@dataclass
class Verdict:
    found: bool
    witness: bytes | None
    iterations: int
    states: int
    transitions: int
    messages: int
    frames: int
    per_worker: list[WorkerStats]
    excluded_per_iteration: list[int] = field(default_factory=list)
    reach_only: bool = False
    wall_time: float = 0.0
    steps: int = 0
    event_log: list[str] | None = field(default=None, repr=False)

    @property
    def result(self) -> str:
        if self.reach_only:
            return "REACH"
        return "CYCLE" if self.found else "NO_CYCLE"


class SimChecker:
    """Omniscient invariant checks for simulated runs.

    * every decision happens with no STATE record anywhere in the system and
      every work stack empty;
    * the decision comes from at most the second probe initiated after the
      system became quiescent;
    * the token's summary matches the workers' actual dominated counts and
      witnesses;
    * the sum of Safra counters equals the STATE records in flight whenever
      all workers are in the same iteration.
    """

    def __init__(self, net: SimNetwork) -> None:
        self.net = net
        self.workers: list[Worker] = []
        self.quiescent_mark: int | None = None
        self.decided_iteration = 0
        self.decisions = 0
        self.max_probes_after_quiescence = 0

    def in_flight(self) -> int:
        total = self.net.states_in_flight
        for w in self.workers:
            total += sum(len(b) for b in w.out)
            total += sum(len(m) for _, m in w.pending if isinstance(m, StateBatch))
        return total

    def quiescent(self) -> bool:
        return all(not w.work_stack for w in self.workers) and self.in_flight() == 0

    def after_step(self) -> None:
        live = [w for w in self.workers if w.result is None]
        if not live or len({w.iteration for w in live}) != 1:
            return
        if live[0].iteration != self.workers[0].iteration:
            return
        if live[0].iteration <= self.decided_iteration:
            return
        counted = sum(w.safra.count for w in self.workers)
        if counted != self.in_flight():
            raise ProtocolError(
                f"Safra counters sum to {counted} but {self.in_flight()} states are in flight"
            )
        if self.quiescent_mark is None and self.quiescent():
            self.quiescent_mark = self.workers[0].safra.initiations

    def on_decide(self, worker: Worker, summary: Token) -> None:
        self.decisions += 1
        if not self.quiescent():
            raise ProtocolError("termination detected while work or messages remain")
        if self.quiescent_mark is None:
            self.after_step()
        if self.quiescent_mark is None:
            raise ProtocolError("decision without observed quiescence")
        probes = worker.safra.initiations - self.quiescent_mark
        self.max_probes_after_quiescence = max(self.max_probes_after_quiescence, probes)
        if probes > 2:
            raise ProtocolError(f"detection took {probes} probes after quiescence")
        dominated = sum(w.dominated_count for w in self.workers)
        if summary.dominated_zero != (dominated == 0):
            raise ProtocolError("token dominated summary disagrees with workers")
        if summary.cycle_found != any(w.witness is not None for w in self.workers):
            raise ProtocolError("token cycle summary disagrees with workers")
        self.quiescent_mark = None
        self.decided_iteration = worker.iteration


def summarize(
    workers: list[Worker], reach_only: bool, wall_time: float = 0.0,
    steps: int = 0, log: list[str] | None = None,
) -> Verdict:
    coord = workers[0]
    result = coord.result
    if result is None:
        raise ProtocolError("run ended without a TERMINATE decision")
    stats = [w.stats for w in workers]
    for w in workers:
        w.stats.owned_states = len(w.table)
    excluded = [sum(col) for col in zip(*(s.excluded_per_iteration for s in stats))]
    return Verdict(
        found=result.witness is not None,
        witness=result.witness,
        iterations=coord.iteration,
        states=sum(s.owned_states for s in stats),
        transitions=sum(s.transitions for s in stats),
        messages=sum(s.states_sent for s in stats),
        frames=sum(s.frames_sent for s in stats),
        per_worker=stats,
        excluded_per_iteration=excluded,
        reach_only=reach_only,
        wall_time=wall_time,
        steps=steps,
        event_log=log,
    )


def run_distributed(
    model: TransitionSystem,
    workers: int = 1,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH,
    reach_only: bool = False,
    policy: str = "random",
    serialize: bool = True,
    check: bool = False,
    record_log: bool = False,
    max_steps: int | None = None,
    inspect: Callable[[list[Worker]], None] | None = None,
) -> Verdict:
    """Run all workers in one process over the simulated network.

    ``inspect``, if given, is called with the finished workers before the
    summary is built (tests use it to look at per-worker tables).
    """
    if workers < 1:
        raise ValueError("need at least one worker")
    start = time.perf_counter()
    net = SimNetwork(workers, model.state_width, seed, serialize=serialize, policy=policy)
    checker = SimChecker(net) if check else None
    ws = [
        Worker(i, workers, model, net.endpoints[i], batch_size, reach_only, observer=checker)
        for i in range(workers)
    ]
    if checker is not None:
        checker.workers = ws
    gens = [w.run() for w in ws]
    status = [READY] * workers
    endpoints = net.endpoints
    log: list[str] | None = [] if record_log else None
    alive = workers
    steps = 0

    while alive:
        runnable = [
            i for i in range(workers)
            if status[i] == READY or (status[i] == BLOCKED and endpoints[i].inbox)
        ]
        kind, arg = net.choose(runnable)
        if kind == "run":
            try:
                cmd = next(gens[arg])
                status[arg] = READY if cmd is POLL else BLOCKED
            except StopIteration:
                status[arg] = DONE
                alive -= 1
                cmd = "done"
            if log is not None:
                log.append(f"r{arg}:{cmd}")
        else:
            edge, idx = (arg, 0) if kind == "deliver" else arg
            frame = net.deliver(edge, idx)
            if log is not None:
                log.append(f"d{edge[0]}>{edge[1]}:{type(frame.msg).__name__}:{frame.states}")
        steps += 1
        if checker is not None:
            checker.after_step()
        if max_steps is not None and steps > max_steps:
            raise ProtocolError(f"simulation exceeded {max_steps} steps")

    if inspect is not None:
        inspect(ws)
    return summarize(ws, reach_only, time.perf_counter() - start, steps, log)


def run_tcp_worker(
    model: TransitionSystem,
    hosts: list[tuple[str, int]],
    index: int,
    batch_size: int = DEFAULT_BATCH,
    reach_only: bool = False,
    connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
    watchdog: float = DEFAULT_WATCHDOG,
) -> Verdict:
    """Run worker ``index`` of a TCP mesh.

    After TERMINATE every other worker reports its totals to worker 0, so the
    coordinator's verdict carries run-wide state and message counts; the
    other workers' verdicts only cover their own share.
    """
    start = time.perf_counter()
    model_hash = fnv1a_64(model.fingerprint.encode())
    ep = TcpEndpoint(hosts, index, model.state_width, model_hash)
    ep.connect(connect_timeout)
    try:
        w = Worker(index, len(hosts), model, ep, batch_size, reach_only)
        for cmd in w.run():
            if cmd is BLOCK:
                ep.wait(watchdog)
        w.stats.owned_states = len(w.table)
        own = PeerStats(w.stats.owned_states, w.stats.transitions,
                        w.stats.states_sent, w.stats.states_received)
        peers: dict[int, PeerStats] = {}
        for dst in range(len(hosts)):
            if dst != index:
                ep.send_stats(dst, own)
        if index == 0:
            extra = list(w.unhandled)
            deadline = time.monotonic() + watchdog
            while len(peers) < len(hosts) - 1:
                for src, item in extra:
                    if isinstance(item, PeerStats):
                        peers[src] = item
                if len(peers) == len(hosts) - 1:
                    break
                if time.monotonic() > deadline:
                    raise ProtocolStall("missing end-of-run statistics from peers")
                ep.wait(max(0.01, deadline - time.monotonic()))
                extra = ep.poll()
    finally:
        ep.close()

    result = w.result
    if result is None:
        raise ProtocolError("worker stopped without a TERMINATE decision")
    everyone = [own, *peers.values()]
    return Verdict(
        found=result.witness is not None,
        witness=result.witness,
        iterations=w.iteration,
        states=sum(p.owned_states for p in everyone),
        transitions=sum(p.transitions for p in everyone),
        messages=sum(p.states_sent for p in everyone),
        frames=w.stats.frames_sent,
        per_worker=[w.stats],
        excluded_per_iteration=list(w.stats.excluded_per_iteration),
        reach_only=reach_only,
        wall_time=time.perf_counter() - start,
    )
