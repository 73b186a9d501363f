"""Acceptance suite: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s`` or
``python3 tests/test_acceptance.py``. The lines are printed even without
``-s``.
"""

from __future__ import annotations

import copy
import json
import os
import random
import time
from dataclasses import asdict

import pytest

from mapcheck import baselines
from mapcheck.builtins import builtin_model
from mapcheck.corpus import random_graph
from mapcheck.distmap import ProtocolError
from mapcheck.gcl import load_gcl
from mapcheck.loader import load_model
from mapcheck.model import GraphSystem, encode_id, reachable_states
from mapcheck.runner import run_distributed
from mapcheck.store import owner
from oracles import graph_cycle_witnesses, system_graph
from tcp_util import hosts_for, result_fields, run_processes

pytestmark = pytest.mark.slow

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MODELS = os.path.join(ROOT, "models")

GRAPHS = 1000
WORKERS = (1, 2, 4, 8)
SEEDS = range(5)

BUILTINS = [
    ("readers_writers", {"R": 2, "W": 2, "ERROR": 1}),
    ("readers_writers", {"R": 2, "W": 2, "ERROR": 0}),
    ("readers_writers", {"R": 3, "W": 2, "ERROR": 1}),
    ("token_ring", {"N": 3, "ERROR": 0}),
    ("token_ring", {"N": 3, "ERROR": 1}),
    ("token_ring", {"N": 4, "ERROR": 1}),
    ("counter_cycle", {"n": 1}),
    ("counter_cycle", {"n": 12, "RESET": 1, "EVERY": 5}),
    ("counter_cycle", {"n": 12, "RESET": 0, "EVERY": 5}),
]


def report(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    capman = _capman[0]
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)
    assert ok, line


_capman: list = [None]


@pytest.fixture(autouse=True)
def _grab_capture(request):
    _capman[0] = request.config.pluginmanager.getplugin("capturemanager")
    yield


def builtin_models():
    out = [(f"{name}{sorted(p.items())}", builtin_model(name, p)) for name, p in BUILTINS]
    for fname in sorted(os.listdir(MODELS)):
        out.append((fname, load_model(os.path.join(MODELS, fname))))
    return out


def model_truth(model) -> tuple[bool, set[bytes]]:
    """Oracle: (has cycle, set of accepting states lying on a reachable cycle)."""
    if isinstance(model, GraphSystem):
        ws = graph_cycle_witnesses(model.graph)
        return bool(ws), {encode_id(w) for w in ws}
    from oracles import brute_force_cycle

    order, index, edges = system_graph(model)
    acc = [index[s] for s in order if model.accepting(s)]
    init = [index[s] for s in model.initial_states()]
    ws = brute_force_cycle(len(order), init, acc, edges)
    return bool(ws), {order[i] for i in ws}


# -- shared corpus sweep (criteria 2, 4, 6) --------------------------------


@pytest.fixture(scope="module")
def sweep():
    cases = [(f"random-{s}", GraphSystem(random_graph(s))) for s in range(GRAPHS)]
    cases += builtin_models()
    rows = []
    t0 = time.perf_counter()
    for name, model in cases:
        truth, witnesses = model_truth(model)
        reach = set(reachable_states(model))
        reach_acc = sum(1 for s in reach if model.accepting(s))
        row = {
            "name": name, "truth": truth, "witnesses": witnesses, "reach_acc": reach_acc,
            "ndfs": baselines.ndfs_cycle(model), "seq": baselines.map_sequential(model),
            "dist": [], "faults": [],
        }
        for n in WORKERS:
            for seed in SEEDS:
                try:
                    v = run_distributed(model, n, seed, check=True)
                except ProtocolError as exc:
                    row["faults"].append((n, seed, str(exc)))
                    continue
                row["dist"].append((n, seed, v))
        rows.append(row)
    return rows, time.perf_counter() - t0


def test_criterion_1_fig2(fig2):
    t0 = time.perf_counter()
    problems = []
    seq = baselines.map_sequential(fig2)
    if not (seq.found and seq.witness == encode_id(2) and seq.iterations == 2
            and seq.excluded_per_iteration == [1]):
        problems.append(f"map_sequential gave {seq}")
    runs = 0
    for n in (1, 2, 4):
        for seed in range(20):
            excluded: list[bytes] = []

            def grab(workers):
                excluded.extend(e.key for w in workers for e in w.table if e.excluded)

            v = run_distributed(fig2, n, seed, check=True, inspect=grab)
            runs += 1
            if not (v.found and v.witness == encode_id(2) and v.iterations == 2
                    and v.excluded_per_iteration == [1] and excluded == [encode_id(4)]):
                problems.append(f"N={n} seed={seed}: {v.result} {v.witness} it={v.iterations} excl={excluded}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    report(1, not problems,
           f"{runs} distributed runs + map_sequential: witness 2, 2 iterations, only state 4 excluded "
           f"({elapsed:.2f}s)" if not problems else "; ".join(problems[:5]))


def test_criterion_2_oracle_equivalence(sweep):
    rows, elapsed = sweep
    bad = []
    runs = 0
    for r in rows:
        if r["ndfs"].found != r["truth"]:
            bad.append(f"{r['name']}: ndfs")
        if r["seq"].found != r["truth"]:
            bad.append(f"{r['name']}: map_sequential")
        for n, seed, v in r["dist"]:
            runs += 1
            if v.found != r["truth"]:
                bad.append(f"{r['name']} N={n} seed={seed}: verdict")
            elif v.found and v.witness not in r["witnesses"]:
                bad.append(f"{r['name']} N={n} seed={seed}: witness {v.witness.hex()} not on a cycle")
        for n, seed, _ in r["faults"]:
            bad.append(f"{r['name']} N={n} seed={seed}: protocol fault")
    report(2, not bad,
           f"{len(rows)} models, {runs} distributed runs, 0 disagreements ({elapsed:.1f}s)"
           if not bad else f"{len(bad)} disagreements: " + "; ".join(bad[:5]))


def test_criterion_3_reachability_invariance():
    models = builtin_models() + [(f"random-{s}", GraphSystem(random_graph(s))) for s in range(100)]
    bad = []
    runs = 0
    for name, model in models:
        ref = baselines.bfs_reach(model)
        for n in WORKERS:
            tables: list[set[bytes]] = []

            def grab(workers):
                tables.extend(set(w.table.keys()) for w in workers)
                for w in workers:
                    if any(owner(k, n) != w.id for k in w.table.keys()):
                        bad.append(f"{name} N={n}: worker {w.id} stores a foreign state")

            v = run_distributed(model, n, seed=0, reach_only=True, check=True, inspect=grab)
            runs += 1
            if (v.states, v.transitions) != (ref.states, ref.transitions):
                bad.append(f"{name} N={n}: {v.states}/{v.transitions} vs bfs {ref.states}/{ref.transitions}")
            union = set().union(*tables)
            if sum(map(len, tables)) != len(union) or len(union) != ref.states:
                bad.append(f"{name} N={n}: owned sets overlap or miss states")
            if sum(s.owned_states for s in v.per_worker) != v.states:
                bad.append(f"{name} N={n}: per-worker counts do not sum")
    report(3, not bad, f"{runs} reach-only runs equal BFS, owned sets disjoint and complete"
           if not bad else "; ".join(bad[:5]))


def test_criterion_4_termination_soundness(sweep):
    rows, _ = sweep
    faults = [(r["name"], n, s, msg) for r in rows for n, s, msg in r["faults"]]
    runs = sum(len(r["dist"]) for r in rows)
    # token-first schedules stress the detector further
    extra = 0
    for seed in range(200):
        model = GraphSystem(random_graph(seed))
        for n in (2, 4, 8):
            try:
                run_distributed(model, n, seed, policy="token-first", check=True)
            except ProtocolError as exc:
                faults.append((f"random-{seed}", n, seed, str(exc)))
            extra += 1
    report(4, not faults,
           f"{runs + extra} checked runs: every decision at true quiescence, "
           f"within 2 probes, summaries exact" if not faults else
           f"{len(faults)} violations: {faults[:3]}")


def test_criterion_5_codec():
    models = builtin_models() + [
        ("token_ring(9)", builtin_model("token_ring", {"N": 9, "ERROR": 1})),
        ("readers_writers(12,12)", builtin_model("readers_writers", {"R": 12, "W": 12, "ERROR": 0})),
        ("counter_cycle(100000)", builtin_model("counter_cycle", {"n": 100_000})),
        ("readers_writers.gcl(4,4)", load_gcl(_rw_source(4, 4, 1))),
    ] + [(f"random-{s}", GraphSystem(random_graph(s))) for s in range(50)]
    bad = []
    total = 0
    rng = random.Random(0)
    for name, model in models:
        states = reachable_states(model, cap=100_000)
        total += len(states)
        # decode in a fresh instance per state, then in a shuffled order on one instance
        fresh = {}
        probe = states if len(states) <= 2000 else rng.sample(states, 2000)
        for s in probe:
            fresh[s] = _rebuild(name, model).decode(s)
        order = states[:]
        rng.shuffle(order)
        for s in order + order[::-1]:
            value = model.decode(s)
            if model.encode(value) != s:
                bad.append(f"{name}: roundtrip {s.hex()}")
                break
            if s in fresh and fresh[s] != value:
                bad.append(f"{name}: context-dependent decode of {s.hex()}")
                break
    report(5, not bad, f"{total} reachable states over {len(models)} models round-trip in any order"
           if not bad else "; ".join(bad[:5]))


def _rw_source(r, w, e):
    from mapcheck.builtins import readers_writers_gcl

    return readers_writers_gcl(r, w, e)


def _rebuild(name, model):
    """An independent instance of the same model: no state shared with ``model``."""
    return copy.deepcopy(model)


def test_criterion_6_iteration_bound(sweep):
    rows, _ = sweep
    bad = []
    checked = 0
    trivial = 0
    for r in rows:
        bound = r["reach_acc"]
        runs = [("seq", r["seq"].iterations, r["seq"].excluded_per_iteration)]
        runs += [(f"N={n} seed={s}", v.iterations, v.excluded_per_iteration) for n, s, v in r["dist"]]
        for label, iters, excluded in runs:
            checked += 1
            if bound == 0:
                # nothing to exclude: exactly one iteration is needed to learn that
                trivial += 1
                if iters != 1:
                    bad.append(f"{r['name']} {label}: {iters} iterations with no accepting states")
                continue
            if iters > bound:
                bad.append(f"{r['name']} {label}: {iters} iterations > {bound} accepting")
            if len(excluded) != iters - 1 or any(x < 1 for x in excluded):
                bad.append(f"{r['name']} {label}: excluded per iteration {excluded}")
    report(6, not bad,
           f"{checked} runs: iterations <= reachable accepting states and every non-final "
           f"iteration excludes >= 1 ({trivial} runs without accepting states took 1 iteration)"
           if not bad else "; ".join(bad[:5]))


def _fingerprint(v) -> str:
    d = asdict(v)
    d.pop("wall_time")
    return json.dumps(d, sort_keys=True, default=lambda b: b.hex())


def test_criterion_7_determinism(fig2):
    cases = [("fig2", fig2)] + builtin_models() + [
        (f"random-{s}", GraphSystem(random_graph(s))) for s in range(0, 200, 10)]
    bad = []
    runs = 0
    for name, model in cases:
        for n in (1, 2, 4, 8):
            for seed in (0, 7):
                for reach_only in (False, True):
                    a = run_distributed(model, n, seed, reach_only=reach_only, record_log=True)
                    b = run_distributed(model, n, seed, reach_only=reach_only, record_log=True)
                    runs += 1
                    if _fingerprint(a) != _fingerprint(b):
                        bad.append(f"{name} N={n} seed={seed} reach={reach_only}")
    report(7, not bad, f"{runs} run pairs byte-identical (verdict, statistics, event log)"
           if not bad else "; ".join(bad[:5]))


def tcp_corpus() -> list[tuple[str, object]]:
    out = []
    seed = 0
    while len(out) < 10:
        g = random_graph(seed)
        m = GraphSystem(g, name=f"random-{seed}")
        if len(reachable_states(m)) >= 8:
            out.append((f"random-{seed}", m))
        seed += 1
    return out


@pytest.mark.tcp
def test_criterion_8_transport_transparency(tmp_path):
    bad = []
    tcp_wall = sim_wall = 0.0
    models = tcp_corpus()
    for name, model in models:
        path = tmp_path / f"{name}.graph"
        path.write_text(model.graph.to_text())
        for alg in ("map-dist", "reach-dist"):
            reach = alg == "reach-dist"
            sim = run_distributed(model, 2, seed=0, reach_only=reach)
            sim_wall += sim.wall_time
            hosts = tmp_path / f"{name}-{alg}.hosts"
            hosts.write_text("".join(f"{h}:{p}\n" for h, p in hosts_for(2)))
            t0 = time.perf_counter()
            out = run_processes(str(path), str(hosts), 2, extra=("--alg", alg))
            code, stdout, stderr = out[0]
            if code not in (0, 1) or out[1][0] != code:
                bad.append(f"{name} {alg}: exit codes {[o[0] for o in out]} {stderr.strip()[-200:]}")
                continue
            tcp_wall += _wall(stdout) or (time.perf_counter() - t0)
            f = result_fields(stdout)
            if f["RESULT"] != sim.result:
                bad.append(f"{name} {alg}: tcp {f['RESULT']} vs sim {sim.result}")
            if reach and (int(f["STATES"]), int(f["TRANSITIONS"])) != (sim.states, sim.transitions):
                bad.append(f"{name} {alg}: tcp {f['STATES']}/{f['TRANSITIONS']} vs sim "
                           f"{sim.states}/{sim.transitions}")
            if not reach and not sim.found and (int(f["STATES"]), int(f["ITER"])) != (sim.states, sim.iterations):
                bad.append(f"{name} {alg}: tcp {f['STATES']} states/{f['ITER']} it vs sim "
                           f"{sim.states}/{sim.iterations}")

    # batch sizes: identical verdicts, and identical schedule-independent statistics
    for name, model in models + builtin_models():
        ref = None
        for batch in (1, 64, 1024):
            r = run_distributed(model, 4, seed=1, batch_size=batch, reach_only=True, check=True)
            c = run_distributed(model, 4, seed=1, batch_size=batch, check=True)
            key = (r.states, r.transitions, r.messages, c.result,
                   c.iterations if not c.found else None, c.states if not c.found else None)
            if ref is None:
                ref = key
            elif key != ref:
                bad.append(f"{name} batch={batch}: {key} vs {ref}")

    soft = "loopback tcp slower than sim" if tcp_wall > sim_wall else "loopback tcp not slower than sim"
    report(8, not bad,
           f"{len(models)} models tcp(2 processes) == sim; batch sizes 1/64/1024 agree "
           f"[non-gating: {soft}, tcp {tcp_wall:.2f}s vs sim {sim_wall:.2f}s]"
           if not bad else "; ".join(bad[:5]))


def _wall(stdout: str) -> float | None:
    for ln in stdout.splitlines():
        if ln.startswith("wall time "):
            return float(ln.split()[2].rstrip("s"))
    return None


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
