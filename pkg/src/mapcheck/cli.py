"""Command-line entry point.

Exit codes: 0 no cycle / reachability done, 1 accepting cycle found,
2 usage or configuration error, 3 runtime fault.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import bench as benchmod
from .baselines import StateCapExceeded, bfs_reach, dfs_reach, map_sequential, ndfs_cycle
from .builtins import ParameterError, UnknownModel
from .distmap import ProtocolError
from .gcl import GclError, format_model, parse
from .loader import FORMATS, load_model
from .model import ModelError, reachable_states
from .runner import Verdict, run_distributed, run_tcp_worker
from .transport.sim import SimDeadlock
from .transport.tcp import TransportError, parse_hosts, worker_index

EXIT_OK, EXIT_CYCLE, EXIT_USAGE, EXIT_FAULT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def result_line(
    result: str, states: int, iterations: int, witness: bytes | None = None,
    transitions: int | None = None, extra: dict[str, object] | None = None,
) -> str:
    parts = [f"RESULT={result}"]
    if witness is not None:
        parts.append(f"witness={witness.hex()}")
    parts.append(f"STATES={states}")
    if transitions is not None:
        parts.append(f"TRANSITIONS={transitions}")
    parts.append(f"ITER={iterations}")
    for k, v in (extra or {}).items():
        parts.append(f"{k}={v}")
    return " ".join(parts)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mapcheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run one algorithm on one model")
    c.add_argument("--model", required=True,
                   help="model file, or builtin:NAME[:K=V,...]")
    c.add_argument("--format", choices=FORMATS)
    c.add_argument("--alg", default="map-dist", choices=benchmod.ALGORITHMS)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--transport", choices=("sim", "tcp"), default="sim")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--state-cap", type=int)
    c.add_argument("--batch-size", type=int, default=64)
    c.add_argument("--hosts", help="host list file for --transport tcp")
    c.add_argument("--worker-index", type=int,
                   help="this process's index in the host list (env MAPCHECK_WORKER_INDEX wins)")
    c.add_argument("--connect-timeout", type=float, default=30.0)
    c.add_argument("--watchdog", type=float, default=60.0)
    c.add_argument("--out", help="write the verdict as JSON to this path")

    b = sub.add_parser("bench", help="run a benchmark matrix and write CSV")
    b.add_argument("--model", action="append", required=True)
    b.add_argument("--alg", default="reach-dist",
                   help="comma-separated algorithms: " + ",".join(benchmod.ALGORITHMS))
    b.add_argument("--workers", type=_int_list, default=[1])
    b.add_argument("--seeds", type=_int_list, default=[0])
    b.add_argument("--batch-size", type=int, default=64)
    b.add_argument("--state-cap", type=int)
    b.add_argument("--out", help="CSV path (default: stdout)")

    pa = sub.add_parser("parse", help="parse a GCL file; print its AST and state count")
    pa.add_argument("file")
    pa.add_argument("--no-count", action="store_true", help="skip state enumeration")

    f = sub.add_parser("fmt", help="pretty-print a GCL file")
    f.add_argument("file")
    f.add_argument("--in-place", action="store_true")
    return p


def _verdict_json(v: Verdict, algorithm: str) -> dict[str, object]:
    d = asdict(v)
    d.pop("event_log", None)
    d["witness"] = v.witness.hex() if v.witness is not None else None
    d["algorithm"] = algorithm
    d["result"] = v.result
    return d


def cmd_check(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if not 1 <= args.batch_size <= 0xFFFF:
        raise UsageError("--batch-size must be in 1..65535")
    if args.transport == "tcp":
        if args.alg not in ("map-dist", "reach-dist"):
            raise UsageError("--transport tcp only applies to map-dist and reach-dist")
        if not args.hosts:
            raise UsageError("--transport tcp requires --hosts")
    model = load_model(args.model, args.format)
    alg = args.alg
    t0 = time.perf_counter()
    report: dict[str, object]

    if alg in ("bfs", "dfs"):
        r = (bfs_reach if alg == "bfs" else dfs_reach)(model, args.state_cap)
        print(f"{alg}: {r.states} states, {r.transitions} transitions, peak frontier {r.peak_frontier}")
        print(result_line("REACH", r.states, 1, transitions=r.transitions))
        report = {"algorithm": alg, "result": "REACH", **asdict(r)}
        code = EXIT_OK
    elif alg in ("ndfs", "map-seq"):
        v = (ndfs_cycle if alg == "ndfs" else map_sequential)(model, args.state_cap)
        if v.found:
            print(f"{alg}: accepting cycle through state {v.witness.hex()}")
        else:
            print(f"{alg}: no accepting cycle")
        print(result_line("CYCLE" if v.found else "NO_CYCLE", v.states, v.iterations, v.witness))
        report = {"algorithm": alg, "result": "CYCLE" if v.found else "NO_CYCLE", **asdict(v)}
        report["witness"] = v.witness.hex() if v.witness else None
        code = EXIT_CYCLE if v.found else EXIT_OK
    else:
        reach_only = alg == "reach-dist"
        extra: dict[str, object] = {}
        if args.transport == "sim":
            v = run_distributed(model, args.workers, args.seed, args.batch_size, reach_only)
        else:
            hosts = parse_hosts(Path(args.hosts).read_text())
            index = worker_index(args.worker_index)
            if index is None:
                raise UsageError("--transport tcp requires --worker-index or MAPCHECK_WORKER_INDEX")
            if not 0 <= index < len(hosts):
                raise UsageError(f"worker index {index} outside host list of {len(hosts)}")
            v = run_tcp_worker(model, hosts, index, args.batch_size, reach_only,
                               args.connect_timeout, args.watchdog)
            if index != 0:
                extra["WORKER"] = index
        if reach_only:
            print(f"{alg}: {v.states} states, {v.transitions} transitions")
            print(result_line("REACH", v.states, v.iterations, transitions=v.transitions, extra=extra))
        else:
            if v.found:
                print(f"{alg}: accepting cycle through state {v.witness.hex()} "
                      f"in iteration {v.iterations}")
            else:
                print(f"{alg}: no accepting cycle after {v.iterations} iteration(s)")
            print(result_line(v.result, v.states, v.iterations, v.witness, extra=extra))
        for s in v.per_worker:
            print(f"  worker {s.worker_id}: owned={s.owned_states} sent={s.states_sent} "
                  f"received={s.states_received}")
        report = _verdict_json(v, alg)
        code = EXIT_CYCLE if v.found else EXIT_OK

    wall = time.perf_counter() - t0
    print(f"wall time {wall:.3f}s")
    if args.out:
        report["wallTime"] = wall
        Path(args.out).write_text(json.dumps(report, indent=2, default=str) + "\n")
    return code


def cmd_bench(args: argparse.Namespace) -> int:
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    bad = [a for a in algs if a not in benchmod.ALGORITHMS]
    if bad:
        raise UsageError(f"unknown algorithm(s): {', '.join(bad)}")
    cells = benchmod.expand(args.model, algs, args.workers, args.seeds)
    rows = benchmod.run_bench(cells, args.batch_size, args.state_cap)
    text = benchmod.to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_parse(args: argparse.Namespace) -> int:
    ast = parse(Path(args.file).read_text(encoding="utf-8"))
    print(repr(ast))
    if not args.no_count:
        from .gcl import compile_model

        n = len(reachable_states(compile_model(ast)))
        print(f"STATES={n}")
    return EXIT_OK


def cmd_fmt(args: argparse.Namespace) -> int:
    path = Path(args.file)
    text = format_model(parse(path.read_text(encoding="utf-8")))
    if args.in_place:
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "bench": cmd_bench, "parse": cmd_parse, "fmt": cmd_fmt}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, UnknownModel, ParameterError, GclError, ModelError,
            FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"mapcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateCapExceeded as exc:
        print(f"mapcheck: {exc}; partial: {exc.partial}", file=sys.stderr)
        return EXIT_FAULT
    except (ProtocolError, TransportError, SimDeadlock, MemoryError, OSError) as exc:
        print(f"mapcheck: fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
