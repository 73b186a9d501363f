"""Sweep schedules over the random-graph corpus and compare against nested DFS.

Prints one summary line per worker count and any disagreement found.

    python3 scripts/seed_sweep.py --graphs 500 --seeds 20 --policy token-first
"""

from __future__ import annotations

import argparse
import sys
import time

from mapcheck import baselines
from mapcheck.corpus import random_system
from mapcheck.distmap import ProtocolError
from mapcheck.runner import run_distributed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=200)
    ap.add_argument("--start", type=int, default=0, help="first corpus seed")
    ap.add_argument("--seeds", type=int, default=10, help="schedules per (graph, N)")
    ap.add_argument("--workers", default="1,2,4,8")
    ap.add_argument("--policy", choices=("random", "token-first"), default="random")
    args = ap.parse_args()

    models = [random_system(s) for s in range(args.start, args.start + args.graphs)]
    truth = [baselines.ndfs_cycle(m).found for m in models]
    bad = 0
    for n in (int(x) for x in args.workers.split(",")):
        t0 = time.perf_counter()
        runs = iters = 0
        for m, expect in zip(models, truth):
            for seed in range(args.seeds):
                try:
                    v = run_distributed(m, n, seed, policy=args.policy, check=True)
                except ProtocolError as exc:
                    print(f"FAULT {m.name} N={n} seed={seed}: {exc}")
                    bad += 1
                    continue
                runs += 1
                iters += v.iterations
                if v.found != expect:
                    print(f"MISMATCH {m.name} N={n} seed={seed}: map-dist {v.found}, ndfs {expect}")
                    bad += 1
        dt = time.perf_counter() - t0
        print(f"N={n}: {runs} runs, mean iterations {iters / max(runs, 1):.2f}, {dt:.1f}s")
    print("disagreements:", bad)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
