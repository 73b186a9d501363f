"""Scaling matrix over the built-in models; writes a plot-ready CSV.

    python3 scripts/bench_scaling.py --out results/scaling.csv
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from mapcheck import bench

DEFAULT_MODELS = [
    "builtin:readers_writers:R=4,W=4,ERROR=0",
    "builtin:readers_writers:R=4,W=4,ERROR=1",
    "builtin:token_ring:N=6,ERROR=0",
    "builtin:counter_cycle:n=2000,RESET=1,EVERY=7",
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", action="append", help="model spec (repeatable)")
    ap.add_argument("--alg", default="dfs,bfs,ndfs,map-seq,map-dist,reach-dist")
    ap.add_argument("--workers", default="1,2,4,8")
    ap.add_argument("--seeds", default="0")
    ap.add_argument("--batch-size", type=int, default=64)
    ap.add_argument("--out")
    args = ap.parse_args()

    cells = bench.expand(
        args.model or DEFAULT_MODELS,
        args.alg.split(","),
        [int(x) for x in args.workers.split(",")],
        [int(x) for x in args.seeds.split(",")],
    )
    rows = bench.run_bench(cells, args.batch_size)
    text = bench.to_csv(rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    failed = [r for r in rows if str(r["status"]).startswith("error")]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
