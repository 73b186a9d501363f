"""Benchmark matrix runner producing plot-ready CSV."""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass
from typing import Iterable

from .baselines import bfs_reach, dfs_reach, map_sequential, ndfs_cycle
from .loader import load_model
from .runner import run_distributed

ALGORITHMS = ("bfs", "dfs", "ndfs", "map-seq", "map-dist", "reach-dist")
SEQUENTIAL = ("bfs", "dfs", "ndfs", "map-seq")
COLUMNS = (
    "model", "algorithm", "workers", "seed", "status", "states", "transitions",
    "iterations", "messages", "wallTimeMs", "efficiency",
)
# columns that depend on the clock and are excluded from reproducibility checks
TIMING_COLUMNS = ("wallTimeMs", "efficiency")


@dataclass(frozen=True)
class Cell:
    model: str
    algorithm: str
    workers: int = 1
    seed: int = 0


def run_cell(cell: Cell, batch_size: int = 64, state_cap: int | None = None) -> dict[str, object]:
    row: dict[str, object] = {c: "" for c in COLUMNS}
    row.update(model=cell.model, algorithm=cell.algorithm, workers=cell.workers, seed=cell.seed)
    try:
        model = load_model(cell.model)
        t0 = time.perf_counter()
        alg = cell.algorithm
        if alg in ("bfs", "dfs"):
            r = (bfs_reach if alg == "bfs" else dfs_reach)(model, state_cap)
            row.update(states=r.states, transitions=r.transitions, iterations=1, messages=0)
        elif alg == "ndfs":
            v = ndfs_cycle(model, state_cap)
            row.update(states=v.states, iterations=0, messages=0)
        elif alg == "map-seq":
            v = map_sequential(model, state_cap)
            row.update(states=v.states, iterations=v.iterations, messages=0)
        elif alg in ("map-dist", "reach-dist"):
            v = run_distributed(
                model, cell.workers, cell.seed, batch_size=batch_size,
                reach_only=alg == "reach-dist",
            )
            row.update(states=v.states, transitions=v.transitions,
                       iterations=v.iterations, messages=v.messages)
        else:
            raise ValueError(f"unknown algorithm {alg!r}")
        row["wallTimeMs"] = f"{(time.perf_counter() - t0) * 1000:.3f}"
        if alg in ("ndfs", "map-seq", "map-dist"):
            row["status"] = "cycle" if v.found else "no-cycle"
        else:
            row["status"] = "ok"
    except Exception as exc:  # a failing cell must not stop the matrix
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def add_efficiency(rows: list[dict[str, object]]) -> None:
    """efficiency = T(dfs, 1) / (N * T(alg, N)), only where a single-node DFS row exists."""
    base: dict[str, float] = {}
    for r in rows:
        if r["algorithm"] == "dfs" and r["workers"] == 1 and r["wallTimeMs"] != "":
            base.setdefault(str(r["model"]), float(r["wallTimeMs"]))
    for r in rows:
        t_base = base.get(str(r["model"]))
        if t_base is None or r["wallTimeMs"] == "":
            continue
        t = float(r["wallTimeMs"])
        if t > 0:
            r["efficiency"] = f"{t_base / (int(r['workers']) * t):.4f}"


def expand(models: Iterable[str], algorithms: Iterable[str], workers: Iterable[int],
           seeds: Iterable[int]) -> list[Cell]:
    cells = []
    for m, a, n, s in itertools.product(models, algorithms, workers, seeds):
        if a in SEQUENTIAL:
            n = 1
        cell = Cell(m, a, n, s)
        if cell not in cells:
            cells.append(cell)
    return cells


def run_bench(cells: Iterable[Cell], batch_size: int = 64,
              state_cap: int | None = None) -> list[dict[str, object]]:
    rows = [run_cell(c, batch_size, state_cap) for c in cells]
    add_efficiency(rows)
    return rows


def to_csv(rows: list[dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
