from __future__ import annotations

from pathlib import Path

from .builtins import builtin_model, parse_builtin_spec
from .gcl import load_gcl
from .model import TransitionSystem, load_graph

FORMATS = ("gcl", "graph", "builtin")


def detect_format(spec: str) -> str:
    if spec.startswith("builtin:"):
        return "builtin"
    if spec.endswith(".gcl"):
        return "gcl"
    return "graph"


def load_model(spec: str, fmt: str | None = None) -> TransitionSystem:
    """Load ``builtin:name:K=V,...``, a ``.gcl`` file or an explicit-graph file."""
    fmt = fmt or detect_format(spec)
    if fmt == "builtin":
        name, params = parse_builtin_spec(spec.removeprefix("builtin:"))
        return builtin_model(name, params)
    path = Path(spec)
    text = path.read_text(encoding="utf-8")
    if fmt == "gcl":
        return load_gcl(text, name=path.stem)
    if fmt == "graph":
        return load_graph(text, name=path.stem)
    raise ValueError(f"unknown model format {fmt!r}")
