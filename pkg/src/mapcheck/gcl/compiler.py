"""Compile a checked GCL model into a byte-level transition system.

Each variable is stored as its offset from the lower bound in the fewest
big-endian bytes that hold the range; variables are concatenated in
declaration order. A command is disabled when its guard is false, when any
expression it evaluates divides by zero, or when an update leaves the
variable's range. Updates within one command are simultaneous.
"""

from __future__ import annotations

from typing import Callable

from ..model import MalformedState, TransitionSystem
from ..store import fnv1a_64
from .parser import check
from .printer import format_model
from .syntax import Binary, Expr, GclModel, Num, Unary, Var

Values = tuple[int, ...]
Eval = Callable[[Values], int]


class Disabled(Exception):
    """Division or modulo by zero while evaluating a command."""


def _div(a: int, b: int) -> int:
    if b == 0:
        raise Disabled
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod(a: int, b: int) -> int:
    return a - b * _div(a, b)


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
}


def compile_expr(e: Expr, index: dict[str, int]) -> Eval:
    """Turn an expression into a closure over the tuple of variable values."""
    if isinstance(e, Num):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        i = index[e.name]
        return lambda env: env[i]
    if isinstance(e, Unary):
        f = compile_expr(e.operand, index)
        if e.op == "-":
            return lambda env: -f(env)
        return lambda env: int(not f(env))
    assert isinstance(e, Binary)
    lhs = compile_expr(e.left, index)
    rhs = compile_expr(e.right, index)
    if e.op == "&&":
        return lambda env: int(bool(lhs(env)) and bool(rhs(env)))
    if e.op == "||":
        return lambda env: int(bool(lhs(env)) or bool(rhs(env)))
    op = _ARITH[e.op]
    return lambda env: op(lhs(env), rhs(env))


def _width(span: int) -> int:
    return max(1, (span.bit_length() + 7) // 8)


class GclSystem(TransitionSystem):
    def __init__(self, model: GclModel, name: str = "gcl") -> None:
        self.model = model
        self.name = name
        index = {v.name: i for i, v in enumerate(model.variables)}
        self.names = tuple(index)
        self.lower = tuple(v.lower for v in model.variables)
        self.upper = tuple(v.upper for v in model.variables)
        self.widths = tuple(_width(v.upper - v.lower) for v in model.variables)
        self.state_width = sum(self.widths)
        self._initial = self.encode(tuple(v.initial for v in model.variables))
        # (guard, ((var index, value fn), ...)) in process then command order
        self._commands: list[tuple[Eval, tuple[tuple[int, Eval], ...]]] = []
        for proc in model.processes:
            for cmd in proc.commands:
                updates = tuple((index[u.target], compile_expr(u.value, index)) for u in cmd.updates)
                self._commands.append((compile_expr(cmd.guard, index), updates))
        self._accept = compile_expr(model.accept, index) if model.accept is not None else None

    def initial_states(self) -> list[bytes]:
        return [self._initial]

    def successors(self, state: bytes) -> list[bytes]:
        env = self.decode(state)
        lower, upper = self.lower, self.upper
        out: dict[bytes, None] = {}
        for guard, updates in self._commands:
            try:
                if not guard(env):
                    continue
                new = list(env)
                for i, fn in updates:
                    new[i] = fn(env)
            except Disabled:
                continue
            if all(lower[i] <= new[i] <= upper[i] for i, _ in updates):
                out.setdefault(self.encode(tuple(new)), None)
        return list(out)

    def accepting(self, state: bytes) -> bool:
        if self._accept is None:
            return False
        try:
            return bool(self._accept(self.decode(state)))
        except Disabled:
            return False

    def encode(self, value: Values) -> bytes:
        if len(value) != len(self.widths):
            raise ValueError(f"expected {len(self.widths)} values, got {len(value)}")
        parts = []
        for v, lo, hi, w in zip(value, self.lower, self.upper, self.widths):
            if not lo <= v <= hi:
                raise ValueError(f"value {v} outside {lo}..{hi}")
            parts.append((v - lo).to_bytes(w, "big"))
        return b"".join(parts)

    def decode(self, state: bytes) -> Values:
        self.check_width(state)
        out = []
        pos = 0
        for name, lo, hi, w in zip(self.names, self.lower, self.upper, self.widths):
            off = int.from_bytes(state[pos : pos + w], "big")
            if off > hi - lo:
                raise MalformedState(f"{name}={lo + off} outside {lo}..{hi}")
            out.append(lo + off)
            pos += w
        return tuple(out)

    def describe(self, state: bytes) -> dict[str, int]:
        return dict(zip(self.names, self.decode(state)))

    @property
    def fingerprint(self) -> str:
        return f"gcl:{fnv1a_64(format_model(self.model).encode()):016x}"


def compile_model(model: GclModel, name: str = "gcl") -> GclSystem:
    check(model)
    return GclSystem(model, name)
