"""AST for the guarded-command language.

Source positions are carried on every node but excluded from equality, so a
reparsed pretty-print compares equal to the original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple[int, int]
NOPOS: Pos = (0, 0)


class GclError(Exception):
    kind = "error"

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {self.kind}: {message}")
        self.message = message
        self.line = line
        self.column = column


class LexError(GclError):
    kind = "lexical error"


class ParseError(GclError):
    kind = "syntax error"


class SemanticError(GclError):
    kind = "semantic error"


@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Expr = Union[Num, Var, Unary, Binary]

# binding strength of binary operators; all are left-associative
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
UNARY_PRECEDENCE = 6


@dataclass(frozen=True)
class Update:
    target: str
    value: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Command:
    guard: Expr
    updates: tuple[Update, ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Process:
    name: str
    commands: tuple[Command, ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    lower: int
    upper: int
    initial: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class GclModel:
    variables: tuple[VarDecl, ...]
    processes: tuple[Process, ...]
    accept: Expr | None = None
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


def expr_vars(expr: Expr):
    """Yield every Var node in ``expr``."""
    if isinstance(expr, Var):
        yield expr
    elif isinstance(expr, Unary):
        yield from expr_vars(expr.operand)
    elif isinstance(expr, Binary):
        yield from expr_vars(expr.left)
        yield from expr_vars(expr.right)
