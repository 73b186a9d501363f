"""Lexer and recursive-descent parser for GCL source."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    PRECEDENCE,
    Binary,
    Command,
    Expr,
    GclModel,
    LexError,
    Num,
    ParseError,
    Process,
    SemanticError,
    Unary,
    Update,
    Var,
    VarDecl,
    expr_vars,
)

KEYWORDS = {"var", "proc", "accept"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|:=|\.\.|==|!=|<=|>=|&&|\|\||[-+*/%<>!(){};,:=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, keyword, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise LexError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, word, line, i - line_start + 1))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "keyword")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def error(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{message}, found {found}", t.line, t.col)

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected identifier")
        return self.advance()

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            self.error("expected integer")
        value = int(self.advance().text)
        return -value if neg else value

    def model(self) -> GclModel:
        start = self.tok
        variables = []
        while self.at("var"):
            variables.append(self.var_decl())
        processes = []
        while self.at("proc"):
            processes.append(self.process())
        accept = None
        if self.at("accept"):
            self.advance()
            accept = self.expr()
            if self.at(";"):
                self.advance()
        if self.tok.kind != "eof":
            self.error("expected 'var', 'proc', 'accept' or end of input")
        return GclModel(tuple(variables), tuple(processes), accept, pos=(start.line, start.col))

    def var_decl(self) -> VarDecl:
        kw = self.expect("var")
        name = self.ident()
        self.expect(":")
        lower = self.integer()
        self.expect("..")
        upper = self.integer()
        self.expect("=")
        initial = self.integer()
        self.expect(";")
        return VarDecl(name.text, lower, upper, initial, pos=(kw.line, kw.col))

    def process(self) -> Process:
        kw = self.expect("proc")
        name = self.ident()
        self.expect("{")
        commands = []
        while not self.at("}"):
            commands.append(self.command())
            if self.at(";"):
                self.advance()
            elif not self.at("}"):
                self.error("expected ';' or '}'")
        self.expect("}")
        if self.at(";"):
            self.advance()
        return Process(name.text, tuple(commands), pos=(kw.line, kw.col))

    def command(self) -> Command:
        start = self.tok
        guard = self.expr()
        self.expect("->")
        updates = [self.update()]
        while self.at(","):
            self.advance()
            updates.append(self.update())
        return Command(guard, tuple(updates), pos=(start.line, start.col))

    def update(self) -> Update:
        name = self.ident()
        self.expect(":=")
        return Update(name.text, self.expr(), pos=(name.line, name.col))

    def expr(self, min_prec: int = 1) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and PRECEDENCE.get(self.tok.text, 0) >= min_prec:
            op = self.advance()
            right = self.expr(PRECEDENCE[op.text] + 1)
            left = Binary(op.text, left, right, pos=(op.line, op.col))
        return left

    def unary(self) -> Expr:
        t = self.tok
        if self.at("-") or self.at("!"):
            self.advance()
            return Unary(t.text, self.unary(), pos=(t.line, t.col))
        if t.kind == "int":
            self.advance()
            return Num(int(t.text), pos=(t.line, t.col))
        if t.kind == "ident":
            self.advance()
            return Var(t.text, pos=(t.line, t.col))
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        self.error("expected expression")


def check(model: GclModel) -> None:
    """Semantic checks: declarations, bounds, and variable references."""
    declared: dict[str, VarDecl] = {}
    for v in model.variables:
        if v.name in declared:
            raise SemanticError(f"variable {v.name!r} declared twice", *v.pos)
        if v.lower > v.upper:
            raise SemanticError(f"variable {v.name!r} has empty range {v.lower}..{v.upper}", *v.pos)
        if not v.lower <= v.initial <= v.upper:
            raise SemanticError(
                f"initial value {v.initial} of {v.name!r} outside {v.lower}..{v.upper}", *v.pos
            )
        declared[v.name] = v

    def refs(expr: Expr) -> None:
        for ref in expr_vars(expr):
            if ref.name not in declared:
                raise SemanticError(f"undeclared variable {ref.name!r}", *ref.pos)

    names = set()
    for p in model.processes:
        if p.name in names:
            raise SemanticError(f"process {p.name!r} declared twice", *p.pos)
        names.add(p.name)
        for c in p.commands:
            refs(c.guard)
            targets = set()
            for u in c.updates:
                if u.target not in declared:
                    raise SemanticError(f"undeclared variable {u.target!r}", *u.pos)
                if u.target in targets:
                    raise SemanticError(f"{u.target!r} assigned twice in one command", *u.pos)
                targets.add(u.target)
                refs(u.value)
    if model.accept is not None:
        refs(model.accept)


def parse(text: str) -> GclModel:
    """Parse and semantically check GCL source."""
    model = _Parser(tokenize(text)).model()
    check(model)
    return model


def parse_expr(text: str) -> Expr:
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.tok.kind != "eof":
        p.error("trailing input after expression")
    return e
