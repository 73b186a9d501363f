"""Guarded-command modelling language: parse, pretty-print, compile."""

from .compiler import GclSystem, compile_model
from .parser import parse, parse_expr, tokenize
from .printer import format_expr, format_model
from .syntax import GclError, GclModel, LexError, ParseError, SemanticError


def load_gcl(text: str, name: str = "gcl") -> GclSystem:
    return compile_model(parse(text), name)


__all__ = [
    "GclError",
    "GclModel",
    "GclSystem",
    "LexError",
    "ParseError",
    "SemanticError",
    "compile_model",
    "format_expr",
    "format_model",
    "load_gcl",
    "parse",
    "parse_expr",
    "tokenize",
]
