from __future__ import annotations

from .syntax import PRECEDENCE, UNARY_PRECEDENCE, Binary, Expr, GclModel, Num, Unary, Var


def _prec(e: Expr) -> int:
    return PRECEDENCE[e.op] if isinstance(e, Binary) else UNARY_PRECEDENCE + 1


def format_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = format_expr(e.operand)
        if isinstance(e.operand, Binary):
            inner = f"({inner})"
        return e.op + inner
    prec = PRECEDENCE[e.op]
    left = format_expr(e.left)
    right = format_expr(e.right)
    if _prec(e.left) < prec:
        left = f"({left})"
    if _prec(e.right) <= prec:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def format_model(model: GclModel) -> str:
    lines = [f"var {v.name}: {v.lower}..{v.upper} = {v.initial};" for v in model.variables]
    for p in model.processes:
        if not p.commands:
            lines.append(f"proc {p.name} {{ }}")
            continue
        lines.append(f"proc {p.name} {{")
        for i, c in enumerate(p.commands):
            upd = ", ".join(f"{u.target} := {format_expr(u.value)}" for u in c.updates)
            sep = ";" if i < len(p.commands) - 1 else ""
            lines.append(f"    {format_expr(c.guard)} -> {upd}{sep}")
        lines.append("}")
    if model.accept is not None:
        lines.append(f"accept {format_expr(model.accept)}")
    return "\n".join(lines) + "\n"
