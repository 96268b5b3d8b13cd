"""Canonical printer for contract ASTs.

`parse_contract(pretty(parse_contract(src)))` yields an AST equal to the
original parse (spans are ignored by node equality), which the tests use as a
round-trip property.
"""
from __future__ import annotations

from hmlmc.contracts.ast import (
    Assign,
    Balance,
    Binop,
    BlockNumber,
    BoolLit,
    Call,
    ContractDecl,
    Expr,
    If,
    IntLit,
    MapAssign,
    MapRead,
    Null,
    Procedure,
    Require,
    Sender,
    Skip,
    Stmt,
    This,
    Transfer,
    Unop,
    Value,
    Var,
)

_INDENT = "    "

_BINOP_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8


def pretty(decl: ContractDecl) -> str:
    lines = [f"contract {decl.name} {{"]
    for f in decl.fields:
        lines.append(f"{_INDENT}{f.ty} {f.name};")
    for proc in decl.procedures:
        lines.append("")
        lines.extend(_proc_lines(proc))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _proc_lines(proc: Procedure) -> list[str]:
    params = ", ".join(f"{p.ty} {p.name}" for p in proc.params)
    head = ("constructor" if proc.name == "constructor"
            else f"function {proc.name}")
    payable = " payable" if proc.payable else ""
    lines = [f"{_INDENT}{head}({params}){payable} {{"]
    for stmt in proc.body:
        lines.extend(_stmt_lines(stmt, 2))
    lines.append(f"{_INDENT}}}")
    return lines


def _stmt_lines(stmt: Stmt, depth: int) -> list[str]:
    pad = _INDENT * depth
    if isinstance(stmt, Skip):
        return [f"{pad};"]
    if isinstance(stmt, Require):
        return [f"{pad}require({_expr(stmt.cond)});"]
    if isinstance(stmt, Assign):
        return [f"{pad}{stmt.name} = {_expr(stmt.expr)};"]
    if isinstance(stmt, MapAssign):
        return [f"{pad}{stmt.name}[{_expr(stmt.key)}] = {_expr(stmt.expr)};"]
    if isinstance(stmt, Transfer):
        to = _expr(stmt.to, _ATOM_PREC)
        return [f"{pad}{to}.transfer({_expr(stmt.amount)});"]
    if isinstance(stmt, Call):
        args = ", ".join(_expr(a) for a in stmt.args)
        value = ""
        if not (isinstance(stmt.value, IntLit) and stmt.value.value == 0):
            value = f" value {_expr(stmt.value)}"
        return [f"{pad}{stmt.contract}.{stmt.proc}({args}){value};"]
    if isinstance(stmt, If):
        lines = [f"{pad}if ({_expr(stmt.cond)}) {{"]
        for s in stmt.then:
            lines.extend(_stmt_lines(s, depth + 1))
        if stmt.els:
            lines.append(f"{pad}}} else {{")
            for s in stmt.els:
                lines.extend(_stmt_lines(s, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise AssertionError(f"unhandled statement {stmt!r}")


def _expr(expr: Expr, min_prec: int = 0) -> str:
    text, prec = _render(expr)
    if prec < min_prec:
        return f"({text})"
    return text


def _render(expr: Expr) -> tuple[str, int]:
    if isinstance(expr, IntLit):
        return str(expr.value), _ATOM_PREC
    if isinstance(expr, BoolLit):
        return ("true" if expr.value else "false"), _ATOM_PREC
    if isinstance(expr, Null):
        return "null", _ATOM_PREC
    if isinstance(expr, Sender):
        return "sender", _ATOM_PREC
    if isinstance(expr, Value):
        return "value", _ATOM_PREC
    if isinstance(expr, This):
        return "this", _ATOM_PREC
    if isinstance(expr, BlockNumber):
        return "block.number", _ATOM_PREC
    if isinstance(expr, Var):
        return expr.name, _ATOM_PREC
    if isinstance(expr, Balance):
        if expr.owner is None:
            return "balance", _ATOM_PREC
        return f"balance[{_expr(expr.owner)}]", _ATOM_PREC
    if isinstance(expr, MapRead):
        return f"{expr.name}[{_expr(expr.key)}]", _ATOM_PREC
    if isinstance(expr, Unop):
        operand = _expr(expr.operand, _UNARY_PREC)
        return f"{expr.op}{operand}", _UNARY_PREC
    if isinstance(expr, Binop):
        prec = _BINOP_PREC[expr.op]
        left = _expr(expr.left, prec)
        right = _expr(expr.right, prec + 1)
        return f"{left} {expr.op} {right}", prec
    raise AssertionError(f"unhandled expression {expr!r}")
