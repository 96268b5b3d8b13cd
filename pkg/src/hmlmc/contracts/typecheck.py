"""Type checker: annotates expression trees and injects payability prologues.

The checker rebuilds the AST (nodes are frozen) with every expression's `ty`
slot filled, and prepends `require(value == 0)` to the body of every
non-payable procedure so the runtime and the encoder never need to consult
the `payable` flag again.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

from hmlmc.contracts.ast import (
    ADDRESS,
    BOOL,
    INT,
    Assign,
    Balance,
    BaseType,
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
    MapType,
    Null,
    Procedure,
    Require,
    Sender,
    Skip,
    Stmt,
    This,
    Transfer,
    TypedContract,
    Unop,
    Value,
    Var,
)
from hmlmc.diag import Diagnostic, FrontendError, Span


def typecheck_contract(decl: ContractDecl) -> TypedContract:
    checker = _Checker(decl)
    typed = checker.run()
    if checker.diagnostics:
        raise FrontendError(checker.diagnostics)
    return typed


class _Checker:
    def __init__(self, decl: ContractDecl):
        self.decl = decl
        self.diagnostics: list[Diagnostic] = []
        self.field_types = {f.name: f.ty for f in decl.fields}
        self._params: dict[str, BaseType] = {}

    def error(self, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic(message, span))

    def run(self) -> TypedContract:
        procedures = tuple(self._procedure(p) for p in self.decl.procedures)
        return TypedContract(
            name=self.decl.name,
            fields=self.decl.fields,
            procedures=procedures,
            decl=self.decl,
        )

    def _procedure(self, proc: Procedure) -> Procedure:
        self._params = {}
        for p in proc.params:
            if p.name in self.field_types:
                self.error(f"parameter `{p.name}` shadows a field", p.span)
            self._params[p.name] = p.ty
        body = tuple(self._stmt(s) for s in proc.body)
        if not proc.payable:
            guard = Require(
                cond=Binop(op="==", left=Value(span=proc.span, ty=INT),
                           right=IntLit(value=0, span=proc.span, ty=INT),
                           span=proc.span, ty=BOOL),
                span=proc.span,
            )
            body = (guard, *body)
        return replace(proc, body=body)

    # --- statements ---------------------------------------------------------

    def _stmt(self, stmt: Stmt) -> Stmt:
        if isinstance(stmt, Skip):
            return stmt
        if isinstance(stmt, Require):
            return replace(stmt, cond=self._expr(stmt.cond, BOOL))
        if isinstance(stmt, Assign):
            expr = self._expr(stmt.expr)
            ty = self.field_types.get(stmt.name)
            if stmt.name in self._params:
                self.error(f"cannot assign to parameter `{stmt.name}`",
                           stmt.span)
            elif ty is None:
                self.error(f"assignment to unknown field `{stmt.name}`",
                           stmt.span)
            elif isinstance(ty, MapType):
                self.error(f"map field `{stmt.name}` must be indexed in an "
                           f"assignment", stmt.span)
            else:
                self._require_type(expr, ty, stmt.span)
            return replace(stmt, expr=expr)
        if isinstance(stmt, MapAssign):
            key = self._expr(stmt.key, ADDRESS)
            expr = self._expr(stmt.expr)
            ty = self.field_types.get(stmt.name)
            if not isinstance(ty, MapType):
                self.error(f"`{stmt.name}` is not a map field", stmt.span)
            else:
                self._require_type(expr, ty.value, stmt.span)
            return replace(stmt, key=key, expr=expr)
        if isinstance(stmt, Transfer):
            return replace(stmt, to=self._expr(stmt.to, ADDRESS),
                           amount=self._expr(stmt.amount, INT))
        if isinstance(stmt, If):
            return replace(
                stmt,
                cond=self._expr(stmt.cond, BOOL),
                then=tuple(self._stmt(s) for s in stmt.then),
                els=tuple(self._stmt(s) for s in stmt.els),
            )
        if isinstance(stmt, Call):
            # Callee resolution happens at execution time; here we only insist
            # that arguments and the attached value are well-typed.
            args = tuple(self._expr(a) for a in stmt.args)
            return replace(stmt, args=args,
                           value=self._expr(stmt.value, INT))
        raise AssertionError(f"unhandled statement {stmt!r}")

    # --- expressions --------------------------------------------------------

    def _require_type(self, expr: Expr, expected: BaseType,
                      span: Span) -> None:
        if expr.ty is not None and expr.ty != expected:
            self.error(f"expected {expected}, found {expr.ty}",
                       expr.span if expr.span.line else span)

    def _expr(self, expr: Expr, expected: Optional[BaseType] = None) -> Expr:
        typed = self._infer(expr)
        if expected is not None:
            self._require_type(typed, expected, expr.span)
        return typed

    def _infer(self, expr: Expr) -> Expr:
        if isinstance(expr, IntLit):
            return replace(expr, ty=INT)
        if isinstance(expr, BoolLit):
            return replace(expr, ty=BOOL)
        if isinstance(expr, Null):
            return replace(expr, ty=ADDRESS)
        if isinstance(expr, (Sender, This)):
            return replace(expr, ty=ADDRESS)
        if isinstance(expr, (Value, BlockNumber)):
            return replace(expr, ty=INT)
        if isinstance(expr, Balance):
            owner = None
            if expr.owner is not None:
                owner = self._expr(expr.owner, ADDRESS)
            return replace(expr, owner=owner, ty=INT)
        if isinstance(expr, Var):
            if expr.name in self._params:
                return replace(expr, kind="param", ty=self._params[expr.name])
            ty = self.field_types.get(expr.name)
            if ty is None:
                self.error(f"unknown name `{expr.name}`", expr.span)
                return expr
            if isinstance(ty, MapType):
                self.error(f"map field `{expr.name}` must be indexed",
                           expr.span)
                return expr
            return replace(expr, kind="field", ty=ty)
        if isinstance(expr, MapRead):
            key = self._expr(expr.key, ADDRESS)
            ty = self.field_types.get(expr.name)
            if not isinstance(ty, MapType):
                self.error(f"`{expr.name}` is not a map field", expr.span)
                return replace(expr, key=key)
            return replace(expr, key=key, ty=ty.value)
        if isinstance(expr, Unop):
            if expr.op == "!":
                operand = self._expr(expr.operand, BOOL)
                return replace(expr, operand=operand, ty=BOOL)
            operand = self._expr(expr.operand, INT)
            return replace(expr, operand=operand, ty=INT)
        if isinstance(expr, Binop):
            return self._binop(expr)
        raise AssertionError(f"unhandled expression {expr!r}")

    def _binop(self, expr: Binop) -> Binop:
        op = expr.op
        if op in ("+", "-", "*"):
            left = self._expr(expr.left, INT)
            right = self._expr(expr.right, INT)
            if op == "*" and not (_is_literal(left) or _is_literal(right)):
                self.error("multiplication must have a literal operand",
                           expr.span)
            return replace(expr, left=left, right=right, ty=INT)
        if op in ("<", "<=", ">", ">="):
            left = self._expr(expr.left, INT)
            right = self._expr(expr.right, INT)
            return replace(expr, left=left, right=right, ty=BOOL)
        if op in ("&&", "||"):
            left = self._expr(expr.left, BOOL)
            right = self._expr(expr.right, BOOL)
            return replace(expr, left=left, right=right, ty=BOOL)
        if op in ("==", "!="):
            left = self._expr(expr.left)
            right = self._expr(expr.right)
            if (left.ty is not None and right.ty is not None
                    and left.ty != right.ty):
                self.error(f"cannot compare {left.ty} with {right.ty}",
                           expr.span)
            return replace(expr, left=left, right=right, ty=BOOL)
        raise AssertionError(f"unhandled operator {op!r}")


def _is_literal(expr: Expr) -> bool:
    if isinstance(expr, IntLit):
        return True
    return isinstance(expr, Unop) and expr.op == "-" and isinstance(
        expr.operand, IntLit)
