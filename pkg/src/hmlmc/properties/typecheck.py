"""Depth-typed checker for property formulas.

Judgment: a formula is checked at a modal-nesting depth n (0 at the root,
incremented under each modal operator). `old(e)` is only legal at n > 0 and
checks its body at n - 1; `old` at the top level is rejected. Name resolution
rewrites parser `Name`/`Qualified` nodes into variable references, field
references, and roster address constants.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from hmlmc.contracts.ast import ADDRESS, BOOL, INT, BaseType, MapType
from hmlmc.contracts.ast import TypedContract
from hmlmc.diag import Diagnostic, FrontendError, Span
from hmlmc.properties.ast import (
    ARGS,
    PROC,
    AddrConst,
    CType,
    FAnd,
    FExpr,
    FForall,
    FieldRef,
    FModal,
    FNot,
    Formula,
    Label,
    LastReverted,
    MapRef,
    Name,
    Old,
    PBalance,
    PBinop,
    PBlockNumber,
    PExpr,
    PBool,
    PInt,
    PNull,
    Property,
    PUnop,
    Qualified,
    VarRef,
    ctype_name,
)


@dataclass(frozen=True, slots=True)
class Binder:
    name: str
    ctype: CType
    uid: int


def typecheck_property(prop: Property, contract: TypedContract,
                       roster: Sequence[str]) -> Property:
    checker = _Checker(contract, roster)
    formula = checker.formula(prop.formula, depth=0)
    if checker.diagnostics:
        raise FrontendError(checker.diagnostics)
    return replace(prop, formula=formula)


def typecheck_properties(props: Sequence[Property], contract: TypedContract,
                         roster: Sequence[str]) -> list[Property]:
    return [typecheck_property(p, contract, roster) for p in props]


class _Checker:
    def __init__(self, contract: TypedContract, roster: Sequence[str]):
        self.contract = contract
        self.roster = tuple(roster)
        self.diagnostics: list[Diagnostic] = []
        self.scope: dict[str, Binder] = {}
        self.next_uid = 0

    def error(self, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic(message, span))

    # --- formulas ------------------------------------------------------------

    def formula(self, f: Formula, depth: int) -> Formula:
        if isinstance(f, FExpr):
            expr = self.expr(f.expr, depth, BOOL)
            return replace(f, expr=expr, depth=depth)
        if isinstance(f, FNot):
            return replace(f, body=self.formula(f.body, depth), depth=depth)
        if isinstance(f, FAnd):
            return replace(f, left=self.formula(f.left, depth),
                           right=self.formula(f.right, depth), depth=depth)
        if isinstance(f, FForall):
            if f.var in self.scope:
                self.error(f"`{f.var}` is already bound", f.span)
            elif (self.contract.field_type(f.var) is not None
                    or f.var in self.roster or f.var == self.contract.name):
                self.error(f"binder `{f.var}` shadows a field or address "
                           f"constant", f.span)
            binder = Binder(f.var, f.ctype, self.next_uid)
            self.next_uid += 1
            shadowed = self.scope.get(f.var)
            self.scope[f.var] = binder
            body = self.formula(f.body, depth)
            if shadowed is None:
                del self.scope[f.var]
            else:
                self.scope[f.var] = shadowed
            return replace(f, body=body, uid=binder.uid, depth=depth)
        if isinstance(f, FModal):
            label = self.label(f.label, depth)
            body = self.formula(f.body, depth + 1)
            return replace(f, label=label, body=body, depth=depth)
        raise AssertionError(f"unhandled formula {f!r}")

    # --- modal labels --------------------------------------------------------

    def label(self, label: Label, depth: int) -> Label:
        sender = self.expr(label.sender, depth, ADDRESS)
        value = self.expr(label.value, depth, INT)

        contract_name = label.contract
        if contract_name is not None and contract_name != self.contract.name:
            self.error(f"unknown contract `{contract_name}`", label.span)
        contract_name = self.contract.name

        proc = self.contract.procedure(label.proc)
        if proc is not None:
            params = proc.params
            args = label.args or ()
            if (len(args) == 1 and isinstance(args[0], Name)
                    and self.scope.get(args[0].name) is not None
                    and self.scope[args[0].name].ctype == ARGS):
                # Concrete procedure applied to an args variable: the
                # variable ranges over this procedure's argument vectors.
                b = self.scope[args[0].name]
                args_var = VarRef(name=b.name, uid=b.uid, ctype=ARGS,
                                  span=args[0].span)
                return replace(label, sender=sender, value=value,
                               contract=contract_name, args=None,
                               args_var=args_var)
            if len(args) != len(params):
                self.error(
                    f"`{label.proc}` takes {len(params)} argument(s), "
                    f"{len(args)} given", label.span)
                args = tuple(self.expr(a, depth) for a in args)
            else:
                args = tuple(self.expr(a, depth, p.ty)
                             for a, p in zip(args, params))
            return replace(label, sender=sender, value=value,
                           contract=contract_name, args=args)

        binder = self.scope.get(label.proc or "")
        if binder is None or binder.ctype != PROC:
            self.error(f"`{label.proc}` is neither a procedure of "
                       f"`{contract_name}` nor a proc variable", label.span)
            return replace(label, sender=sender, value=value,
                           contract=contract_name)
        proc_var = VarRef(name=binder.name, uid=binder.uid, ctype=PROC,
                          span=label.span)

        args_var = None
        args = label.args or ()
        if (len(args) == 1 and isinstance(args[0], Name)
                and self.scope.get(args[0].name) is not None
                and self.scope[args[0].name].ctype == ARGS):
            b = self.scope[args[0].name]
            args_var = VarRef(name=b.name, uid=b.uid, ctype=ARGS,
                              span=args[0].span)
        else:
            self.error("a proc variable must be applied to a single "
                       "args variable", label.span)
        return replace(label, sender=sender, value=value,
                       contract=contract_name, proc=None, args=None,
                       proc_var=proc_var, args_var=args_var)

    # --- property expressions ------------------------------------------------

    def expr(self, e: PExpr, depth: int,
             expected: Optional[BaseType] = None) -> PExpr:
        typed = self._infer(e, depth)
        if (expected is not None and typed.ty is not None
                and typed.ty != expected):
            self.error(f"expected {expected}, found {typed.ty}", typed.span)
        return typed

    def _infer(self, e: PExpr, depth: int) -> PExpr:
        if isinstance(e, PInt):
            return replace(e, ty=INT)
        if isinstance(e, PBool):
            return replace(e, ty=BOOL)
        if isinstance(e, PNull):
            return replace(e, ty=ADDRESS)
        if isinstance(e, LastReverted):
            return replace(e, ty=BOOL)
        if isinstance(e, PBlockNumber):
            return replace(e, ty=INT)
        if isinstance(e, PBalance):
            owner = None
            if e.owner is not None:
                owner = self.expr(e.owner, depth, ADDRESS)
            return replace(e, owner=owner, ty=INT)
        if isinstance(e, Old):
            if depth == 0:
                self.error("`old` cannot appear outside a modal operator",
                           e.span)
                inner = self.expr(e.expr, depth)
            else:
                inner = self.expr(e.expr, depth - 1)
            return replace(e, expr=inner, ty=inner.ty)
        if isinstance(e, Name):
            return self._name(e)
        if isinstance(e, Qualified):
            return self._qualified(e, depth)
        if isinstance(e, PUnop):
            if e.op == "!":
                return replace(e, operand=self.expr(e.operand, depth, BOOL),
                               ty=BOOL)
            return replace(e, operand=self.expr(e.operand, depth, INT),
                           ty=INT)
        if isinstance(e, PBinop):
            return self._binop(e, depth)
        raise AssertionError(f"unhandled expression {e!r}")

    def _name(self, e: Name) -> PExpr:
        binder = self.scope.get(e.name)
        if binder is not None:
            if binder.ctype in (PROC, ARGS):
                self.error(f"{ctype_name(binder.ctype)} variable "
                           f"`{e.name}` can only appear in a modal label",
                           e.span)
                return VarRef(name=e.name, uid=binder.uid,
                              ctype=binder.ctype, span=e.span)
            return VarRef(name=e.name, uid=binder.uid, ctype=binder.ctype,
                          span=e.span, ty=binder.ctype)
        field_ty = self.contract.field_type(e.name)
        if field_ty is not None:
            if isinstance(field_ty, MapType):
                self.error(f"map field `{e.name}` must be indexed", e.span)
                return e
            return FieldRef(contract=self.contract.name, name=e.name,
                            span=e.span, ty=field_ty)
        if e.name in self.roster or e.name == self.contract.name:
            return AddrConst(name=e.name, span=e.span, ty=ADDRESS)
        self.error(f"unknown name `{e.name}`", e.span)
        return e

    def _qualified(self, e: Qualified, depth: int) -> PExpr:
        contract_name = e.contract
        if contract_name == "":
            contract_name = self.contract.name
        elif contract_name != self.contract.name:
            self.error(f"unknown contract `{contract_name}`", e.span)
            contract_name = self.contract.name

        if e.contract == "" and e.key is not None:
            # Bare `name[key]`: the name might be a quantified variable used
            # with an index, which is never legal, or a map field.
            binder = self.scope.get(e.name)
            if binder is not None:
                self.error(f"variable `{e.name}` cannot be indexed", e.span)
                return e

        field_ty = self.contract.field_type(e.name)
        if field_ty is None:
            self.error(f"`{contract_name}` has no field `{e.name}`", e.span)
            return e
        if isinstance(field_ty, MapType):
            if e.key is None:
                self.error(f"map field `{e.name}` must be indexed", e.span)
                return e
            key = self.expr(e.key, depth, ADDRESS)
            return MapRef(contract=contract_name, name=e.name, key=key,
                          span=e.span, ty=field_ty.value)
        if e.key is not None:
            self.error(f"`{e.name}` is not a map field", e.span)
            return e
        return FieldRef(contract=contract_name, name=e.name, span=e.span,
                        ty=field_ty)

    def _binop(self, e: PBinop, depth: int) -> PBinop:
        op = e.op
        if op in ("+", "-", "*"):
            left = self.expr(e.left, depth, INT)
            right = self.expr(e.right, depth, INT)
            if op == "*" and not (_is_literal(left) or _is_literal(right)):
                self.error("multiplication must have a literal operand",
                           e.span)
            return replace(e, left=left, right=right, ty=INT)
        if op in ("<", "<=", ">", ">="):
            left = self.expr(e.left, depth, INT)
            right = self.expr(e.right, depth, INT)
            return replace(e, left=left, right=right, ty=BOOL)
        if op in ("==", "!="):
            left = self.expr(e.left, depth)
            right = self.expr(e.right, depth)
            if (left.ty is not None and right.ty is not None
                    and left.ty != right.ty):
                self.error(f"cannot compare {left.ty} with {right.ty}",
                           e.span)
            return replace(e, left=left, right=right, ty=BOOL)
        raise AssertionError(f"unhandled operator {op!r}")


def _is_literal(e: PExpr) -> bool:
    if isinstance(e, PInt):
        return True
    return isinstance(e, PUnop) and e.op == "-" and isinstance(e.operand,
                                                               PInt)
