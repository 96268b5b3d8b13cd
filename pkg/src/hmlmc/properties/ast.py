"""AST for the property language.

Formulas are the core fragment {expr, not, and, forall, modal}; `exists`,
`||`, and `->` are desugared by the parser. Property expressions (PExpr)
extend contract expressions with `old(e)` and `last_reverted`, and reference
quantified variables, contract fields, and address-roster constants instead
of the contract language's parameters and implicit sender/value/this.

Name resolution happens in the checker: the parser emits `Name` and
`Qualified` nodes, and the checker rewrites them into `VarRef`, `FieldRef`,
`MapRef`, or `AddrConst`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from hmlmc.contracts.ast import BaseType
from hmlmc.diag import DUMMY_SPAN, Span

_SPAN = field(default=DUMMY_SPAN, compare=False, repr=False)
_TY = field(default=None, compare=False, repr=False)

# Property-language types: base types plus the modal-only kinds.
PROC = "proc"
ARGS = "args"
CType = Union[BaseType, str]  # BaseType | "proc" | "args"


def ctype_name(ty: CType) -> str:
    return ty if isinstance(ty, str) else str(ty)


# --- property expressions ----------------------------------------------------

@dataclass(frozen=True, slots=True)
class PInt:
    value: int
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PBool:
    value: bool
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PNull:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Name:
    """Unresolved bare identifier (parser output only)."""
    name: str
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Qualified:
    """Unresolved `C.field` or `C.map[key]` (parser output only)."""
    contract: str
    name: str
    key: Optional["PExpr"]
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class VarRef:
    """Occurrence of a quantified variable, resolved to its binder's uid."""
    name: str
    uid: int = field(default=-1, compare=False)
    ctype: Optional[CType] = field(default=None, compare=False)
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class AddrConst:
    """Roster address constant (a user name or the contract's own name)."""
    name: str
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class FieldRef:
    contract: str
    name: str
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class MapRef:
    contract: str
    name: str
    key: "PExpr" = None  # type: ignore[assignment]
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PBalance:
    """`balance[e]`, or bare `balance` (owner None) for the checked contract."""
    owner: Optional["PExpr"]
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PBlockNumber:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Old:
    expr: "PExpr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class LastReverted:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PUnop:
    op: str  # "!" | "-"
    operand: "PExpr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class PBinop:
    op: str  # == != < <= > >= + - *
    left: "PExpr"
    right: "PExpr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


PExpr = Union[PInt, PBool, PNull, Name, Qualified, VarRef, AddrConst, FieldRef,
              MapRef, PBalance, PBlockNumber, Old, LastReverted, PUnop,
              PBinop]


# --- formulas ----------------------------------------------------------------

_DEPTH = field(default=-1, compare=False)


@dataclass(frozen=True, slots=True)
class Label:
    """Modal transaction label `<sender, C.proc(args), value>`.

    Exactly one of (proc, proc_var) is set. A constant procedure carries
    either an explicit argument list in `args` (the transition's block
    advance is then pinned to zero) or an args-variable ranging over that
    procedure's argument vectors; a proc-variable always carries a single
    args-variable covering every argument vector. An args-variable also
    carries the transition's block advance.
    """
    sender: PExpr
    contract: Optional[str]  # None until resolved by the checker
    proc: Optional[str]
    args: Optional[tuple[PExpr, ...]]
    value: PExpr
    proc_var: Optional[VarRef] = None
    args_var: Optional[VarRef] = None
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class FExpr:
    expr: PExpr
    span: Span = _SPAN
    depth: int = _DEPTH


@dataclass(frozen=True, slots=True)
class FNot:
    body: "Formula"
    span: Span = _SPAN
    depth: int = _DEPTH


@dataclass(frozen=True, slots=True)
class FAnd:
    left: "Formula"
    right: "Formula"
    span: Span = _SPAN
    depth: int = _DEPTH


@dataclass(frozen=True, slots=True)
class FForall:
    var: str
    ctype: CType
    body: "Formula"
    uid: int = field(default=-1, compare=False)
    span: Span = _SPAN
    depth: int = _DEPTH


@dataclass(frozen=True, slots=True)
class FModal:
    label: Label
    body: "Formula"
    span: Span = _SPAN
    depth: int = _DEPTH


Formula = Union[FExpr, FNot, FAnd, FForall, FModal]


@dataclass(frozen=True, slots=True)
class Property:
    name: str
    formula: Formula
    span: Span = _SPAN
