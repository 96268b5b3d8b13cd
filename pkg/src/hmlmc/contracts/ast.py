"""Typed AST for the contract language.

Nodes are immutable; source spans (and the type annotation filled in by the
checker) are excluded from structural equality so that a pretty-printed and
re-parsed tree compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from hmlmc.diag import DUMMY_SPAN, Span

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, slots=True)
class BaseType:
    kind: str  # "bool" | "int" | "address"

    def __str__(self) -> str:
        return self.kind


@dataclass(frozen=True, slots=True)
class MapType:
    """Address-keyed map; the only compound storage type in the fragment."""

    value: BaseType

    def __str__(self) -> str:
        return f"mapping(address => {self.value})"


Type = Union[BaseType, MapType]

BOOL = BaseType("bool")
INT = BaseType("int")
ADDRESS = BaseType("address")


def default_value(ty: BaseType):
    """Default for uninitialised storage: 0, false, or the null address."""
    if ty == INT:
        return 0
    if ty == BOOL:
        return False
    return None  # null address


# ---------------------------------------------------------------------------
# Expressions
#
# Every node carries `span` (for diagnostics) and `ty` (filled by the type
# checker); both are ignored by __eq__.

_SPAN = field(default=DUMMY_SPAN, compare=False, repr=False)
_TY = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Null:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Var:
    """Parameter or field reference; `kind` is resolved by the type checker."""

    name: str
    kind: Optional[str] = field(default=None, compare=False, repr=False)  # "param" | "field"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class MapRead:
    name: str  # map-typed field of the enclosing contract
    key: "Expr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Balance:
    """`balance` (owner None, meaning this contract) or `balance[e]`."""

    owner: Optional["Expr"]
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Sender:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Value:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class This:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class BlockNumber:
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Unop:
    op: str  # "!" | "-"
    operand: "Expr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


@dataclass(frozen=True, slots=True)
class Binop:
    op: str  # "||" "&&" "==" "!=" "<" "<=" ">" ">=" "+" "-" "*"
    left: "Expr"
    right: "Expr"
    span: Span = _SPAN
    ty: Optional[BaseType] = _TY


Expr = Union[
    Null,
    IntLit,
    BoolLit,
    Var,
    MapRead,
    Balance,
    Sender,
    Value,
    This,
    BlockNumber,
    Unop,
    Binop,
]

# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True, slots=True)
class Skip:
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class Require:
    cond: Expr
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class Assign:
    name: str
    expr: Expr
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class MapAssign:
    name: str
    key: Expr
    expr: Expr
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class Transfer:
    to: Expr
    amount: Expr
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    els: tuple["Stmt", ...]
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class Call:
    """Cross-contract call statement `C.f(e1, ..., ek) value e;`."""

    contract: str
    proc: str
    args: tuple[Expr, ...]
    value: Expr
    span: Span = _SPAN


Stmt = Union[Skip, Require, Assign, MapAssign, Transfer, If, Call]

# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True, slots=True)
class Param:
    name: str
    ty: BaseType
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class FieldDecl:
    name: str
    ty: Type
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class Procedure:
    name: str
    params: tuple[Param, ...]
    payable: bool
    body: tuple[Stmt, ...]
    span: Span = _SPAN


@dataclass(frozen=True, slots=True)
class ContractDecl:
    name: str
    fields: tuple[FieldDecl, ...]
    procedures: tuple[Procedure, ...]
    span: Span = _SPAN

    def procedure(self, name: str) -> Optional[Procedure]:
        for p in self.procedures:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True, slots=True)
class TypedContract:
    """Type-checked contract: expressions annotated, implicit prologue for
    non-payable procedures injected (``require(value == 0)``)."""

    name: str
    fields: tuple[FieldDecl, ...]
    procedures: tuple[Procedure, ...]
    decl: ContractDecl = field(compare=False, repr=False, default=None)  # type: ignore[assignment]

    def field_type(self, name: str) -> Optional[Type]:
        for f in self.fields:
            if f.name == name:
                return f.ty
        return None

    def procedure(self, name: str) -> Optional[Procedure]:
        for p in self.procedures:
            if p.name == name:
                return p
        return None

    @property
    def proc_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.procedures)
