"""Frontend for the contract language: AST, parser, type checker, printer."""
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
    FieldDecl,
    If,
    IntLit,
    MapAssign,
    MapRead,
    MapType,
    Null,
    Param,
    Procedure,
    Require,
    Sender,
    Skip,
    Stmt,
    This,
    Transfer,
    Type,
    TypedContract,
    Unop,
    Value,
    Var,
    default_value,
)
from hmlmc.contracts.parser import parse_contract
from hmlmc.contracts.pretty import pretty
from hmlmc.contracts.typecheck import typecheck_contract


def load_contract(text: str) -> TypedContract:
    """Parse and typecheck a contract source, raising FrontendError on issues."""
    return typecheck_contract(parse_contract(text))


__all__ = [
    "ADDRESS", "BOOL", "INT",
    "Assign", "Balance", "BaseType", "Binop", "BlockNumber", "BoolLit", "Call",
    "ContractDecl", "Expr", "FieldDecl", "If", "IntLit", "MapAssign",
    "MapRead", "MapType", "Null", "Param", "Procedure", "Require", "Sender",
    "Skip", "Stmt", "This", "Transfer", "Type", "TypedContract", "Unop",
    "Value", "Var",
    "default_value", "load_contract", "parse_contract", "pretty",
    "typecheck_contract",
]
