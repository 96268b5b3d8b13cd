"""Frontend for the property language: AST, parser, depth-typed checker."""
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
from hmlmc.properties.parser import parse_properties
from hmlmc.properties.typecheck import typecheck_properties, typecheck_property


def load_properties(text: str, contract, roster) -> list[Property]:
    """Parse and typecheck a .hml source against a contract and roster."""
    return typecheck_properties(parse_properties(text), contract, roster)


__all__ = [
    "ARGS", "PROC",
    "AddrConst", "CType", "FAnd", "FExpr", "FForall", "FieldRef", "FModal",
    "FNot", "Formula", "Label", "LastReverted", "MapRef", "Name", "Old",
    "PBalance", "PBinop", "PBlockNumber", "PExpr", "PBool", "PInt", "PNull",
    "Property", "PUnop", "Qualified", "VarRef",
    "ctype_name", "load_properties", "parse_properties",
    "typecheck_properties", "typecheck_property",
]
