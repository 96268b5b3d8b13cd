"""Brute-force explicit-state oracle over finite domains."""
from .domains import ArgsValue, FiniteDomains
from .eval import DEFAULT_BUDGET, Evaluator, OracleLimit, eval_formula
from .rewrite import miniscope
from .search import (
    DEFAULT_NODE_LIMIT,
    OracleVerdict,
    check_properties,
    check_reachable,
)

__all__ = [
    "ArgsValue",
    "FiniteDomains",
    "DEFAULT_BUDGET",
    "DEFAULT_NODE_LIMIT",
    "Evaluator",
    "OracleLimit",
    "OracleVerdict",
    "check_properties",
    "check_reachable",
    "eval_formula",
    "miniscope",
]
