"""Concrete semantics: chain states, transactions, reference interpreter."""

from hmlmc.semantics.interp import (
    MAX_CALL_DEPTH,
    Env,
    Reverted,
    apply_binop,
    apply_tx,
    eval_expr,
    exec_stmt,
    replay,
    step_flagged,
    value_matches,
)
from hmlmc.semantics.state import (
    Address,
    ChainState,
    FlaggedState,
    System,
    Transaction,
    Value,
    addr_key,
    dump_trace,
    load_trace,
)

__all__ = [
    "MAX_CALL_DEPTH",
    "Address",
    "ChainState",
    "Env",
    "FlaggedState",
    "Reverted",
    "System",
    "Transaction",
    "Value",
    "addr_key",
    "apply_binop",
    "apply_tx",
    "dump_trace",
    "eval_expr",
    "exec_stmt",
    "load_trace",
    "replay",
    "step_flagged",
    "value_matches",
]
