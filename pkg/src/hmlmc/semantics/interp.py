"""Reference interpreter: expression/statement evaluation and the
transaction-level step function.

Execution is atomic: statements mutate a private working copy, and any
failure (`Reverted`) abandons that copy, so an invalid transaction leaves
the chain state unchanged apart from the unconditional block advance.
`step_flagged` is left-total — every transaction yields a successor, with
the flag recording whether it reverted.
"""
from __future__ import annotations

from dataclasses import dataclass

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
    Expr,
    If,
    IntLit,
    MapAssign,
    MapRead,
    MapType,
    Null,
    Require,
    Sender,
    Skip,
    Stmt,
    This,
    Transfer,
    TypedContract,
    Unop,
    Value as ValueExpr,
    Var,
    default_value,
)
from hmlmc.semantics.state import (
    Address,
    ChainState,
    FlaggedState,
    System,
    Transaction,
    Value,
)

MAX_CALL_DEPTH = 64


class Reverted(Exception):
    """Raised when execution hits an undefined case (require failure,
    disabled transfer, failed nested call)."""


@dataclass(slots=True)
class Env:
    """Execution environment for one procedure activation."""

    system: System
    contract: TypedContract  # the contract being executed (`this`)
    sender: Address
    value: int
    params: dict
    depth: int = 0


def value_matches(v: Value, ty: BaseType) -> bool:
    if ty == INT:
        return type(v) is int
    if ty == BOOL:
        return type(v) is bool
    return v is None or isinstance(v, str)


# ---------------------------------------------------------------------------
# Expressions


def eval_expr(env: Env, state: ChainState, e: Expr) -> Value:
    if isinstance(e, (IntLit, BoolLit)):
        return e.value
    if isinstance(e, Null):
        return None
    if isinstance(e, Sender):
        return env.sender
    if isinstance(e, ValueExpr):
        return env.value
    if isinstance(e, This):
        return env.contract.name
    if isinstance(e, BlockNumber):
        return state.block_number
    if isinstance(e, Var):
        if e.kind == "param":
            return env.params[e.name]
        return state.store[env.contract.name][e.name]
    if isinstance(e, MapRead):
        key = eval_expr(env, state, e.key)
        ty = env.contract.field_type(e.name)
        assert isinstance(ty, MapType)
        return state.store[env.contract.name][e.name].get(
            key, default_value(ty.value))
    if isinstance(e, Balance):
        owner = (env.contract.name if e.owner is None
                 else eval_expr(env, state, e.owner))
        return state.balances[owner]
    if isinstance(e, Unop):
        v = eval_expr(env, state, e.operand)
        return (not v) if e.op == "!" else -v
    if isinstance(e, Binop):
        l = eval_expr(env, state, e.left)
        r = eval_expr(env, state, e.right)
        return apply_binop(e.op, l, r)
    raise AssertionError(f"unhandled expression {e!r}")


def apply_binop(op: str, l: Value, r: Value) -> Value:
    if op == "+":
        return l + r
    if op == "-":
        return l - r
    if op == "*":
        return l * r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    if op == ">=":
        return l >= r
    if op == "==":
        return l == r
    if op == "!=":
        return l != r
    if op == "&&":
        return l and r
    if op == "||":
        return l or r
    raise AssertionError(f"unhandled operator {op}")


# ---------------------------------------------------------------------------
# Statements


def _move(state: ChainState, frm: Address, to: Address, amount: int) -> None:
    """Token transfer; enabled iff the amount is non-negative, the endpoints
    differ, and the source is sufficiently funded."""
    if amount < 0 or frm == to or state.balances[frm] < amount:
        raise Reverted
    state.balances[frm] -= amount
    state.balances[to] += amount


def exec_stmt(env: Env, state: ChainState, st: Stmt) -> None:
    if isinstance(st, Skip):
        return
    if isinstance(st, Require):
        if not eval_expr(env, state, st.cond):
            raise Reverted
        return
    if isinstance(st, Assign):
        state.store[env.contract.name][st.name] = eval_expr(env, state, st.expr)
        return
    if isinstance(st, MapAssign):
        key = eval_expr(env, state, st.key)
        v = eval_expr(env, state, st.expr)
        ty = env.contract.field_type(st.name)
        assert isinstance(ty, MapType)
        cells = state.store[env.contract.name][st.name]
        if v == default_value(ty.value):
            cells.pop(key, None)
        else:
            cells[key] = v
        return
    if isinstance(st, Transfer):
        to = eval_expr(env, state, st.to)
        amount = eval_expr(env, state, st.amount)
        _move(state, env.contract.name, to, amount)
        return
    if isinstance(st, If):
        branch = st.then if eval_expr(env, state, st.cond) else st.els
        for s in branch:
            exec_stmt(env, state, s)
        return
    if isinstance(st, Call):
        _exec_call(env, state, st)
        return
    raise AssertionError(f"unhandled statement {st!r}")


def _exec_call(env: Env, state: ChainState, st: Call) -> None:
    if env.depth >= MAX_CALL_DEPTH:
        raise Reverted
    callee = env.system.contract(st.contract)
    if callee is None:
        raise Reverted
    proc = callee.procedure(st.proc)
    if proc is None or len(proc.params) != len(st.args):
        raise Reverted
    value = eval_expr(env, state, st.value)
    args = [eval_expr(env, state, a) for a in st.args]
    if not all(value_matches(a, p.ty) for a, p in zip(args, proc.params)):
        raise Reverted
    if (st.proc == "constructor") == state.constructed[callee.name]:
        raise Reverted
    _move(state, env.contract.name, callee.name, value)
    inner = Env(
        system=env.system,
        contract=callee,
        sender=env.contract.name,
        value=value,
        params={p.name: a for p, a in zip(proc.params, args)},
        depth=env.depth + 1,
    )
    for s in proc.body:
        exec_stmt(inner, state, s)
    if st.proc == "constructor":
        state.constructed[callee.name] = True


# ---------------------------------------------------------------------------
# Transactions


def _valid_shape(system: System, state: ChainState, tx: Transaction) -> bool:
    """Validity conditions checked before the body runs."""
    if tx.block_delta < 0 or tx.value < 0:
        return False
    if not (tx.sender is None or tx.sender in system.users):
        return False
    contract = system.contract(tx.contract)
    if contract is None:
        return False
    proc = contract.procedure(tx.proc)
    if proc is None or len(proc.params) != len(tx.args):
        return False
    for a, p in zip(tx.args, proc.params):
        if not value_matches(a, p.ty):
            return False
        if p.ty == ADDRESS and not (a is None or a in system.users):
            return False
    if (tx.proc == "constructor") == state.constructed[tx.contract]:
        return False
    if state.balances[tx.sender] < tx.value:
        return False
    return True


def apply_tx(system: System, state: ChainState,
             tx: Transaction) -> tuple[ChainState, bool]:
    """Execute one transaction. Returns ``(state', ok)``; on an invalid or
    reverting transaction ``state'`` differs from ``state`` only by the
    block advance."""
    advanced = state.copy()
    advanced.block_number += max(tx.block_delta, 0)
    if not _valid_shape(system, advanced, tx):
        return advanced, False
    contract = system.contract(tx.contract)
    proc = contract.procedure(tx.proc)
    work = advanced.copy()
    env = Env(
        system=system,
        contract=contract,
        sender=tx.sender,
        value=tx.value,
        params={p.name: a for p, a in zip(proc.params, tx.args)},
    )
    try:
        _move(work, tx.sender, tx.contract, tx.value)
        for s in proc.body:
            exec_stmt(env, work, s)
    except Reverted:
        return advanced, False
    if tx.proc == "constructor":
        work.constructed[tx.contract] = True
    return work, True


def step_flagged(system: System, fs: FlaggedState,
                 tx: Transaction) -> FlaggedState:
    """Left-total step on flagged states: the flag of the predecessor is
    discarded, the successor's flag records this transaction's outcome."""
    state, ok = apply_tx(system, fs.state, tx)
    return FlaggedState(state=state, reverted=not ok)


def replay(system: System, txs: list[Transaction]) -> list[FlaggedState]:
    """Run a trace from genesis; returns the chronological sequence of
    flagged states, genesis first (length ``len(txs) + 1``)."""
    seq = [system.genesis()]
    for tx in txs:
        seq.append(step_flagged(system, seq[-1], tx))
    return seq
