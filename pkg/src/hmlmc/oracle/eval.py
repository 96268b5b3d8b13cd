"""Ground evaluation of typed formulas over finite domains.

The evaluator walks the formula, enumerating quantifier domains and stepping
the reference interpreter for modalities. Work is metered: every node visit
and every enumerated binding costs one tick against a budget, and exhaustion
raises `OracleLimit` - exploration limits are reported, never silently
truncated.

Two caches keep the walk tractable on quantifier-heavy formulas without
changing its meaning:

* Quantifier and modal subformulas are memoised. A subformula's truth value
  depends only on the bindings of its free variables and on the prefix of
  the state sequence it can observe, whose length is bounded by the deepest
  `old` chain reachable in the subtree (`_reach`). The memo key is the node
  identity, that state-key prefix, and the free-variable bindings.
* Modal successors are cached per (state key, transaction), so re-visiting a
  label instance under different outer bindings replays no interpreter work.

Sequences are most-recent-first: seq[0] is the current flagged state and
seq[1:] is the history, so `old(e)` evaluates e against seq[1:].
"""
from __future__ import annotations

from dataclasses import dataclass, field

from hmlmc.contracts.ast import MapType, default_value
from hmlmc.properties.ast import (
    ARGS,
    PROC,
    AddrConst,
    FAnd,
    FExpr,
    FieldRef,
    FModal,
    FNot,
    Formula,
    FForall,
    Label,
    LastReverted,
    MapRef,
    Old,
    PBalance,
    PBinop,
    PBlockNumber,
    PBool,
    PExpr,
    PInt,
    PNull,
    PUnop,
    VarRef,
)
from hmlmc.semantics import FlaggedState, Transaction, apply_binop, step_flagged

from .domains import ArgsValue, FiniteDomains
from .rewrite import expr_free_uids, formula_free_uids, label_free_uids

DEFAULT_BUDGET = 5_000_000


class OracleLimit(Exception):
    """The evaluation budget was exhausted before a verdict was reached."""


def _labels_using(f: Formula, uid: int) -> list[Label]:
    """All modal labels in f whose args-variable is the binder `uid`."""
    out = []
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, FNot):
            stack.append(node.body)
        elif isinstance(node, FAnd):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, FForall):
            stack.append(node.body)
        elif isinstance(node, FModal):
            if node.label.args_var is not None and node.label.args_var.uid == uid:
                out.append(node.label)
            stack.append(node.body)
    return out


@dataclass
class Evaluator:
    domains: FiniteDomains
    budget: int = DEFAULT_BUDGET
    spent: int = 0
    _memo: dict = field(default_factory=dict)
    _steps: dict = field(default_factory=dict)
    _free: dict = field(default_factory=dict)
    _reach: dict = field(default_factory=dict)

    def _tick(self, cost: int = 1) -> None:
        self.spent += cost
        if self.spent > self.budget:
            raise OracleLimit(
                f"evaluation budget exhausted ({self.budget} ticks)")

    # -- static analyses (cached by node identity) ---------------------------

    def free_uids(self, f: Formula) -> frozenset[int]:
        got = self._free.get(id(f))
        if got is None:
            got = self._free[id(f)] = formula_free_uids(f)
        return got

    def reach(self, f: Formula) -> int:
        """How far into the sequence evaluating f can look (0 = head only)."""
        got = self._reach.get(id(f))
        if got is None:
            got = self._reach[id(f)] = self._reach_of(f)
        return got

    def _reach_of(self, f: Formula) -> int:
        if isinstance(f, FExpr):
            return _expr_reach(f.expr)
        if isinstance(f, FNot):
            return self.reach(f.body)
        if isinstance(f, FAnd):
            return max(self.reach(f.left), self.reach(f.right))
        if isinstance(f, FForall):
            return self.reach(f.body)
        if isinstance(f, FModal):
            lab = f.label
            r = max(_expr_reach(lab.sender), _expr_reach(lab.value))
            if lab.args is not None:
                for a in lab.args:
                    r = max(r, _expr_reach(a))
            return max(r, self.reach(f.body) - 1, 0)
        raise TypeError(f"unknown formula {type(f).__name__}")

    # -- formulas -------------------------------------------------------------

    def formula(self, f: Formula, seq: list[FlaggedState], env: dict) -> bool:
        self._tick()
        if isinstance(f, FExpr):
            return bool(self.expr(f.expr, seq, env))
        if isinstance(f, FNot):
            return not self.formula(f.body, seq, env)
        if isinstance(f, FAnd):
            return (self.formula(f.left, seq, env)
                    and self.formula(f.right, seq, env))
        if isinstance(f, (FForall, FModal)):
            key = self._memo_key(f, seq, env)
            got = self._memo.get(key)
            if got is not None:
                return got
            if isinstance(f, FForall):
                result = self._forall(f, seq, env)
            else:
                result = self._modal(f, seq, env)
            self._memo[key] = result
            return result
        raise TypeError(f"unknown formula {type(f).__name__}")

    def _memo_key(self, f: Formula, seq: list[FlaggedState],
                  env: dict) -> tuple:
        prefix = tuple(fs.key() for fs in seq[:self.reach(f) + 1])
        bindings = tuple((uid, env[uid]) for uid in sorted(self.free_uids(f)))
        return (id(f), prefix, bindings)

    def _forall(self, f: FForall, seq: list[FlaggedState], env: dict) -> bool:
        for v in self._domain(f, env):
            self._tick()
            env[f.uid] = v
            try:
                if not self.formula(f.body, seq, env):
                    return False
            finally:
                del env[f.uid]
        return True

    def _modal(self, f: FModal, seq: list[FlaggedState], env: dict) -> bool:
        tx = self._transaction(f.label, seq, env)
        succ = self._step(seq[0], tx)
        return self.formula(f.body, [succ] + seq, env)

    def _step(self, fs: FlaggedState, tx: Transaction) -> FlaggedState:
        key = (fs.key(), tx)
        succ = self._steps.get(key)
        if succ is None:
            succ = self._steps[key] = step_flagged(self.domains.system, fs, tx)
        return succ

    def _domain(self, f: FForall, env: dict):
        if f.ctype == PROC:
            return self.domains.procs
        if f.ctype == ARGS:
            return self.domains.args_values(
                self._paired_procs(f.uid, f.body, env))
        return self.domains.base_values(f.ctype)

    def _paired_procs(self, uid: int, body: Formula, env: dict) -> list[str]:
        procs: dict[str, None] = {}
        for label in _labels_using(body, uid):
            if label.proc is not None:
                procs[label.proc] = None
            elif label.proc_var is not None and label.proc_var.uid in env:
                procs[env[label.proc_var.uid]] = None
            else:
                # Pairing unresolved (the proc-variable binds further in):
                # range over every procedure.
                for p in self.domains.procs:
                    procs[p] = None
        return list(procs)

    def _transaction(self, label: Label, seq: list[FlaggedState],
                     env: dict) -> Transaction:
        sender = self.expr(label.sender, seq, env)
        value = self.expr(label.value, seq, env)
        proc = label.proc if label.proc is not None else env[label.proc_var.uid]
        if label.args is not None:
            args = tuple(self.expr(a, seq, env) for a in label.args)
            delta = 0
        else:
            av: ArgsValue = env[label.args_var.uid]
            args = av.vector
            delta = av.delta
        return Transaction(sender=sender, contract=label.contract, proc=proc,
                           args=args, value=value, block_delta=delta)

    # -- expressions ----------------------------------------------------------

    def expr(self, e: PExpr, seq: list[FlaggedState], env: dict):
        self._tick()
        state = seq[0].state
        if isinstance(e, (PInt, PBool)):
            return e.value
        if isinstance(e, PNull):
            return None
        if isinstance(e, LastReverted):
            return seq[0].reverted
        if isinstance(e, PBlockNumber):
            return state.block_number
        if isinstance(e, VarRef):
            return env[e.uid]
        if isinstance(e, AddrConst):
            return e.name
        if isinstance(e, FieldRef):
            return state.store[e.contract][e.name]
        if isinstance(e, MapRef):
            key = self.expr(e.key, seq, env)
            ty = self.domains.system.contract(e.contract).field_type(e.name)
            assert isinstance(ty, MapType)
            return state.store[e.contract][e.name].get(
                key, default_value(ty.value))
        if isinstance(e, PBalance):
            owner = (self.domains.contract.name if e.owner is None
                     else self.expr(e.owner, seq, env))
            return state.balances[owner]
        if isinstance(e, Old):
            assert len(seq) >= 2, "old() beyond the start of the sequence"
            return self.expr(e.expr, seq[1:], env)
        if isinstance(e, PUnop):
            v = self.expr(e.operand, seq, env)
            return (not v) if e.op == "!" else (-v)
        if isinstance(e, PBinop):
            return apply_binop(e.op, self.expr(e.left, seq, env),
                               self.expr(e.right, seq, env))
        raise TypeError(f"unknown property expression {type(e).__name__}")


def _expr_reach(e: PExpr) -> int:
    if isinstance(e, Old):
        return 1 + _expr_reach(e.expr)
    if isinstance(e, PUnop):
        return _expr_reach(e.operand)
    if isinstance(e, PBinop):
        return max(_expr_reach(e.left), _expr_reach(e.right))
    if isinstance(e, MapRef):
        return _expr_reach(e.key)
    if isinstance(e, PBalance):
        return _expr_reach(e.owner) if e.owner is not None else 0
    return 0


def eval_formula(seq, formula: Formula, domains: FiniteDomains,
                 budget: int = DEFAULT_BUDGET) -> bool:
    """Evaluate a closed typed formula on a non-empty state sequence."""
    if not seq:
        raise ValueError("state sequence must be non-empty")
    ev = Evaluator(domains=domains, budget=budget)
    return ev.formula(formula, list(seq), {})
