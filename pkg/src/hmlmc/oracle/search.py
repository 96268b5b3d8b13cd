"""Breadth-first reachability checking over finite domains.

`check_reachable` explores every transaction sequence of length <= depth from
the initial state and evaluates the property at each visited flagged state;
BFS order makes the first violation a shortest one. Identical flagged states
at equal depth are deduplicated: satisfaction depends only on the state
sequence the formula can observe, and at the frontier that is the flagged
state itself (the checker bounds `old` chains by modal depth), so merging
equal states changes no verdict and keeps witnesses shortest.

The transition relation is left-total: every transaction in the domain is a
step. Expanding the full domain at every state is wasteful, though, because
all rejected transactions with the same block advance lead to the very same
successor - the state advanced by delta with the reverted flag set. The
expansion therefore enumerates only plausibly-valid candidates (user or null
senders, affordable values inside the int window, discipline-respecting
procedures, user-or-null address arguments) plus one deliberately invalid
representative per block advance, whose successor stands in for every pruned
transaction. The reachable flagged-state set is exactly that of full-domain
expansion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from hmlmc.contracts.ast import BOOL, INT, Procedure
from hmlmc.properties.ast import Formula, Property
from hmlmc.semantics import ChainState, Transaction, step_flagged

from .domains import FiniteDomains
from .eval import DEFAULT_BUDGET, Evaluator, OracleLimit
from .rewrite import miniscope

DEFAULT_NODE_LIMIT = 500_000


@dataclass(frozen=True, slots=True)
class OracleVerdict:
    kind: str  # "holds" | "fails" | "inconclusive"
    witness: Optional[tuple[Transaction, ...]] = None
    reason: str = ""
    explored: int = 0

    @property
    def holds(self) -> bool:
        return self.kind == "holds"

    @property
    def fails(self) -> bool:
        return self.kind == "fails"

    @property
    def inconclusive(self) -> bool:
        return self.kind == "inconclusive"


def _tx_values(ty, domains: FiniteDomains) -> tuple:
    if ty == INT:
        return tuple(domains.ints)
    if ty == BOOL:
        return (False, True)
    return (None, *domains.system.users)


def _first_vector(proc: Procedure, domains: FiniteDomains) -> tuple:
    return tuple(_tx_values(p.ty, domains)[0] for p in proc.params)


def _candidate_txs(state: ChainState,
                   domains: FiniteDomains) -> Iterator[Transaction]:
    system = domains.system
    lo = max(domains.int_lo, 0)
    for contract in system.contracts:
        constructed = state.constructed[contract.name]
        for proc in contract.procedures:
            if (proc.name == "constructor") == constructed:
                continue
            arg_domains = [_tx_values(p.ty, domains) for p in proc.params]
            for sender in (None, *system.users):
                hi = min(domains.int_hi, state.balances[sender])
                values = range(lo, hi + 1) if proc.payable else (0,)
                for value in values:
                    for args in itertools.product(*arg_domains):
                        for delta in domains.deltas:
                            yield Transaction(
                                sender=sender, contract=contract.name,
                                proc=proc.name, args=args, value=value,
                                block_delta=delta)


def _representative_invalid(domains: FiniteDomains,
                            delta: int) -> Transaction:
    # A contract can never be a transaction sender, so this transaction is
    # rejected in every state; its successor is the advanced state with the
    # reverted flag, standing in for all pruned transactions of this delta.
    contract = domains.system.contracts[0]
    proc = contract.procedures[0]
    return Transaction(sender=contract.name, contract=contract.name,
                       proc=proc.name, args=_first_vector(proc, domains),
                       value=0, block_delta=delta)


def _frontier_txs(state: ChainState,
                  domains: FiniteDomains) -> Iterator[Transaction]:
    yield from _candidate_txs(state, domains)
    for delta in domains.deltas:
        yield _representative_invalid(domains, delta)


def check_properties(props: Sequence[Property], depth: int,
                     domains: FiniteDomains, *,
                     node_limit: int = DEFAULT_NODE_LIMIT,
                     budget: int = DEFAULT_BUDGET) -> dict[str, OracleVerdict]:
    """Check several properties of one contract in a single BFS sweep."""
    system = domains.system
    active: dict[str, tuple[Formula, Evaluator]] = {}
    for prop in props:
        if prop.name in active:
            raise ValueError(f"duplicate property name {prop.name!r}")
        active[prop.name] = (miniscope(prop.formula),
                             Evaluator(domains=domains, budget=budget))
    verdicts: dict[str, OracleVerdict] = {}

    frontier: list[tuple] = [(system.genesis(), ())]
    explored = 0
    for level in itertools.count():
        for fs, path in frontier:
            explored += 1
            if explored > node_limit:
                for name in active:
                    verdicts[name] = OracleVerdict(
                        kind="inconclusive",
                        reason=f"node limit exhausted ({node_limit} states)",
                        explored=explored - 1)
                return verdicts
            for name in list(active):
                formula, ev = active[name]
                try:
                    ok = ev.formula(formula, [fs], {})
                except OracleLimit as exc:
                    verdicts[name] = OracleVerdict(
                        kind="inconclusive", reason=str(exc),
                        explored=explored)
                    del active[name]
                    continue
                if not ok:
                    verdicts[name] = OracleVerdict(
                        kind="fails", witness=tuple(path), explored=explored)
                    del active[name]
            if not active:
                return verdicts
        if level == depth:
            break
        successors: dict[tuple, tuple] = {}
        for fs, path in frontier:
            for tx in _frontier_txs(fs.state, domains):
                succ = step_flagged(system, fs, tx)
                key = succ.key()
                if key not in successors:
                    successors[key] = (succ, path + (tx,))
        frontier = list(successors.values())
    for name in active:
        verdicts[name] = OracleVerdict(kind="holds", explored=explored)
    return verdicts


def check_reachable(formula: Formula, depth: int, domains: FiniteDomains, *,
                    node_limit: int = DEFAULT_NODE_LIMIT,
                    budget: int = DEFAULT_BUDGET) -> OracleVerdict:
    """Check one formula at every state reachable within `depth` steps."""
    prop = Property(name="_", formula=formula)
    return check_properties([prop], depth, domains, node_limit=node_limit,
                            budget=budget)[prop.name]
