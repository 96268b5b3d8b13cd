"""Finite domains for brute-force checking.

Quantifier enumeration conventions:

- address variables and address-typed procedure arguments range over the
  full roster (null, users, contracts); transactions carrying a contract
  address where a user is required are invalid and simply revert;
- proc variables range over the declared procedures minus the constructor;
- an args variable denotes a (procedure, argument vector, block delta)
  triple: the vectors are the well-typed ones for the procedure(s) the
  variable is applied to, and the block advance of the labelled transition
  rides along with it (a fully concrete label pins the advance to zero);
- int variables, argument values, and transfer values range over the
  inclusive ``[int_lo, int_hi]`` window.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from hmlmc.contracts.ast import BOOL, INT, BaseType, TypedContract
from hmlmc.semantics.state import Address, System, Value


@dataclass(frozen=True, slots=True)
class ArgsValue:
    """Value of an `args`-typed variable."""

    proc: str
    vector: tuple[Value, ...]
    delta: int


@dataclass(frozen=True)
class FiniteDomains:
    system: System
    contract: TypedContract  # the contract bare labels/fields resolve to
    int_lo: int
    int_hi: int
    deltas: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not (self.int_lo <= 0 <= self.int_hi):
            raise ValueError("int range must contain 0")
        if self.system.contract(self.contract.name) is not self.contract:
            raise ValueError("contract under test must belong to the system")
        if not self.deltas or any(d < 0 for d in self.deltas):
            raise ValueError("block deltas must be non-negative")

    @property
    def addresses(self) -> tuple[Address, ...]:
        return self.system.addresses

    @property
    def ints(self) -> range:
        return range(self.int_lo, self.int_hi + 1)

    @property
    def procs(self) -> tuple[str, ...]:
        """Domain of proc variables: declared procedures, constructor
        excluded."""
        return tuple(p.name for p in self.contract.procedures
                     if p.name != "constructor")

    def base_values(self, ty: BaseType) -> tuple[Value, ...]:
        if ty == INT:
            return tuple(self.ints)
        if ty == BOOL:
            return (False, True)
        return self.addresses

    def vectors(self, proc: str) -> Iterator[tuple[Value, ...]]:
        """All well-typed argument vectors for a procedure of the contract
        under test."""
        sig = self.contract.procedure(proc)
        if sig is None:
            return iter(())
        return itertools.product(*(self.base_values(p.ty)
                                   for p in sig.params))

    def args_values(self, procs: tuple[str, ...]) -> Iterator[ArgsValue]:
        """Joint (procedure, vector, delta) domain of an args variable that
        is applied to the given procedures."""
        if not procs:
            # The variable is never applied; a single dummy value suffices.
            yield ArgsValue(proc="", vector=(), delta=0)
            return
        for proc in procs:
            for vec in self.vectors(proc):
                for delta in self.deltas:
                    yield ArgsValue(proc=proc, vector=vec, delta=delta)
