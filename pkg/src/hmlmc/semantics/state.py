"""Chain state, transactions, and the system container.

Addresses are strings (user names and contract names); `None` is the null
address. States are plain data treated as immutable: every transition works
on a fresh copy, and `key()` gives a canonical hashable form for frontier
deduplication.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from hmlmc.contracts.ast import MapType, TypedContract, default_value

Address = Optional[str]
Value = Union[int, bool, None, str]


def addr_key(a: Address) -> tuple[int, str]:
    """Sort key for addresses (None first)."""
    return (0, "") if a is None else (1, a)


@dataclass(frozen=True, slots=True)
class Transaction:
    sender: Address
    contract: str
    proc: str
    args: tuple[Value, ...]
    value: int
    block_delta: int = 0

    def to_json(self) -> dict:
        return {
            "sender": self.sender,
            "contract": self.contract,
            "proc": self.proc,
            "args": list(self.args),
            "value": self.value,
            "blockDelta": self.block_delta,
        }

    @staticmethod
    def from_json(obj: dict) -> "Transaction":
        return Transaction(
            sender=obj["sender"],
            contract=obj["contract"],
            proc=obj["proc"],
            args=tuple(obj.get("args", ())),
            value=obj.get("value", 0),
            block_delta=obj.get("blockDelta", 0),
        )


def load_trace(text: str) -> list[Transaction]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("a trace file must contain a JSON array")
    return [Transaction.from_json(obj) for obj in data]


def dump_trace(txs: list[Transaction]) -> str:
    return json.dumps([tx.to_json() for tx in txs], indent=2) + "\n"


@dataclass(slots=True)
class ChainState:
    """balances: every roster address (incl. None); store: contract -> field
    -> value, where map fields hold a dict with default cells omitted.

    States are mutated only while a transition constructs them; once
    published (returned from apply_tx or handed to an evaluator) they are
    immutable, which lets `key()` cache its canonical form."""
    balances: dict
    store: dict
    constructed: dict
    block_number: int
    _key: Optional[tuple] = field(default=None, repr=False, compare=False)

    def copy(self) -> "ChainState":
        return ChainState(
            balances=dict(self.balances),
            store={c: {f: (dict(v) if isinstance(v, dict) else v)
                       for f, v in fields.items()}
                   for c, fields in self.store.items()},
            constructed=dict(self.constructed),
            block_number=self.block_number,
        )

    def key(self) -> tuple:
        if self._key is None:
            self._key = (
                self.block_number,
                tuple(sorted(self.balances.items(),
                             key=lambda kv: addr_key(kv[0]))),
                tuple(
                    (c, tuple(
                        (f, tuple(sorted(v.items(),
                                         key=lambda kv: addr_key(kv[0])))
                         if isinstance(v, dict) else v)
                        for f, v in sorted(fields.items())))
                    for c, fields in sorted(self.store.items())),
                tuple(sorted(self.constructed.items())),
            )
        return self._key


@dataclass(frozen=True, slots=True)
class FlaggedState:
    state: ChainState
    reverted: bool

    def key(self) -> tuple:
        return (self.state.key(), self.reverted)


@dataclass(frozen=True, slots=True)
class System:
    """The verified contracts plus the user roster and funding."""
    contracts: tuple[TypedContract, ...]
    users: tuple[str, ...]
    initial_balance: int = 10

    def __post_init__(self):
        names = [c.name for c in self.contracts]
        if len(set(names)) != len(names):
            raise ValueError("duplicate contract names")
        overlap = set(names) & set(self.users)
        if overlap:
            raise ValueError(f"user names collide with contracts: {overlap}")

    def contract(self, name: str) -> Optional[TypedContract]:
        for c in self.contracts:
            if c.name == name:
                return c
        return None

    @property
    def contract_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.contracts)

    @property
    def addresses(self) -> tuple[Address, ...]:
        """Full roster: null, users, contracts."""
        return (None, *self.users, *self.contract_names)

    def initial_state(self) -> ChainState:
        balances: dict = {None: 0}
        for u in self.users:
            balances[u] = self.initial_balance
        store: dict = {}
        constructed: dict = {}
        for c in self.contracts:
            balances[c.name] = 0
            constructed[c.name] = False
            store[c.name] = {
                f.name: ({} if isinstance(f.ty, MapType)
                         else default_value(f.ty))
                for f in c.fields
            }
        return ChainState(balances=balances, store=store,
                          constructed=constructed, block_number=0)

    def genesis(self) -> FlaggedState:
        return FlaggedState(state=self.initial_state(), reverted=False)
