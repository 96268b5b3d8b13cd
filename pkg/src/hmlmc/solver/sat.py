"""CDCL SAT core with offline linear-arithmetic theory checking.

The ground NNF formula is Tseitin-encoded with polarity (Plaisted-
Greenbaum): every connective gets a one-sided definition, and because the
formula is in NNF, arithmetic atoms only ever appear as positive literals
in the original clauses. A full propositional assignment therefore induces
a plain conjunction — the constraints of the atoms assigned true — which is
handed to :mod:`hmlmc.solver.theory`. Theory conflicts come back as cores
and are learned as clauses over the atom literals; the formula's
monotonicity in its (positive) atoms makes ignoring false-assigned atoms
sound.

The search is a standard CDCL loop: two-watched-literal propagation, 1-UIP
conflict analysis with activity bumping, phase saving, and Luby restarts.
All learned clauses are kept, which together with the finite supply of
theory lemmas guarantees termination.
"""

from __future__ import annotations

import time

from hmlmc.solver.terms import (
    And,
    BVar,
    Div,
    Eq,
    Formula,
    Le,
    Not,
    Or,
)
from hmlmc.solver.theory import TheoryResult, theory_check


class SatUnknown(Exception):
    """The theory solver gave up within its budget."""


class SatTimeout(Exception):
    """Wall-clock deadline exceeded during search."""


def _luby(x: int) -> int:
    """Luby restart sequence: 1 1 2 1 1 2 4 ... (0-based index)."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) // 2
        seq -= 1
        x %= size
    return 1 << seq


class Encoding:
    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.atom_of: dict[int, tuple] = {}
        self.bool_var: dict[int, str] = {}
        self._cache: dict[Formula, int] = {}

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def lit(self, f: Formula) -> int:
        cached = self._cache.get(f)
        if cached is not None:
            return cached
        match f:
            case BVar(name):
                v = self.new_var()
                self.bool_var[v] = name
                out = v
            case Not(a):
                out = -self.lit(a)
            case Le(lin):
                v = self.new_var()
                self.atom_of[v] = ("le", lin)
                out = v
            case Eq(lin):
                v = self.new_var()
                self.atom_of[v] = ("eq", lin)
                out = v
            case Div(m, lin):
                v = self.new_var()
                self.atom_of[v] = ("div", m, lin)
                out = v
            case And(args):
                v = self.new_var()
                for a in args:
                    self.clauses.append([-v, self.lit(a)])
                out = v
            case Or(args):
                v = self.new_var()
                self.clauses.append([-v] + [self.lit(a) for a in args])
                out = v
            case _:
                raise TypeError(f"encode: unexpected node {f!r}")
        self._cache[f] = out
        return out


def encode(f: Formula) -> Encoding:
    enc = Encoding()
    root = enc.lit(f)
    enc.clauses.append([root])
    return enc


class CDCL:
    def __init__(
        self,
        enc: Encoding,
        deadline: float | None = None,
        theory_node_cap: int = 20_000,
    ) -> None:
        self.enc = enc
        self.nvars = enc.nvars
        self.deadline = deadline
        self.theory_node_cap = theory_node_cap

        n = self.nvars + 1
        self.assign = [0] * n  # 0 unassigned, 1 true, -1 false
        self.level = [0] * n
        self.reason: list[list[int] | None] = [None] * n
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity = [0.0] * n
        self.var_inc = 1.0
        self.phase = [False] * n
        self.watches: dict[int, list[list[int]]] = {}
        self.clauses_db: list[list[int]] = []
        self.ok = True
        self.theory_model: dict[str, int] | None = None
        self._props = 0

        for c in enc.clauses:
            self._add_clause(list(c))

    # -- clause management -------------------------------------------------

    def _watch(self, lit: int, clause: list[int]) -> None:
        self.watches.setdefault(lit, []).append(clause)

    def _add_clause(self, lits: list[int]) -> None:
        if not self.ok:
            return
        out: list[int] = []
        seen: set[int] = set()
        for l in lits:
            if -l in seen:
                return  # tautology
            if l not in seen:
                seen.add(l)
                out.append(l)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            if not self._enqueue(out[0], None):
                self.ok = False
            return
        self._watch(out[0], out)
        self._watch(out[1], out)
        self.clauses_db.append(out)

    def _add_learned(self, lits: list[int]) -> None:
        """Add an asserting clause; lits[0] must be the asserted literal."""
        if len(lits) == 1:
            if not self._enqueue(lits[0], None):
                self.ok = False
            return
        # Watch the asserting literal and a highest-level other literal.
        best = 1
        for i in range(2, len(lits)):
            if self.level[abs(lits[i])] > self.level[abs(lits[best])]:
                best = i
        lits[1], lits[best] = lits[best], lits[1]
        self._watch(lits[0], lits)
        self._watch(lits[1], lits)
        self.clauses_db.append(lits)
        if not self._enqueue(lits[0], lits):
            self.ok = False

    # -- assignment --------------------------------------------------------

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _enqueue(self, lit: int, reason: list[int] | None) -> bool:
        cur = self._value(lit)
        if cur == 1:
            return True
        if cur == -1:
            return False
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.phase[v] = lit > 0
        self.trail.append(lit)
        return True

    def _propagate(self) -> list[int] | None:
        while self.qhead < len(self.trail):
            self._props += 1
            if self._props % 8192 == 0 and self.deadline is not None:
                if time.monotonic() > self.deadline:
                    raise SatTimeout()
            lit = self.trail[self.qhead]
            self.qhead += 1
            watching = self.watches.get(-lit)
            if not watching:
                continue
            keep: list[list[int]] = []
            conflict: list[int] | None = None
            for idx, clause in enumerate(watching):
                if conflict is not None:
                    keep.extend(watching[idx:])
                    break
                if clause[0] == -lit:
                    clause[0], clause[1] = clause[1], clause[0]
                # clause[1] == -lit now (the false watcher)
                if self._value(clause[0]) == 1:
                    keep.append(clause)
                    continue
                moved = False
                for i in range(2, len(clause)):
                    if self._value(clause[i]) != -1:
                        clause[1], clause[i] = clause[i], clause[1]
                        self._watch(clause[1], clause)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(clause)
                if not self._enqueue(clause[0], clause):
                    conflict = clause
            self.watches[-lit] = keep
            if conflict is not None:
                return conflict
        return None

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _backtrack(self, lvl: int) -> None:
        if self._decision_level() <= lvl:
            return
        bound = self.trail_lim[lvl]
        for lit in reversed(self.trail[bound:]):
            v = abs(lit)
            self.assign[v] = 0
            self.reason[v] = None
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, len(self.trail))

    # -- conflict analysis ---------------------------------------------------

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for i in range(1, self.nvars + 1):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        cur_level = self._decision_level()
        learned: list[int] = []
        seen = [False] * (self.nvars + 1)
        counter = 0
        lit0 = 0
        idx = len(self.trail) - 1
        clause = conflict
        while True:
            for l in clause:
                v = abs(l)
                if seen[v] or l == lit0:
                    continue
                if self.level[v] == 0:
                    continue
                seen[v] = True
                self._bump(v)
                if self.level[v] >= cur_level:
                    counter += 1
                else:
                    learned.append(l)
            # Find the next trail literal at the current level.
            while True:
                lit = self.trail[idx]
                idx -= 1
                if seen[abs(lit)]:
                    break
            v = abs(lit)
            seen[v] = False
            counter -= 1
            if counter == 0:
                learned.insert(0, -lit)
                break
            clause = self.reason[v]
            lit0 = lit
        # Backjump level: highest level among the non-asserting literals.
        bl = 0
        for l in learned[1:]:
            bl = max(bl, self.level[abs(l)])
        self.var_inc /= 0.95
        return learned, bl

    # -- theory interface ----------------------------------------------------

    def _theory_final(self) -> list[int] | None:
        """Check the true atoms; return a conflict clause or None if sat."""
        cons: list[tuple] = []
        atoms: list[int] = []
        for v, c in self.enc.atom_of.items():
            if self.assign[v] == 1:
                cons.append(c)
                atoms.append(v)
        if not cons:
            self.theory_model = {}
            return None
        res: TheoryResult = theory_check(
            cons, node_cap=self.theory_node_cap, deadline=self.deadline
        )
        if res.status == "unknown":
            raise SatUnknown()
        if res.status == "sat":
            self.theory_model = res.model
            return None
        return [-atoms[i] for i in res.core]

    # -- main search ---------------------------------------------------------

    def solve(self) -> str:
        if not self.ok:
            return "unsat"
        conflicts = 0
        restart_idx = 0
        restart_budget = 128 * _luby(restart_idx)
        while True:
            conflict = self._propagate()
            if conflict is not None:
                conflicts += 1
                if self._decision_level() == 0:
                    return "unsat"
                learned, bl = self._analyze(conflict)
                self._backtrack(bl)
                self._add_learned(learned)
                if not self.ok:
                    return "unsat"
                if conflicts >= restart_budget:
                    conflicts = 0
                    restart_idx += 1
                    restart_budget = 128 * _luby(restart_idx)
                    self._backtrack(0)
                continue
            if len(self.trail) == self.nvars:
                clause = self._theory_final()
                if clause is None:
                    return "sat"
                if not clause:
                    return "unsat"
                top = max(self.level[abs(l)] for l in clause)
                if top == 0:
                    return "unsat"
                self._backtrack(top)
                learned, bl = self._analyze(clause)
                self._backtrack(bl)
                self._add_learned(learned)
                if not self.ok:
                    return "unsat"
                continue
            # Decide.
            best_v = 0
            best_a = -1.0
            for v in range(1, self.nvars + 1):
                if self.assign[v] == 0 and self.activity[v] > best_a:
                    best_a = self.activity[v]
                    best_v = v
            self.trail_lim.append(len(self.trail))
            self._enqueue(best_v if self.phase[best_v] else -best_v, None)

    def model(self) -> tuple[dict[str, int], dict[str, bool]]:
        benv = {
            name: self.assign[v] == 1 for v, name in self.enc.bool_var.items()
        }
        ienv = dict(self.theory_model or {})
        return ienv, benv


def solve_ground(
    f: Formula,
    deadline: float | None = None,
    theory_node_cap: int = 20_000,
) -> tuple[str, dict[str, int], dict[str, bool]]:
    """Decide a ground NNF formula; returns (status, int model, bool model)."""
    enc = encode(f)
    solver = CDCL(enc, deadline=deadline, theory_node_cap=theory_node_cap)
    try:
        status = solver.solve()
    except (SatUnknown, SatTimeout):
        return "unknown", {}, {}
    if status == "sat":
        ienv, benv = solver.model()
        return "sat", ienv, benv
    return "unsat", {}, {}


__all__ = ["solve_ground", "SatUnknown", "SatTimeout", "encode", "CDCL"]
