"""Solving pipeline and the stateful context behind the SMT-LIB front end.

A :class:`SolverContext` holds scoped declarations and assertions (push/pop)
and decides satisfiability of the current conjunction in five stages:

1. convert assertions to internal formulas (done at ``assert`` time);
2. negation normal form;
3. quantifier elimination (Cooper) — int quantifiers only, Bool quantified
   variables were already expanded by the converter;
4. Gauss elimination of top-level unit equalities, which collapses the
   functional next-state definitions produced by bounded model checking and
   records a substitution log for model reconstruction;
5. CDCL(T) on the ground remainder.

Models are *validated* before being reported: the reconstructed assignment
is evaluated against the quantifier-free formula, and any mismatch downgrades
the answer to ``unknown`` — a wrong model must never masquerade as ``sat``.
"""

from __future__ import annotations

import time

from hmlmc.solver.preprocess import Converter, ConvertError, GuardedInt, Value
from hmlmc.solver.qe import QeBlowup, eliminate_quants
from hmlmc.solver.sat import solve_ground
from hmlmc.solver.terms import (
    FALSE,
    TRUE,
    And,
    Eq,
    FFalse,
    FTrue,
    Formula,
    Lin,
    bool_vars,
    evaluate,
    free_int_vars,
    mk_and,
    nnf,
    subst_int,
)


class SolverError(Exception):
    """Malformed input or an unsupported construct."""


def gauss_eliminate(f: Formula) -> tuple[Formula, list[tuple[str, Lin]]]:
    """Substitute away top-level unit equalities, logging each solution.

    The log replays in *reverse*: the most recently eliminated variable
    depends only on surviving variables.
    """
    log: list[tuple[str, Lin]] = []
    while True:
        if isinstance(f, And):
            conj = f.args
        elif isinstance(f, (FTrue, FFalse)):
            break
        else:
            conj = (f,)
        hit = False
        for a in conj:
            if not isinstance(a, Eq):
                continue
            for v, c in a.lin.terms:
                if c in (1, -1):
                    rhs = a.lin.drop(v)
                    rhs = rhs.neg() if c == 1 else rhs
                    rest = [subst_int(b, v, rhs) for b in conj if b is not a]
                    f = mk_and(rest)
                    log.append((v, rhs))
                    hit = True
                    break
            if hit:
                break
        if not hit:
            break
    return f, log


class SolverContext:
    """Scoped declarations + assertions with a check/model interface."""

    def __init__(
        self,
        timeout_ms: int | None = None,
        theory_node_cap: int = 20_000,
        qe_size_cap: int = 400_000,
    ) -> None:
        self.timeout_ms = timeout_ms
        self.theory_node_cap = theory_node_cap
        self.qe_size_cap = qe_size_cap
        # Each level: (declarations dict, definitions dict, assertion list)
        self._levels: list[tuple[dict[str, str], dict[str, Value], list[Formula]]] = [
            ({}, {}, [])
        ]
        self._model: tuple[dict[str, int], dict[str, bool]] | None = None

    # -- declarations and assertions ----------------------------------------

    def _all_sorts(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for decls, _, _ in self._levels:
            out.update(decls)
        return out

    def _all_defs(self) -> dict[str, Value]:
        out: dict[str, Value] = {}
        for _, defs, _ in self._levels:
            out.update(defs)
        return out

    def converter(self) -> Converter:
        return Converter(self._all_sorts())

    def declare_const(self, name: str, sort: str) -> None:
        if sort not in ("Int", "Bool"):
            raise SolverError(f"unsupported sort: {sort}")
        if name in self._all_sorts() or name in self._all_defs():
            raise SolverError(f"constant already declared: {name}")
        self._levels[-1][0][name] = sort
        self._model = None

    def define(self, name: str, body) -> None:
        if name in self._all_sorts() or name in self._all_defs():
            raise SolverError(f"constant already declared: {name}")
        try:
            val = self.converter().convert(body, dict(self._all_defs()))
        except ConvertError as e:
            raise SolverError(str(e)) from None
        self._levels[-1][1][name] = val
        self._model = None

    def assert_term(self, term) -> None:
        try:
            conv = self.converter()
            val = conv.convert(term, dict(self._all_defs()))
        except ConvertError as e:
            raise SolverError(str(e)) from None
        if not isinstance(val, Formula):
            raise SolverError("assert expects a Bool term")
        self._levels[-1][2].append(val)
        self._model = None

    def assert_formula(self, f: Formula) -> None:
        self._levels[-1][2].append(f)
        self._model = None

    def push(self, n: int = 1) -> None:
        for _ in range(n):
            self._levels.append(({}, {}, []))
        self._model = None

    def pop(self, n: int = 1) -> None:
        if n >= len(self._levels):
            raise SolverError("pop below the initial level")
        for _ in range(n):
            self._levels.pop()
        self._model = None

    def reset(self) -> None:
        self._levels = [({}, {}, [])]
        self._model = None

    # -- solving --------------------------------------------------------------

    def check_sat(self) -> str:
        self._model = None
        phi = mk_and([a for _, _, asserts in self._levels for a in asserts])
        deadline = (
            time.monotonic() + self.timeout_ms / 1000.0
            if self.timeout_ms
            else None
        )
        if phi is TRUE:
            self._model = ({}, {})
            return "sat"
        if phi is FALSE:
            return "unsat"
        phi = nnf(phi)
        try:
            ground = eliminate_quants(phi, self.qe_size_cap)
        except QeBlowup:
            return "unknown"
        if ground is TRUE:
            self._model = ({}, {})
            return "sat"
        if ground is FALSE:
            return "unsat"
        reduced, log = gauss_eliminate(ground)
        if reduced is FALSE:
            return "unsat"
        if reduced is TRUE:
            status, ienv, benv = "sat", {}, {}
        else:
            status, ienv, benv = solve_ground(
                reduced, deadline=deadline, theory_node_cap=self.theory_node_cap
            )
        if status != "sat":
            return status
        # Reconstruct eliminated variables, then validate.
        full_ienv = dict(ienv)
        for v, rhs in reversed(log):
            full_ienv[v] = rhs.evaluate(lambda u: full_ienv.get(u, 0))
        for v in free_int_vars(ground):
            full_ienv.setdefault(v, 0)
        full_benv = dict(benv)
        for b in bool_vars(ground):
            full_benv.setdefault(b, False)
        if not evaluate(ground, full_ienv, full_benv):
            # A model that does not satisfy the formula indicates an internal
            # bug; never report it as sat.
            return "unknown"
        self._model = (full_ienv, full_benv)
        return "sat"

    # -- model access -----------------------------------------------------

    def has_model(self) -> bool:
        return self._model is not None

    def value_of(self, term) -> str:
        """Evaluate a term under the current model, as SMT-LIB text."""
        if self._model is None:
            raise SolverError("no model available (run check-sat first)")
        ienv, benv = self._model
        try:
            conv = self.converter()
            val = conv.convert(term, dict(self._all_defs()))
        except ConvertError as e:
            raise SolverError(str(e)) from None
        if isinstance(val, Formula):
            return "true" if evaluate(val, ienv, benv) else "false"
        assert isinstance(val, GuardedInt)
        for guard, lin in val.branches:
            if evaluate(guard, ienv, benv):
                n = lin.evaluate(lambda u: ienv.get(u, 0))
                return str(n) if n >= 0 else f"(- {-n})"
        raise SolverError("guarded integer with no true branch")

    def model_entries(self) -> list[tuple[str, str, str]]:
        """(name, sort, value-text) for every declared constant."""
        if self._model is None:
            raise SolverError("no model available (run check-sat first)")
        ienv, benv = self._model
        out = []
        for name, sort in sorted(self._all_sorts().items()):
            if sort == "Int":
                n = ienv.get(name, 0)
                text = str(n) if n >= 0 else f"(- {-n})"
            else:
                text = "true" if benv.get(name, False) else "false"
            out.append((name, sort, text))
        return out


__all__ = ["SolverContext", "SolverError", "gauss_eliminate"]
