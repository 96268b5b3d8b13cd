"""Internal formula representation for the QLIA solver.

Formulas are built from linear integer atoms, boolean variables and the
usual connectives, with integer quantifiers. Smart constructors perform
constant folding and normalization so that trivially true/false formulas
collapse before any expensive machinery runs:

- ``Le(lin)`` means ``lin <= 0`` with coefficients gcd-tightened (integer
  floor on the constant — exact for integers);
- ``Eq(lin)`` means ``lin == 0`` (unsatisfiable coefficients fold to false);
- ``Div(m, lin)`` means ``m | lin`` with ``lin`` reduced modulo ``m``.

Negation is pushed to literals by :func:`nnf`; negated equalities and
divisibilities are expanded structurally so the theory solver only ever sees
positive ``Le``/``Eq``/``Div`` constraints or negated ``Le`` (which is again
a ``Le``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


# ---------------------------------------------------------------------------
# Linear expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Lin:
    """A linear integer expression: sum of coef*var plus a constant."""

    terms: tuple[tuple[str, int], ...]  # sorted by variable name, coefs != 0
    const: int

    @staticmethod
    def of_const(c: int) -> "Lin":
        return Lin((), c)

    @staticmethod
    def of_var(name: str, coef: int = 1) -> "Lin":
        if coef == 0:
            return Lin((), 0)
        return Lin(((name, coef),), 0)

    @staticmethod
    def make(mapping: dict[str, int], const: int) -> "Lin":
        items = tuple(sorted((v, c) for v, c in mapping.items() if c != 0))
        return Lin(items, const)

    def is_const(self) -> bool:
        return not self.terms

    def add(self, other: "Lin") -> "Lin":
        acc = dict(self.terms)
        for v, c in other.terms:
            nc = acc.get(v, 0) + c
            if nc == 0:
                acc.pop(v, None)
            else:
                acc[v] = nc
        return Lin.make(acc, self.const + other.const)

    def neg(self) -> "Lin":
        return Lin(tuple((v, -c) for v, c in self.terms), -self.const)

    def sub(self, other: "Lin") -> "Lin":
        return self.add(other.neg())

    def scale(self, k: int) -> "Lin":
        if k == 0:
            return Lin((), 0)
        if k == 1:
            return self
        return Lin(tuple((v, c * k) for v, c in self.terms), self.const * k)

    def add_const(self, k: int) -> "Lin":
        if k == 0:
            return self
        return Lin(self.terms, self.const + k)

    def coef(self, var: str) -> int:
        for v, c in self.terms:
            if v == var:
                return c
        return 0

    def drop(self, var: str) -> "Lin":
        return Lin(tuple((v, c) for v, c in self.terms if v != var), self.const)

    def subst(self, var: str, repl: "Lin") -> "Lin":
        a = self.coef(var)
        if a == 0:
            return self
        return self.drop(var).add(repl.scale(a))

    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.terms)

    def evaluate(self, env) -> int:
        return self.const + sum(c * env(v) for v, c in self.terms)

    def content(self) -> int:
        """gcd of the variable coefficients (0 if constant)."""
        g = 0
        for _, c in self.terms:
            g = gcd(g, abs(c))
        return g

    def __str__(self) -> str:  # debugging aid
        parts = [f"{c}*{v}" for v, c in self.terms]
        parts.append(str(self.const))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# Formula nodes
# ---------------------------------------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FFalse(Formula):
    pass


TRUE = FTrue()
FALSE = FFalse()


@dataclass(frozen=True, slots=True)
class Le(Formula):
    """lin <= 0"""

    lin: Lin


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    """lin == 0"""

    lin: Lin


@dataclass(frozen=True, slots=True)
class Div(Formula):
    """m | lin with m >= 2"""

    m: int
    lin: Lin


@dataclass(frozen=True, slots=True)
class BVar(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Quant(Formula):
    forall: bool
    var: str  # an Int variable
    body: Formula


# ---------------------------------------------------------------------------
# Smart constructors
# ---------------------------------------------------------------------------


def mk_le(lin: Lin) -> Formula:
    """lin <= 0, gcd-tightened (exact over the integers)."""
    if lin.is_const():
        return TRUE if lin.const <= 0 else FALSE
    g = lin.content()
    if g > 1:
        # terms + const <= 0  <=>  terms/g <= floor(-const/g)
        terms = tuple((v, c // g) for v, c in lin.terms)
        lin = Lin(terms, -((-lin.const) // g))
    return Le(lin)


def mk_eq(lin: Lin) -> Formula:
    if lin.is_const():
        return TRUE if lin.const == 0 else FALSE
    g = lin.content()
    if g > 1:
        if lin.const % g != 0:
            return FALSE
        lin = Lin(tuple((v, c // g) for v, c in lin.terms), lin.const // g)
    # Canonical sign: first coefficient positive.
    if lin.terms[0][1] < 0:
        lin = lin.neg()
    return Eq(lin)


def mk_div(m: int, lin: Lin) -> Formula:
    m = abs(m)
    if m == 0:
        return mk_eq(lin)
    if m == 1:
        return TRUE
    if lin.is_const():
        return TRUE if lin.const % m == 0 else FALSE
    # m | g*lin'  <=>  (m/gcd(m,g)) | lin'   (g/gcd invertible mod m/gcd)
    g = gcd(lin.content(), abs(lin.const))
    if g > 1:
        d = gcd(m, g)
        if d > 1:
            lin = Lin(tuple((v, c // d) for v, c in lin.terms), lin.const // d)
            m //= d
            if m == 1:
                return TRUE
    # Reduce coefficients and constant modulo m.
    terms = tuple((v, c % m) for v, c in lin.terms if c % m != 0)
    lin = Lin(terms, lin.const % m)
    if lin.is_const():
        return TRUE if lin.const % m == 0 else FALSE
    return Div(m, lin)


def mk_not(f: Formula) -> Formula:
    if isinstance(f, FTrue):
        return FALSE
    if isinstance(f, FFalse):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def mk_and(args) -> Formula:
    flat: list[Formula] = []
    seen: set[Formula] = set()
    for a in args:
        if isinstance(a, FTrue):
            continue
        if isinstance(a, FFalse):
            return FALSE
        if isinstance(a, And):
            for sub in a.args:
                if sub not in seen:
                    seen.add(sub)
                    flat.append(sub)
        elif a not in seen:
            seen.add(a)
            flat.append(a)
    for a in flat:
        if mk_not(a) in seen:
            return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def mk_or(args) -> Formula:
    flat: list[Formula] = []
    seen: set[Formula] = set()
    for a in args:
        if isinstance(a, FFalse):
            continue
        if isinstance(a, FTrue):
            return TRUE
        if isinstance(a, Or):
            for sub in a.args:
                if sub not in seen:
                    seen.add(sub)
                    flat.append(sub)
        elif a not in seen:
            seen.add(a)
            flat.append(a)
    for a in flat:
        if mk_not(a) in seen:
            return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def mk_implies(a: Formula, b: Formula) -> Formula:
    return mk_or([mk_not(a), b])


def mk_iff(a: Formula, b: Formula) -> Formula:
    return mk_and([mk_implies(a, b), mk_implies(b, a)])


def mk_quant(forall: bool, var: str, body: Formula) -> Formula:
    if isinstance(body, (FTrue, FFalse)):
        return body
    if var not in free_int_vars(body):
        return body
    return Quant(forall, var, body)


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def free_int_vars(f: Formula) -> frozenset[str]:
    match f:
        case Le(lin) | Eq(lin):
            return lin.vars()
        case Div(_, lin):
            return lin.vars()
        case Not(a):
            return free_int_vars(a)
        case And(args) | Or(args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= free_int_vars(a)
            return out
        case Quant(_, v, body):
            return free_int_vars(body) - {v}
        case _:
            return frozenset()


def bool_vars(f: Formula) -> frozenset[str]:
    match f:
        case BVar(name):
            return frozenset([name])
        case Not(a):
            return bool_vars(a)
        case And(args) | Or(args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= bool_vars(a)
            return out
        case Quant(_, _, body):
            return bool_vars(body)
        case _:
            return frozenset()


def subst_int(f: Formula, var: str, repl: Lin) -> Formula:
    """Substitute an integer variable by a linear expression."""
    match f:
        case Le(lin):
            return mk_le(lin.subst(var, repl)) if lin.coef(var) else f
        case Eq(lin):
            return mk_eq(lin.subst(var, repl)) if lin.coef(var) else f
        case Div(m, lin):
            return mk_div(m, lin.subst(var, repl)) if lin.coef(var) else f
        case Not(a):
            return mk_not(subst_int(a, var, repl))
        case And(args):
            return mk_and([subst_int(a, var, repl) for a in args])
        case Or(args):
            return mk_or([subst_int(a, var, repl) for a in args])
        case Quant(forall, v, body):
            if v == var:
                return f
            return mk_quant(forall, v, subst_int(body, var, repl))
        case _:
            return f


def subst_bool(f: Formula, var: str, val: Formula) -> Formula:
    match f:
        case BVar(name) if name == var:
            return val
        case Not(a):
            return mk_not(subst_bool(a, var, val))
        case And(args):
            return mk_and([subst_bool(a, var, val) for a in args])
        case Or(args):
            return mk_or([subst_bool(a, var, val) for a in args])
        case Quant(forall, v, body):
            return mk_quant(forall, v, subst_bool(body, var, val))
        case _:
            return f


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form.

    Negation is pushed onto atoms and then *eliminated*: negated Le becomes
    Le, negated Eq becomes a disjunction of two strict sides, negated Div
    expands over the nonzero residues. Only ``Not(BVar)`` survives.
    """
    match f:
        case FTrue():
            return FALSE if negate else TRUE
        case FFalse():
            return TRUE if negate else FALSE
        case Le(lin):
            if negate:  # not(lin <= 0)  <=>  lin >= 1  <=>  1 - lin <= 0
                return mk_le(lin.neg().add_const(1))
            return f
        case Eq(lin):
            if negate:  # lin <= -1 or -lin <= -1
                return mk_or(
                    [mk_le(lin.add_const(1)), mk_le(lin.neg().add_const(1))]
                )
            return f
        case Div(m, lin):
            if negate:
                return mk_or(
                    [mk_div(m, lin.add_const(-r)) for r in range(1, m)]
                )
            return f
        case BVar(_):
            return mk_not(f) if negate else f
        case Not(a):
            return nnf(a, not negate)
        case And(args):
            parts = [nnf(a, negate) for a in args]
            return mk_or(parts) if negate else mk_and(parts)
        case Or(args):
            parts = [nnf(a, negate) for a in args]
            return mk_and(parts) if negate else mk_or(parts)
        case Quant(forall, v, body):
            return mk_quant(forall ^ negate, v, nnf(body, negate))
        case _:
            raise TypeError(f"nnf: unexpected node {f!r}")


def evaluate(f: Formula, ienv: dict[str, int], benv: dict[str, bool]) -> bool:
    """Ground evaluation; unknown variables default to 0/false."""
    match f:
        case FTrue():
            return True
        case FFalse():
            return False
        case Le(lin):
            return lin.evaluate(lambda v: ienv.get(v, 0)) <= 0
        case Eq(lin):
            return lin.evaluate(lambda v: ienv.get(v, 0)) == 0
        case Div(m, lin):
            return lin.evaluate(lambda v: ienv.get(v, 0)) % m == 0
        case BVar(name):
            return benv.get(name, False)
        case Not(a):
            return not evaluate(a, ienv, benv)
        case And(args):
            return all(evaluate(a, ienv, benv) for a in args)
        case Or(args):
            return any(evaluate(a, ienv, benv) for a in args)
        case Quant(_, v, _):
            raise ValueError(f"evaluate: residual quantifier over {v}")
        case _:
            raise TypeError(f"evaluate: unexpected node {f!r}")


def formula_size(f: Formula) -> int:
    match f:
        case Not(a):
            return 1 + formula_size(a)
        case And(args) | Or(args):
            return 1 + sum(formula_size(a) for a in args)
        case Quant(_, _, body):
            return 1 + formula_size(body)
        case _:
            return 1


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else abs(a or b)


__all__ = [
    "Lin",
    "Formula",
    "FTrue",
    "FFalse",
    "TRUE",
    "FALSE",
    "Le",
    "Eq",
    "Div",
    "BVar",
    "Not",
    "And",
    "Or",
    "Quant",
    "mk_le",
    "mk_eq",
    "mk_div",
    "mk_not",
    "mk_and",
    "mk_or",
    "mk_implies",
    "mk_iff",
    "mk_quant",
    "free_int_vars",
    "bool_vars",
    "subst_int",
    "subst_bool",
    "nnf",
    "evaluate",
    "formula_size",
    "lcm",
    "Fraction",
]
