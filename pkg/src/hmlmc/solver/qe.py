"""Quantifier elimination for linear integer arithmetic (Cooper's method).

Quantifiers are eliminated innermost-first; universals go through the usual
double negation. Before the full Cooper construction runs, two shortcuts
keep the common cases cheap:

- disjunctions distribute (``exists x (A or B)`` splits), and conjuncts not
  mentioning ``x`` are hoisted out;
- a conjunct ``x = t`` with unit coefficient substitutes ``t`` directly —
  the dominant shape produced by freeze variables in property encodings.

The core follows Cooper: scale ``x``-atoms to coefficient +-1 (adding the
``lcm | x`` divisibility), then build the B-set disjunction over lower
bounds (or the dual over upper bounds, whichever set is smaller) together
with the minus-infinity formula over one full period of the divisibility
constraints. Equalities on ``x`` are expanded into two inequalities first.

Intermediate growth is bounded by a size cap; exceeding it raises
:class:`QeBlowup`, which the solver surfaces as ``unknown`` rather than
grinding forever.
"""

from __future__ import annotations

from hmlmc.solver.terms import (
    FALSE,
    TRUE,
    And,
    BVar,
    Div,
    Eq,
    FFalse,
    FTrue,
    Formula,
    Le,
    Lin,
    Not,
    Or,
    Quant,
    formula_size,
    free_int_vars,
    lcm,
    mk_and,
    mk_div,
    mk_eq,
    mk_le,
    mk_not,
    mk_or,
    nnf,
    subst_int,
)


class QeBlowup(Exception):
    """Raised when elimination exceeds the configured size budget."""


DEFAULT_SIZE_CAP = 400_000


def eliminate_quants(f: Formula, size_cap: int = DEFAULT_SIZE_CAP) -> Formula:
    """Eliminate all quantifiers from an NNF formula."""
    match f:
        case Quant(forall, v, body):
            inner = eliminate_quants(body, size_cap)
            if forall:
                neg = _elim_exists(v, nnf(mk_not(inner)), size_cap)
                return nnf(mk_not(neg))
            return _elim_exists(v, inner, size_cap)
        case And(args):
            return mk_and([eliminate_quants(a, size_cap) for a in args])
        case Or(args):
            return mk_or([eliminate_quants(a, size_cap) for a in args])
        case Not(a):
            return mk_not(eliminate_quants(a, size_cap))
        case _:
            return f


def _elim_exists(x: str, f: Formula, cap: int) -> Formula:
    if isinstance(f, (FTrue, FFalse)) or x not in free_int_vars(f):
        return f
    if isinstance(f, Or):
        return mk_or([_elim_exists(x, d, cap) for d in f.args])
    if isinstance(f, And):
        # Unit-equality shortcut: exists x (x = t and rest) -> rest[t/x].
        for a in f.args:
            if isinstance(a, Eq):
                c = a.lin.coef(x)
                if c in (1, -1):
                    # c*x + r = 0  =>  x = -r/c
                    rhs = a.lin.drop(x)
                    rhs = rhs.neg() if c == 1 else rhs
                    rest = [subst_int(b, x, rhs) for b in f.args if b is not a]
                    return mk_and(rest)
        with_x = [a for a in f.args if x in free_int_vars(a)]
        without = [a for a in f.args if x not in free_int_vars(a)]
        if without:
            return mk_and(without + [_elim_exists(x, mk_and(with_x), cap)])
    return _cooper(x, f, cap)


def _map_x_atoms(f: Formula, x: str, on_le, on_eq, on_div) -> Formula:
    match f:
        case Le(lin):
            return on_le(lin) if lin.coef(x) else f
        case Eq(lin):
            return on_eq(lin) if lin.coef(x) else f
        case Div(m, lin):
            return on_div(m, lin) if lin.coef(x) else f
        case Not(a):
            return mk_not(_map_x_atoms(a, x, on_le, on_eq, on_div))
        case And(args):
            return mk_and([_map_x_atoms(a, x, on_le, on_eq, on_div) for a in args])
        case Or(args):
            return mk_or([_map_x_atoms(a, x, on_le, on_eq, on_div) for a in args])
        case _:
            return f


def _collect_x_atoms(f: Formula, x: str, les: list, divs: list) -> None:
    match f:
        case Le(lin):
            if lin.coef(x):
                les.append(lin)
        case Eq(lin):
            if lin.coef(x):
                raise AssertionError("equality on eliminated var not expanded")
        case Div(m, lin):
            if lin.coef(x):
                divs.append((m, lin))
        case Not(a):
            _collect_x_atoms(a, x, les, divs)
        case And(args) | Or(args):
            for a in args:
                _collect_x_atoms(a, x, les, divs)


def _cooper(x: str, f: Formula, cap: int) -> Formula:
    # Equalities on x become two inequalities (the unit shortcut has already
    # been tried at the conjunction level).
    f = _map_x_atoms(
        f,
        x,
        on_le=mk_le,
        on_eq=lambda lin: mk_and([mk_le(lin), mk_le(lin.neg())]),
        on_div=mk_div,
    )
    les: list[Lin] = []
    divs: list[tuple[int, Lin]] = []
    _collect_x_atoms(f, x, les, divs)
    if not les and not divs:
        return f

    lam = 1
    for lin in les:
        lam = lcm(lam, abs(lin.coef(x)))
    for _, lin in divs:
        lam = lcm(lam, abs(lin.coef(x)))

    # Scale every x-atom so x's coefficient is +1 (uppers: x + r <= 0) or
    # -1 (lowers: -x + r <= 0); divisibilities are normalized to +1.
    def scale_le(lin: Lin) -> Formula:
        a = lin.coef(x)
        s = lam // abs(a)
        scaled = lin.drop(x).scale(s)
        sign = 1 if a > 0 else -1
        return Le(scaled.add(Lin.of_var(x, sign)))

    def scale_div(m: int, lin: Lin) -> Formula:
        a = lin.coef(x)
        s = lam // abs(a)
        scaled = lin.scale(s)
        if a < 0:
            scaled = scaled.neg()
        return Div(m * s, scaled.drop(x).add(Lin.of_var(x, 1)))

    f = _map_x_atoms(f, x, on_le=scale_le, on_eq=lambda lin: lin, on_div=scale_div)
    if lam > 1:
        f = mk_and([f, Div(lam, Lin.of_var(x))])

    uppers: list[Lin] = []  # x <= -r   from  x + r <= 0
    lowers: list[Lin] = []  # x >= r class    from -x + r <= 0
    moduli = [lam]
    les, divs = [], []
    _collect_x_atoms(f, x, les, divs)
    for lin in les:
        if lin.coef(x) == 1:
            uppers.append(lin)
        else:
            lowers.append(lin)
    for m, _ in divs:
        moduli.append(m)

    delta = 1
    for m in moduli:
        delta = lcm(delta, m)

    # Work with the smaller bound set; the dual uses upper bounds and
    # candidates b - j via the reflection x := -x.
    use_lower = len(lowers) <= len(uppers)
    if not use_lower:
        f = _map_x_atoms(
            f,
            x,
            on_le=lambda lin: Le(lin.subst(x, Lin.of_var(x, -1))),
            on_eq=lambda lin: lin,
            on_div=lambda m, lin: mk_div(m, lin.subst(x, Lin.of_var(x, -1))),
        )
        bounds = [lin.drop(x) for lin in uppers]
        # After reflection, old uppers (x + r <= 0) became lowers
        # (-x + r <= 0), i.e. x >= r: bound term r.
    else:
        bounds = [lin.drop(x) for lin in lowers]

    # Minus-infinity formula: uppers true, lowers false, divisibilities kept.
    f_inf = _map_x_atoms(
        f,
        x,
        on_le=lambda lin: TRUE if lin.coef(x) == 1 else FALSE,
        on_eq=lambda lin: lin,
        on_div=mk_div,
    )

    disjuncts: list[Formula] = []
    total = 0
    for j in range(delta):
        disjuncts.append(subst_int(f_inf, x, Lin.of_const(j)))
        for b in bounds:
            d = subst_int(f, x, b.add_const(j))
            total += formula_size(d)
            if total > cap:
                raise QeBlowup(
                    f"quantifier elimination exceeded {cap} nodes on {x}"
                )
            disjuncts.append(d)
    return mk_or(disjuncts)


__all__ = ["eliminate_quants", "QeBlowup", "DEFAULT_SIZE_CAP"]
