"""Integer feasibility for conjunctions of linear constraints.

The SAT core hands over a conjunction of *positive* constraints — ``lin <= 0``,
``lin = 0`` and ``m | lin`` (negations were compiled away structurally during
NNF). Divisibilities become equations with a fresh quotient variable whose
range interval propagation then derives from the dividend's.

Decision procedure, in order:

1. gcd test on equation rows (prunes parity-style infeasibilities);
2. interval propagation to a fixpoint — an empty interval is unsat;
3. if propagation bounds every variable into a reasonably small box,
   fail-first DFS enumeration inside the box, which is *complete*;
4. otherwise exact rational simplex (two-phase, Fraction arithmetic,
   Bland's rule) refined by branch-and-bound on fractional coordinates,
   with per-node propagation for pruning.

Branch-and-bound over unbounded integer polyhedra is not complete in
general; a node cap turns pathological cases into an honest ``unknown``
rather than a wrong answer. Conflicts are minimized with a deletion filter
so the SAT core learns short theory lemmas.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor

from hmlmc.solver.terms import Lin

# A constraint is ("le", lin) for lin <= 0, ("eq", lin) for lin = 0,
# or ("div", m, lin) for m | lin.
Constraint = tuple

DEFAULT_NODE_CAP = 4_000
FD_BOX_LIMIT = 60_000
FD_NODE_CAP = 150_000
CORE_TIME_BUDGET = 0.5  # seconds per deletion-filter sub-check


class TheoryBudget(Exception):
    """Node cap or deadline exhausted before a verdict was reached."""


@dataclass
class TheoryResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: dict[str, int] | None = None
    core: list[int] | None = None  # indices into the input constraint list


def _to_rows(cons: list[Constraint]) -> list[tuple[str, Lin]]:
    """Rewrite divisibilities as equations with fresh quotient variables."""
    rows: list[tuple[str, Lin]] = []
    for i, c in enumerate(cons):
        if c[0] == "div":
            _, m, lin = c
            q = f"__q{i}"
            rows.append(("eq", lin.add(Lin.of_var(q, -m))))
        else:
            rows.append((c[0], c[1]))
    return rows


def _gcd_infeasible(rows) -> bool:
    for kind, lin in rows:
        if kind == "eq":
            g = lin.content()
            if g == 0:
                if lin.const != 0:
                    return True
            elif lin.const % g != 0:
                return True
        elif lin.is_const() and lin.const > 0:
            return True
    return False


def _gauss_rows(rows) -> tuple[list, list[tuple[str, Lin]]]:
    """Substitute away unit-coefficient equation rows.

    Merging equations into the remaining rows lets the gcd test see
    combined congruences (e.g. ``x = 2z`` with ``4 | 3x + 3`` becomes
    ``4 | 6z + 3``, which has no solution). Returns the reduced rows and a
    substitution log to replay (in reverse) over any model found.
    """
    rows = list(rows)
    log: list[tuple[str, Lin]] = []
    while True:
        hit = None
        for idx, (kind, lin) in enumerate(rows):
            if kind != "eq":
                continue
            for v, c in lin.terms:
                if c in (1, -1):
                    rhs = lin.drop(v)
                    rhs = rhs.neg() if c == 1 else rhs
                    hit = (idx, v, rhs)
                    break
            if hit:
                break
        if hit is None:
            return rows, log
        idx, v, rhs = hit
        out = []
        for j, (kind, lin) in enumerate(rows):
            if j == idx:
                continue
            out.append((kind, lin.subst(v, rhs)))
        rows = out
        log.append((v, rhs))


# ---------------------------------------------------------------------------
# Interval propagation
# ---------------------------------------------------------------------------

Bounds = dict[str, list]  # var -> [lo | None, hi | None]


def _le_view(rows) -> list[Lin]:
    """All information as lin <= 0 rows (equations contribute both sides)."""
    les = []
    for kind, lin in rows:
        les.append(lin)
        if kind == "eq":
            les.append(lin.neg())
    return les


def _propagate(les: list[Lin], bounds: Bounds) -> bool:
    """Tighten bounds to a fixpoint; False means an empty interval."""
    for lin in les:
        for v in lin.vars():
            bounds.setdefault(v, [None, None])
    changed = True
    rounds = 0
    while changed and rounds < 80:
        changed = False
        rounds += 1
        for lin in les:
            for v, a in lin.terms:
                # a*v <= -const - sum over other terms' minima
                rest_min = 0
                ok = True
                for u, b in lin.terms:
                    if u == v:
                        continue
                    ulo, uhi = bounds[u]
                    if b > 0:
                        if ulo is None:
                            ok = False
                            break
                        rest_min += b * ulo
                    else:
                        if uhi is None:
                            ok = False
                            break
                        rest_min += b * uhi
                if not ok:
                    continue
                rhs = -lin.const - rest_min
                cur = bounds[v]
                if a > 0:
                    hi = rhs // a
                    if cur[1] is None or hi < cur[1]:
                        cur[1] = hi
                        changed = True
                else:
                    lo = -(rhs // (-a))
                    if cur[0] is None or lo > cur[0]:
                        cur[0] = lo
                        changed = True
                if (
                    cur[0] is not None
                    and cur[1] is not None
                    and cur[0] > cur[1]
                ):
                    return False
    return True


# ---------------------------------------------------------------------------
# Finite-domain search (complete once every variable is boxed)
# ---------------------------------------------------------------------------


def _rows_ok(rows, env) -> bool:
    for kind, lin in rows:
        val = lin.evaluate(lambda v: env[v])
        if kind == "le" and val > 0:
            return False
        if kind == "eq" and val != 0:
            return False
    return True


def _fd_search(
    rows,
    les: list[Lin],
    bounds: Bounds,
    deadline: float | None,
    node_cap: int,
) -> tuple[str, dict[str, int] | None]:
    nodes = [0]

    def rec(bnds: Bounds) -> dict[str, int] | None:
        nodes[0] += 1
        if nodes[0] > node_cap:
            raise TheoryBudget("finite-domain node cap exceeded")
        if nodes[0] % 512 == 0 and deadline is not None:
            if time.monotonic() > deadline:
                raise TheoryBudget("deadline exceeded in theory solver")
        # Fail-first: smallest non-singleton range.
        pick = None
        width = None
        for v, (lo, hi) in bnds.items():
            if lo == hi:
                continue
            w = hi - lo
            if width is None or w < width:
                width = w
                pick = v
        if pick is None:
            env = {v: lo for v, (lo, _) in bnds.items()}
            return env if _rows_ok(rows, env) else None
        lo, hi = bnds[pick]
        for val in range(lo, hi + 1):
            child = {v: list(b) for v, b in bnds.items()}
            child[pick] = [val, val]
            if not _propagate(les, child):
                continue
            got = rec(child)
            if got is not None:
                return got
        return None

    model = rec(bounds)
    if model is None:
        return "unsat", None
    return "sat", model


# ---------------------------------------------------------------------------
# Rational simplex + branch-and-bound (fallback for unbounded systems)
# ---------------------------------------------------------------------------


def _rational_feasible(rows) -> dict[str, Fraction] | None:
    """Two-phase simplex feasibility; returns a rational point or None."""
    const_ok = True
    live_rows = []
    for kind, lin in rows:
        if lin.is_const():
            if kind == "le" and lin.const > 0:
                const_ok = False
            if kind == "eq" and lin.const != 0:
                const_ok = False
        else:
            live_rows.append((kind, lin))
    if not const_ok:
        return None
    names = sorted({v for _, lin in rows for v in lin.vars()})
    if not live_rows:
        return {v: Fraction(0) for v in names}
    rows = live_rows

    vidx = {v: i for i, v in enumerate(names)}
    nv = len(names)
    nle = sum(1 for k, _ in rows if k == "le")
    nr = len(rows)
    # Columns: xp/xn pairs, slacks, artificials, rhs.
    ncols = 2 * nv + nle + nr + 1
    F0 = Fraction(0)
    F1 = Fraction(1)

    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    art_cols: set[int] = set()
    si = 0
    for r, (kind, lin) in enumerate(rows):
        row = [F0] * ncols
        for v, c in lin.terms:
            row[2 * vidx[v]] = Fraction(c)
            row[2 * vidx[v] + 1] = Fraction(-c)
        rhs = Fraction(-lin.const)
        slack_col = None
        if kind == "le":
            slack_col = 2 * nv + si
            row[slack_col] = F1
            si += 1
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        row[-1] = rhs
        if slack_col is not None and row[slack_col] == F1:
            basis.append(slack_col)
        else:
            ac = 2 * nv + nle + r
            row[ac] = F1
            basis.append(ac)
            art_cols.add(ac)
        tableau.append(row)

    # Phase-I cost row: minimize the sum of artificials. cost[-1] holds -z.
    cost = [F0] * ncols
    for r in range(nr):
        if basis[r] in art_cols:
            for j in range(ncols):
                cost[j] -= tableau[r][j]

    n_enterable = 2 * nv + nle  # artificials never re-enter

    while True:
        enter = -1
        for j in range(n_enterable):
            if cost[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for r in range(nr):
            a = tableau[r][enter]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[r] < basis[leave]
                ):
                    best = ratio
                    leave = r
        if leave < 0:
            # Phase-I objective is bounded below by zero; no unbounded ray.
            raise AssertionError("phase-I unbounded")
        piv = tableau[leave][enter]
        tableau[leave] = [x / piv for x in tableau[leave]]
        prow = tableau[leave]
        for r in range(nr):
            if r != leave:
                f = tableau[r][enter]
                if f:
                    tableau[r] = [x - f * p for x, p in zip(tableau[r], prow)]
        f = cost[enter]
        if f:
            cost = [x - f * p for x, p in zip(cost, prow)]
        basis[leave] = enter

    if -cost[-1] > 0:
        return None

    vals = [F0] * ncols
    for r, b in enumerate(basis):
        vals[b] = tableau[r][-1]
    return {v: vals[2 * i] - vals[2 * i + 1] for v, i in vidx.items()}


def _branch_and_bound(
    rows,
    node_cap: int,
    deadline: float | None,
) -> tuple[str, dict[str, int] | None]:
    base_len = len(rows)
    stack = [rows]
    nodes = 0
    while stack:
        nodes += 1
        if nodes > node_cap:
            raise TheoryBudget("branch-and-bound node cap exceeded")
        if deadline is not None and time.monotonic() > deadline:
            raise TheoryBudget("deadline exceeded in theory solver")
        cur = stack.pop()
        if len(cur) - base_len > 96:
            # Runaway branching depth: exact coefficients blow up and each
            # node's simplex grows; give up honestly instead.
            raise TheoryBudget("branch-and-bound depth cap exceeded")
        if _gcd_infeasible(cur):
            continue
        bounds: Bounds = {}
        if not _propagate(_le_view(cur), bounds):
            continue
        sol = _rational_feasible(cur)
        if sol is None:
            continue
        frac_var = None
        for v in sorted(sol):
            if sol[v].denominator != 1:
                frac_var = v
                break
        if frac_var is None:
            return "sat", {v: int(x) for v, x in sol.items()}
        val = sol[frac_var]
        lo = floor(val)
        hi = ceil(val)
        # Explore x <= floor first: keeps witness values small.
        stack.append(cur + [("le", Lin.of_var(frac_var, -1).add_const(hi))])
        stack.append(cur + [("le", Lin.of_var(frac_var).add_const(-lo))])
    return "unsat", None


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _decide(
    rows,
    node_cap: int,
    deadline: float | None,
) -> tuple[str, dict[str, int] | None]:
    rows, log = _gauss_rows(rows)
    if _gcd_infeasible(rows):
        return "unsat", None
    les = _le_view(rows)
    bounds: Bounds = {}
    if not _propagate(les, bounds):
        return "unsat", None
    box = 1
    finite = True
    for lo, hi in bounds.values():
        if lo is None or hi is None:
            finite = False
            break
        box *= hi - lo + 1
        if box > FD_BOX_LIMIT:
            finite = False
            break
    if finite:
        status, model = _fd_search(rows, les, bounds, deadline, FD_NODE_CAP)
    else:
        status, model = _branch_and_bound(rows, node_cap, deadline)
    if status == "sat":
        for v, rhs in reversed(log):
            model[v] = rhs.evaluate(lambda u: model.get(u, 0))
    return status, model


def theory_check(
    cons: list[Constraint],
    node_cap: int = DEFAULT_NODE_CAP,
    deadline: float | None = None,
    want_core: bool = True,
) -> TheoryResult:
    """Decide a conjunction of constraints; minimize the core when unsat."""
    rows = _to_rows(cons)
    try:
        status, sol = _decide(rows, node_cap, deadline)
    except TheoryBudget:
        return TheoryResult("unknown")
    if status == "sat":
        model = {v: x for v, x in sol.items() if not v.startswith("__q")}
        return TheoryResult("sat", model=model)

    if not want_core:
        return TheoryResult("unsat", core=list(range(len(cons))))

    # Deletion filter. Keeping a constraint on an "unknown" sub-check is
    # sound: the kept set only ever shrinks while provably unsat. Each
    # sub-check gets its own small time budget so minimization can never
    # dominate solving.
    keep = list(range(len(cons)))
    i = 0
    while i < len(keep):
        trial = keep[:i] + keep[i + 1 :]
        sub = _to_rows([cons[j] for j in trial])
        sub_deadline = time.monotonic() + CORE_TIME_BUDGET
        if deadline is not None:
            sub_deadline = min(sub_deadline, deadline)
        try:
            sub_status, _ = _decide(sub, node_cap, sub_deadline)
        except TheoryBudget:
            sub_status = "unknown"
        if sub_status == "unsat":
            keep = trial
        else:
            i += 1
    return TheoryResult("unsat", core=keep)


__all__ = [
    "Constraint",
    "TheoryResult",
    "TheoryBudget",
    "theory_check",
    "DEFAULT_NODE_CAP",
]
