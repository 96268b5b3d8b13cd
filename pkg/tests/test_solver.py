"""Tests for the built-in QLIA solver.

The heavy lifting is differential: random formulas whose variables are
range-bounded *inside the formula* are decided both by the solver pipeline
and by exhaustive enumeration over that range, which is exact — bounding
makes the enumeration a complete oracle, not an approximation. Models
returned on sat are additionally replayed through the ground evaluator.
"""

from __future__ import annotations

import random

import pytest

from hmlmc.solver.api import SolverContext, gauss_eliminate
from hmlmc.solver.main import Session
from hmlmc.solver.preprocess import Converter
from hmlmc.solver.qe import eliminate_quants
from hmlmc.solver.sat import solve_ground
from hmlmc.solver.sexpr import SExprError, StreamReader, parse_all, to_text
from hmlmc.solver.terms import (
    FALSE,
    TRUE,
    BVar,
    Div,
    Eq,
    Formula,
    Le,
    Lin,
    Not,
    Quant,
    evaluate,
    free_int_vars,
    mk_and,
    mk_div,
    mk_eq,
    mk_le,
    mk_not,
    mk_or,
    mk_quant,
    nnf,
)
from hmlmc.solver.theory import theory_check

# ---------------------------------------------------------------------------
# Linear expressions and constructors
# ---------------------------------------------------------------------------


def test_lin_algebra():
    a = Lin.make({"x": 2, "y": -1}, 3)
    b = Lin.make({"x": -2, "z": 4}, -3)
    s = a.add(b)
    assert s == Lin.make({"y": -1, "z": 4}, 0)
    assert a.sub(a) == Lin.of_const(0)
    assert a.scale(3) == Lin.make({"x": 6, "y": -3}, 9)
    assert a.subst("x", Lin.make({"y": 1}, 5)) == Lin.make({"y": 1}, 13)
    assert a.coef("x") == 2 and a.coef("w") == 0
    assert a.evaluate(lambda v: {"x": 1, "y": 2}[v]) == 3


def test_mk_le_gcd_tightening():
    # 2x + 3 <= 0  <=>  x <= -2  <=>  x + 2 <= 0
    f = mk_le(Lin.make({"x": 2}, 3))
    assert f == Le(Lin.make({"x": 1}, 2))
    # constants fold
    assert mk_le(Lin.of_const(0)) is TRUE
    assert mk_le(Lin.of_const(1)) is FALSE
    assert mk_le(Lin.of_const(-5)) is TRUE


def test_mk_eq_folds():
    assert mk_eq(Lin.of_const(0)) is TRUE
    assert mk_eq(Lin.of_const(2)) is FALSE
    # 2x + 1 = 0 has no integer solution
    assert mk_eq(Lin.make({"x": 2}, 1)) is FALSE
    # 2x + 4 = 0 normalizes to x + 2 = 0
    assert mk_eq(Lin.make({"x": 2}, 4)) == Eq(Lin.make({"x": 1}, 2))
    # canonical sign: leading coefficient positive
    assert mk_eq(Lin.make({"x": -1}, 3)) == mk_eq(Lin.make({"x": 1}, -3))


def test_mk_div_normalization():
    assert mk_div(1, Lin.of_var("x")) is TRUE
    assert mk_div(4, Lin.of_const(8)) is TRUE
    assert mk_div(4, Lin.of_const(6)) is FALSE
    # 4 | 2x  <=>  2 | x
    assert mk_div(4, Lin.make({"x": 2}, 0)) == Div(2, Lin.of_var("x"))
    # coefficients reduce mod m: 5x = x (mod 4) is wrong, 5 mod 4 = 1
    assert mk_div(4, Lin.make({"x": 5}, 0)) == Div(4, Lin.of_var("x"))


def test_connective_folds():
    x = mk_le(Lin.make({"x": 1}, 0))
    assert mk_and([TRUE, x]) == x
    assert mk_and([FALSE, x]) is FALSE
    assert mk_or([FALSE, x]) == x
    assert mk_or([TRUE, x]) is TRUE
    assert mk_and([x, mk_not(x)]) is FALSE
    assert mk_or([x, mk_not(x)]) is TRUE
    assert mk_not(mk_not(x)) == x
    # nested flattening
    inner = mk_and([x, BVar("b")])
    assert mk_and([inner, BVar("c")]).args == (x, BVar("b"), BVar("c"))


def test_nnf_eliminates_atom_negations():
    x = Lin.make({"x": 1}, -3)
    f = mk_not(mk_and([Le(x), Eq(x), Div(3, x), BVar("b")]))
    g = nnf(f)

    def no_bad_not(h: Formula) -> bool:
        match h:
            case Not(arg):
                return isinstance(arg, BVar)
            case _ if hasattr(h, "args"):
                return all(no_bad_not(a) for a in h.args)
            case Quant(_, _, body):
                return no_bad_not(body)
            case _:
                return True

    assert no_bad_not(g)
    # semantics preserved on a sample of points
    for xv in range(-2, 8):
        for bv in (False, True):
            assert evaluate(g, {"x": xv}, {"b": bv}) == (
                not evaluate(f.arg, {"x": xv}, {"b": bv})
            )


# ---------------------------------------------------------------------------
# Random formula generation (range-bounded => enumeration is exact)
# ---------------------------------------------------------------------------

LO, HI = -4, 5


def _rand_lin(rng: random.Random, vars_: list[str]) -> Lin:
    n = rng.randint(1, min(3, len(vars_)))
    chosen = rng.sample(vars_, n)
    return Lin.make(
        {v: rng.choice([-3, -2, -1, 1, 2, 3]) for v in chosen},
        rng.randint(-8, 8),
    )


def _rand_atom(rng: random.Random, ivars: list[str], bvars: list[str]) -> Formula:
    kind = rng.random()
    if bvars and kind < 0.15:
        b = BVar(rng.choice(bvars))
        return b if rng.random() < 0.5 else mk_not(b)
    lin = _rand_lin(rng, ivars)
    if kind < 0.55:
        return mk_le(lin)
    if kind < 0.8:
        return mk_eq(lin)
    return mk_div(rng.choice([2, 3, 4]), lin)


def _rand_formula(
    rng: random.Random, ivars: list[str], bvars: list[str], depth: int
) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        return _rand_atom(rng, ivars, bvars)
    op = rng.random()
    if op < 0.4:
        return mk_and(
            [_rand_formula(rng, ivars, bvars, depth - 1) for _ in range(2)]
        )
    if op < 0.8:
        return mk_or(
            [_rand_formula(rng, ivars, bvars, depth - 1) for _ in range(2)]
        )
    return mk_not(_rand_formula(rng, ivars, bvars, depth - 1))


def _range_formula(var: str) -> Formula:
    return mk_and(
        [
            mk_le(Lin.make({var: -1}, LO)),  # var >= LO
            mk_le(Lin.make({var: 1}, -HI)),  # var <= HI
        ]
    )


def _brute_quant(f: Formula, ienv: dict[str, int], benv: dict[str, bool]) -> bool:
    """Evaluate with quantifiers enumerated over [LO, HI] (exact for
    formulas whose quantified bodies are range-bounded)."""
    match f:
        case Quant(forall, v, body):
            vals = []
            for k in range(LO, HI + 1):
                env = dict(ienv)
                env[v] = k
                vals.append(_brute_quant(body, env, benv))
            return all(vals) if forall else any(vals)
        case Not(a):
            return not _brute_quant(a, ienv, benv)
        case _ if hasattr(f, "args"):
            sub = [_brute_quant(a, ienv, benv) for a in f.args]
            return all(sub) if f.__class__.__name__ == "And" else any(sub)
        case _:
            return evaluate(f, ienv, benv)


def test_cooper_differential_bounded():
    """Cooper elimination agrees with exhaustive enumeration."""
    rng = random.Random(20260817)
    free = ["u", "w"]
    checked = 0
    for _ in range(220):
        qvar = "q0"
        body = mk_and(
            [_range_formula(qvar), _rand_formula(rng, [qvar] + free, [], 2)]
        )
        forall = rng.random() < 0.5
        if forall:
            # forall q in range -> phi  (bounded): not(range) or phi
            body = mk_or(
                [nnf(mk_not(_range_formula(qvar))), _rand_formula(rng, [qvar] + free, [], 2)]
            )
        quant = mk_quant(forall, qvar, nnf(body))
        if not isinstance(quant, Quant):
            continue
        result = eliminate_quants(nnf(quant))
        assert not free_int_vars(result) - set(free)
        for _ in range(6):
            ienv = {v: rng.randint(LO, HI) for v in free}
            got = evaluate(result, ienv, {}) if not isinstance(result, Quant) else None
            want = _brute_quant(quant, ienv, {})
            assert got == want, (quant, ienv, result)
            checked += 1
    assert checked > 900


def test_cooper_nested_quantifiers():
    rng = random.Random(99)
    free = ["u"]
    for _ in range(60):
        inner_var, outer_var = "qi", "qo"
        raw = _rand_formula(rng, [inner_var, outer_var] + free, [], 2)
        inner_forall = rng.random() < 0.5
        # Bounded-quantifier shapes that agree between Z and [LO, HI]:
        # exists q (range and phi)   /   forall q (not range or phi)
        if inner_forall:
            inner_body = mk_or([nnf(mk_not(_range_formula(inner_var))), raw])
        else:
            inner_body = mk_and([_range_formula(inner_var), raw])
        inner = mk_quant(inner_forall, inner_var, inner_body)
        outer = mk_quant(True, outer_var, mk_or(
            [nnf(mk_not(_range_formula(outer_var))), inner]
        ))
        f = nnf(outer)
        result = eliminate_quants(f)
        for _ in range(4):
            ienv = {v: rng.randint(LO, HI) for v in free}
            want = _brute_quant(f, ienv, {})
            got = evaluate(result, ienv, {})
            assert got == want, (f, ienv)


def test_cooper_unbounded_divisibility():
    # exists x: 3x ≡ u (mod ...) style: x unbounded but divisibility-driven.
    # exists x (2x = u)  <=>  2 | u
    x_eq = mk_eq(Lin.make({"x": 2, "u": -1}, 0))
    res = eliminate_quants(nnf(mk_quant(False, "x", x_eq)))
    for u in range(-6, 7):
        assert evaluate(res, {"u": u}, {}) == (u % 2 == 0)
    # exists x (x >= u and 3 | x): always true
    f = mk_quant(
        False,
        "x",
        mk_and([mk_le(Lin.make({"u": 1, "x": -1}, 0)), mk_div(3, Lin.of_var("x"))]),
    )
    res = eliminate_quants(nnf(f))
    for u in range(-6, 7):
        assert evaluate(res, {"u": u}, {}) is True
    # forall x (x <= u or x >= u + 2): false for every u (x = u+1 escapes)
    f = mk_quant(
        True,
        "x",
        mk_or(
            [
                mk_le(Lin.make({"x": 1, "u": -1}, 0)),
                mk_le(Lin.make({"x": -1, "u": 1}, 2)),
            ]
        ),
    )
    res = eliminate_quants(nnf(f))
    for u in range(-4, 5):
        assert evaluate(res, {"u": u}, {}) is False


# ---------------------------------------------------------------------------
# Theory solver
# ---------------------------------------------------------------------------


def _brute_consistent(cons, lo=-6, hi=6) -> bool:
    vars_ = sorted({v for c in cons for v in c[-1].vars()})

    def rec(i, env):
        if i == len(vars_):
            for c in cons:
                if c[0] == "le" and c[1].evaluate(lambda v: env[v]) > 0:
                    return False
                if c[0] == "eq" and c[1].evaluate(lambda v: env[v]) != 0:
                    return False
                if c[0] == "div" and c[2].evaluate(lambda v: env[v]) % c[1] != 0:
                    return False
            return True
        for k in range(lo, hi + 1):
            env[vars_[i]] = k
            if rec(i + 1, env):
                return True
        return False

    return rec(0, {})


def test_theory_differential():
    rng = random.Random(7)
    vars_ = ["x", "y", "z"]
    agreements = 0
    for _ in range(250):
        cons = []
        # Bound all variables so enumeration is exact.
        for v in vars_:
            cons.append(("le", Lin.make({v: -1}, -6)))
            cons.append(("le", Lin.make({v: 1}, -6)))
        for _ in range(rng.randint(1, 5)):
            lin = _rand_lin(rng, vars_)
            k = rng.random()
            if k < 0.5:
                cons.append(("le", lin))
            elif k < 0.8:
                cons.append(("eq", lin))
            else:
                cons.append(("div", rng.choice([2, 3, 4]), lin))
        res = theory_check(cons)
        assert res.status in ("sat", "unsat")
        want = _brute_consistent(cons)
        assert (res.status == "sat") == want, cons
        if res.status == "sat":
            env = res.model
            for c in cons:
                if c[0] == "le":
                    assert c[1].evaluate(lambda v: env.get(v, 0)) <= 0
                elif c[0] == "eq":
                    assert c[1].evaluate(lambda v: env.get(v, 0)) == 0
                else:
                    assert c[2].evaluate(lambda v: env.get(v, 0)) % c[1] == 0
        else:
            # The core must itself be infeasible.
            core_cons = [cons[i] for i in res.core]
            assert not _brute_consistent(core_cons)
        agreements += 1
    assert agreements == 250


def test_theory_gcd_cases():
    # 2x = 2y + 1: rationally feasible, integrally infeasible.
    res = theory_check([("eq", Lin.make({"x": 2, "y": -2}, -1))])
    assert res.status == "unsat"
    # 6 | 2x+3 is unsatisfiable (gcd(2,6) does not divide 3 shifted: 2x+3 odd)
    res = theory_check([("div", 2, Lin.make({"x": 2}, 3))])
    assert res.status == "unsat"


def test_theory_unbounded_sat():
    # x >= 1000000 alone: solvable far from the origin.
    res = theory_check([("le", Lin.make({"x": -1}, 1_000_000))])
    assert res.status == "sat"
    assert res.model["x"] >= 1_000_000


# ---------------------------------------------------------------------------
# Ground CDCL(T)
# ---------------------------------------------------------------------------


def test_ground_differential():
    rng = random.Random(4242)
    ivars = ["x", "y"]
    bvars = ["p", "r"]
    for _ in range(250):
        core = _rand_formula(rng, ivars, bvars, 3)
        f = mk_and([_range_formula(v) for v in ivars] + [core])
        f = nnf(f)
        if f is TRUE or f is FALSE:
            continue
        status, ienv, benv = solve_ground(f)
        assert status in ("sat", "unsat")
        # Exhaustive check over the bounded space.
        want = False
        for xv in range(LO, HI + 1):
            for yv in range(LO, HI + 1):
                for pv in (False, True):
                    for rv in (False, True):
                        if evaluate(
                            f, {"x": xv, "y": yv}, {"p": pv, "r": rv}
                        ):
                            want = True
        assert (status == "sat") == want, f
        if status == "sat":
            env_i = {v: ienv.get(v, 0) for v in ivars}
            env_b = {v: benv.get(v, False) for v in bvars}
            assert evaluate(f, env_i, env_b)


def test_gauss_eliminate_models_reconstruct():
    rng = random.Random(11)
    for _ in range(80):
        # chain: a = inputs, b = a + k, c = b - a ... mimics unrolled steps
        f = mk_and(
            [
                mk_eq(Lin.make({"b": 1, "a": -1}, -rng.randint(0, 5))),
                mk_eq(Lin.make({"c": 1, "b": -1, "a": 1}, 0)),
                mk_le(Lin.make({"a": -1}, 0)),
                mk_le(Lin.make({"a": 1}, -7)),
                mk_le(Lin.make({"c": 1}, -9)),
            ]
        )
        red, log = gauss_eliminate(f)
        # Both equalities must be consumed (which variable each one solves
        # for is the algorithm's choice).
        assert len(log) == 2 or red is FALSE
        status, ienv, benv = solve_ground(red) if red not in (TRUE, FALSE) else (
            ("sat", {}, {}) if red is TRUE else ("unsat", {}, {})
        )
        if status == "sat":
            full = dict(ienv)
            for v, rhs in reversed(log):
                full[v] = rhs.evaluate(lambda u: full.get(u, 0))
            for v in ("a", "b", "c"):
                full.setdefault(v, 0)
            assert evaluate(f, full, {})


# ---------------------------------------------------------------------------
# S-expression layer
# ---------------------------------------------------------------------------


def test_parse_roundtrip():
    text = '(assert (= x (+ 1 (- 2)))) (check-sat) ; comment\n(echo "hi ""there""")'
    forms = parse_all(text)
    assert forms[1] == ["check-sat"]
    assert to_text(forms[0]) == "(assert (= x (+ 1 (- 2))))"


def test_stream_reader_incremental():
    r = StreamReader()
    assert r.feed("(assert (= x ") == []
    assert r.feed("1)") == []
    got = r.feed(")\n(check-sat)")
    assert got == [["assert", ["=", "x", "1"]], ["check-sat"]]


def test_stream_reader_rejects_garbage():
    r = StreamReader()
    with pytest.raises(SExprError):
        r.feed(")")


# ---------------------------------------------------------------------------
# Full pipeline through the SMT-LIB session
# ---------------------------------------------------------------------------


def _run_script(text: str) -> list[str]:
    session = Session()
    out = []
    for form in parse_all(text):
        reply = session.execute(form)
        if reply is not None:
            out.append(reply)
    return out


def test_session_basic():
    out = _run_script(
        """
        (set-logic ALL)
        (declare-const x Int)
        (declare-const b Bool)
        (assert (and (<= 0 x) (<= x 5)))
        (push 1)
        (assert (ite b (= x 7) (= x 3)))
        (check-sat)
        (get-value (x b))
        (pop 1)
        (push 1)
        (assert (> x 5))
        (check-sat)
        (pop 1)
        (check-sat)
        """
    )
    assert out == ["sat", "((x 3) (b false))", "unsat", "sat"]


def test_session_quantified():
    out = _run_script(
        """
        (declare-const n Int)
        (assert (<= 0 n))
        (assert (<= n 20))
        (assert (forall ((i Int))
          (=> (and (<= 0 i) (< i n)) (exists ((j Int)) (= (+ j j) (+ i i))))))
        (check-sat)
        (push 1)
        (assert (forall ((i Int))
          (=> (and (<= 0 i) (< i n)) (exists ((j Int)) (= (+ j j) i)))))
        (assert (>= n 2))
        (check-sat)
        (pop 1)
        """
    )
    assert out == ["sat", "unsat"]


def test_session_errors_are_recoverable():
    out = _run_script(
        """
        (declare-const x Int)
        (assert (= x (select a i)))
        (assert (= x 2))
        (check-sat)
        (get-value (x))
        """
    )
    assert out[0].startswith("(error")
    assert out[1] == "sat"
    assert out[2] == "((x 2))"


def test_session_scoped_declarations():
    out = _run_script(
        """
        (push 1)
        (declare-const t Int)
        (assert (= t 4))
        (check-sat)
        (pop 1)
        (push 1)
        (declare-const t Int)
        (assert (= t 9))
        (check-sat)
        (get-value (t))
        (pop 1)
        """
    )
    assert out == ["sat", "sat", "((t 9))"]


def test_session_define_fun():
    out = _run_script(
        """
        (declare-const x Int)
        (define-fun twice () Int (+ x x))
        (assert (= twice 10))
        (check-sat)
        (get-value (x twice))
        """
    )
    assert out == ["sat", "((x 5) (twice 10))"]


def test_timeout_produces_unknown():
    ctx = SolverContext(timeout_ms=1)
    conv_vars = [f"v{i}" for i in range(40)]
    for v in conv_vars:
        ctx.declare_const(v, "Int")
    conv = Converter(ctx._all_sorts())
    rng = random.Random(5)
    # A large pseudo-random system; the point is only that a 1ms budget
    # cannot finish and the answer degrades to unknown, not wrong.
    for _ in range(60):
        lhs = ["+"] + [
            ["*", str(rng.randint(1, 9)), rng.choice(conv_vars)] for _ in range(5)
        ]
        ctx.assert_term(["<=", lhs, str(rng.randint(0, 50))])
        ctx.assert_term([">=", lhs, ["-", str(rng.randint(0, 50))]])
    for v in conv_vars[:10]:
        ctx.assert_term(
            ["or", ["=", v, "3"], ["=", v, "7"], ["<=", ["+", v, "1"], "0"]]
        )
    assert ctx.check_sat() in ("sat", "unsat", "unknown")
