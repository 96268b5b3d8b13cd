"""Conversion of parsed SMT-LIB2 terms into solver formulas.

Boolean terms become :class:`~hmlmc.solver.terms.Formula`; integer terms
become *guarded linear forms* — a list of ``(guard, Lin)`` branches whose
guards are mutually exclusive and exhaustive. Integer ``ite`` nodes multiply
branches; the guards are discharged when the integer lands in an atom:

    atom(f(ite(c, a, b)))  ~~>  (c and atom(f(a))) or (not c and atom(f(b)))

``let`` bindings are converted once in the outer environment and then shared
(SMT-LIB ``let`` is parallel). Quantified Bool variables are expanded by
substitution; Int quantifiers become :class:`Quant` nodes for the QE engine.

Multiplication is supported only when at most one operand is non-constant,
matching the linear fragment the rest of the package emits.
"""

from __future__ import annotations

from dataclasses import dataclass

from hmlmc.solver.terms import (
    FALSE,
    TRUE,
    BVar,
    Formula,
    Lin,
    mk_and,
    mk_div,
    mk_eq,
    mk_iff,
    mk_implies,
    mk_le,
    mk_not,
    mk_or,
    mk_quant,
)

_NUMERAL = frozenset("0123456789")


class ConvertError(Exception):
    """Raised on malformed or unsupported input terms."""


@dataclass(frozen=True, slots=True)
class GuardedInt:
    """An integer term as exclusive-and-exhaustive guarded linear branches."""

    branches: tuple[tuple[Formula, Lin], ...]

    @staticmethod
    def of_lin(lin: Lin) -> "GuardedInt":
        return GuardedInt(((TRUE, lin),))


Value = Formula | GuardedInt


def _is_numeral(tok: str) -> bool:
    # Signed numerals (``-2``) are accepted as the usual solver extension of
    # the strict SMT-LIB grammar.
    body = tok[1:] if tok.startswith("-") else tok
    return bool(body) and all(ch in _NUMERAL for ch in body)


def _zip_guards(xs: GuardedInt, ys: GuardedInt, fn) -> GuardedInt:
    """Cross-product combine of two guarded ints with a Lin x Lin -> Lin fn."""
    out = []
    for gx, lx in xs.branches:
        for gy, ly in ys.branches:
            g = mk_and([gx, gy])
            if g is FALSE:
                continue
            out.append((g, fn(lx, ly)))
    if not out:
        # Guards were exhaustive, so this cannot happen on well-formed input.
        raise ConvertError("empty guarded-int combination")
    return GuardedInt(tuple(out))


def _atom_over(xs: GuardedInt, ys: GuardedInt, mk_atom) -> Formula:
    """Discharge guards: disjunction of guard-conjoined atoms."""
    disjuncts = []
    for gx, lx in xs.branches:
        for gy, ly in ys.branches:
            g = mk_and([gx, gy])
            if g is FALSE:
                continue
            disjuncts.append(mk_and([g, mk_atom(lx, ly)]))
    return mk_or(disjuncts)


def _expect_int(v: Value, what: str) -> GuardedInt:
    if isinstance(v, GuardedInt):
        return v
    raise ConvertError(f"expected an Int term in {what}")


def _expect_bool(v: Value, what: str) -> Formula:
    if isinstance(v, Formula):
        return v
    raise ConvertError(f"expected a Bool term in {what}")


class Converter:
    """Term converter over a sort environment of declared constants."""

    def __init__(self, sorts: dict[str, str]):
        self.sorts = sorts  # name -> "Int" | "Bool"

    def bool(self, term, env: dict[str, Value] | None = None) -> Formula:
        return _expect_bool(self.convert(term, env or {}), "assertion")

    def convert(self, term, env: dict[str, Value]) -> Value:
        if isinstance(term, str):
            return self._symbol(term, env)
        if not isinstance(term, list) or not term:
            raise ConvertError(f"malformed term: {term!r}")
        head = term[0]
        if isinstance(head, list):
            # ((_ divisible n) t)
            if (
                len(head) == 3
                and head[0] == "_"
                and head[1] == "divisible"
                and isinstance(head[2], str)
                and _is_numeral(head[2])
                and len(term) == 2
            ):
                m = int(head[2])
                val = _expect_int(self.convert(term[1], env), "divisible")
                return mk_or(
                    [mk_and([g, mk_div(m, lin)]) for g, lin in val.branches]
                )
            raise ConvertError(f"unsupported application: {term!r}")
        args = term[1:]
        match head:
            case "let":
                return self._let(args, env)
            case "forall" | "exists":
                return self._quant(head == "forall", args, env)
            case "and":
                return mk_and([self.convert_bool(a, env) for a in args])
            case "or":
                return mk_or([self.convert_bool(a, env) for a in args])
            case "not":
                self._arity(args, 1, "not")
                return mk_not(self.convert_bool(args[0], env))
            case "=>":
                if len(args) < 2:
                    raise ConvertError("=> needs at least two arguments")
                out = self.convert_bool(args[-1], env)
                for a in reversed(args[:-1]):
                    out = mk_implies(self.convert_bool(a, env), out)
                return out
            case "xor":
                if len(args) < 2:
                    raise ConvertError("xor needs at least two arguments")
                out = self.convert_bool(args[0], env)
                for a in args[1:]:
                    out = mk_not(mk_iff(out, self.convert_bool(a, env)))
                return out
            case "=":
                return self._chain(args, env, self._eq2)
            case "distinct":
                return self._distinct(args, env)
            case "<=":
                return self._chain(args, env, lambda a, b: self._cmp(a, b, 0))
            case "<":
                return self._chain(args, env, lambda a, b: self._cmp(a, b, 1))
            case ">=":
                return self._chain(args, env, lambda a, b: self._cmp(b, a, 0))
            case ">":
                return self._chain(args, env, lambda a, b: self._cmp(b, a, 1))
            case "+":
                return self._nary_int(args, env, lambda a, b: a.add(b), "+")
            case "-":
                return self._minus(args, env)
            case "*":
                return self._mult(args, env)
            case "ite":
                return self._ite(args, env)
            case "_":
                raise ConvertError(f"unsupported indexed identifier: {term!r}")
            case _:
                raise ConvertError(f"unsupported operator: {head!r}")

    def convert_bool(self, term, env: dict[str, Value]) -> Formula:
        return _expect_bool(self.convert(term, env), f"{term!r}")

    def convert_int(self, term, env: dict[str, Value]) -> GuardedInt:
        return _expect_int(self.convert(term, env), f"{term!r}")

    # -- helpers ----------------------------------------------------------

    def _symbol(self, tok: str, env: dict[str, Value]) -> Value:
        if tok in env:
            return env[tok]
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if _is_numeral(tok):
            return GuardedInt.of_lin(Lin.of_const(int(tok)))
        sort = self.sorts.get(tok)
        if sort == "Int":
            return GuardedInt.of_lin(Lin.of_var(tok))
        if sort == "Bool":
            return BVar(tok)
        raise ConvertError(f"unknown constant: {tok}")

    def _arity(self, args, n: int, op: str) -> None:
        if len(args) != n:
            raise ConvertError(f"{op} expects {n} argument(s), got {len(args)}")

    def _let(self, args, env: dict[str, Value]) -> Value:
        self._arity(args, 2, "let")
        bindings, body = args
        if not isinstance(bindings, list):
            raise ConvertError("malformed let bindings")
        new_env = dict(env)
        for b in bindings:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise ConvertError(f"malformed let binding: {b!r}")
            # Parallel let: bound terms are converted in the outer env.
            new_env[b[0]] = self.convert(b[1], env)
        return self.convert(body, new_env)

    def _quant(self, forall: bool, args, env: dict[str, Value]) -> Formula:
        self._arity(args, 2, "forall" if forall else "exists")
        bindings, body = args
        if not isinstance(bindings, list) or not bindings:
            raise ConvertError("malformed quantifier bindings")
        parsed: list[tuple[str, str]] = []
        for b in bindings:
            if not (
                isinstance(b, list)
                and len(b) == 2
                and isinstance(b[0], str)
                and isinstance(b[1], str)
            ):
                raise ConvertError(f"malformed quantified variable: {b!r}")
            if b[1] not in ("Int", "Bool"):
                raise ConvertError(f"unsupported quantified sort: {b[1]}")
            parsed.append((b[0], b[1]))

        def build(i: int, env: dict[str, Value]) -> Formula:
            if i == len(parsed):
                return self.convert_bool(body, env)
            name, sort = parsed[i]
            if sort == "Bool":
                env_t = dict(env)
                env_t[name] = TRUE
                env_f = dict(env)
                env_f[name] = FALSE
                t = build(i + 1, env_t)
                f = build(i + 1, env_f)
                return mk_and([t, f]) if forall else mk_or([t, f])
            env_i = dict(env)
            env_i[name] = GuardedInt.of_lin(Lin.of_var(name))
            return mk_quant(forall, name, build(i + 1, env_i))

        return build(0, env)

    def _chain(self, args, env: dict[str, Value], fn) -> Formula:
        if len(args) < 2:
            raise ConvertError("comparison needs at least two arguments")
        vals = [self.convert(a, env) for a in args]
        return mk_and([fn(vals[i], vals[i + 1]) for i in range(len(vals) - 1)])

    def _eq2(self, a: Value, b: Value) -> Formula:
        if isinstance(a, Formula) and isinstance(b, Formula):
            return mk_iff(a, b)
        if isinstance(a, GuardedInt) and isinstance(b, GuardedInt):
            return _atom_over(a, b, lambda la, lb: mk_eq(la.sub(lb)))
        raise ConvertError("= applied to mixed sorts")

    def _cmp(self, a: Value, b: Value, strict_offset: int) -> Formula:
        # a <= b (+offset 0)  or  a < b (offset 1): a - b + offset <= 0
        ia = _expect_int(a, "comparison")
        ib = _expect_int(b, "comparison")
        return _atom_over(
            ia, ib, lambda la, lb: mk_le(la.sub(lb).add_const(strict_offset))
        )

    def _distinct(self, args, env: dict[str, Value]) -> Formula:
        if len(args) < 2:
            raise ConvertError("distinct needs at least two arguments")
        vals = [self.convert(a, env) for a in args]
        out = []
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                out.append(mk_not(self._eq2(vals[i], vals[j])))
        return mk_and(out)

    def _nary_int(self, args, env, fn, op: str) -> GuardedInt:
        if not args:
            raise ConvertError(f"{op} needs arguments")
        out = self.convert_int(args[0], env)
        for a in args[1:]:
            out = _zip_guards(out, self.convert_int(a, env), fn)
        return out

    def _minus(self, args, env) -> GuardedInt:
        if len(args) == 1:
            val = self.convert_int(args[0], env)
            return GuardedInt(tuple((g, lin.neg()) for g, lin in val.branches))
        return self._nary_int(args, env, lambda a, b: a.sub(b), "-")

    def _mult(self, args, env) -> GuardedInt:
        if len(args) < 2:
            raise ConvertError("* needs at least two arguments")
        vals = [self.convert_int(a, env) for a in args]
        const = 1
        sym: GuardedInt | None = None
        for v in vals:
            if len(v.branches) == 1 and v.branches[0][1].is_const():
                const *= v.branches[0][1].const
            elif sym is None:
                sym = v
            else:
                raise ConvertError("nonlinear multiplication")
        if sym is None:
            return GuardedInt.of_lin(Lin.of_const(const))
        return GuardedInt(
            tuple((g, lin.scale(const)) for g, lin in sym.branches)
        )

    def _ite(self, args, env) -> Value:
        self._arity(args, 3, "ite")
        cond = self.convert_bool(args[0], env)
        t = self.convert(args[1], env)
        e = self.convert(args[2], env)
        if cond is TRUE:
            return t
        if cond is FALSE:
            return e
        if isinstance(t, Formula) and isinstance(e, Formula):
            return mk_or([mk_and([cond, t]), mk_and([mk_not(cond), e])])
        if isinstance(t, GuardedInt) and isinstance(e, GuardedInt):
            ncond = mk_not(cond)
            branches = []
            for g, lin in t.branches:
                gg = mk_and([cond, g])
                if gg is not FALSE:
                    branches.append((gg, lin))
            for g, lin in e.branches:
                gg = mk_and([ncond, g])
                if gg is not FALSE:
                    branches.append((gg, lin))
            merged: list[tuple[Formula, Lin]] = []
            for g, lin in branches:
                for i, (g2, lin2) in enumerate(merged):
                    if lin2 == lin:
                        merged[i] = (mk_or([g2, g]), lin)
                        break
                else:
                    merged.append((g, lin))
            return GuardedInt(tuple(merged))
        raise ConvertError("ite branches have mixed sorts")


__all__ = ["Converter", "ConvertError", "GuardedInt", "Value"]
