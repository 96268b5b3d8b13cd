"""Parser for `.hml` property files.

    file     ::= ("property" NAME "{" formula "}")*
    formula  ::= ("forall" | "exists") binders "." formula
               | disjunct ("->" formula)?                  // right-assoc
    binders  ::= NAME ":" ctype ("," NAME ":" ctype)*
    ctype    ::= "bool" | "int" | "address" | "proc" | "args"
    disjunct ::= conjunct ("||" conjunct)*
    conjunct ::= prefix ("&&" prefix)*
    prefix   ::= "!" prefix | modal prefix | atom
    modal    ::= "<" additive "," [NAME "."] NAME "(" pexprs ")" ","
                 additive ">"
    atom     ::= pexpr                                     // must be bool
               | "(" formula ")"                           // if not a pexpr

`exists`, `||`, and `->` are desugared on the spot:

    exists x: T. phi  =>  !(forall x: T. !phi)
    phi || psi        =>  !(!phi && !psi)
    phi -> psi        =>  !(phi && !psi)

A parenthesized atom is first tried as a property expression (so that
`(a + b) == c` works); if that parse fails it is re-parsed as a formula.
Modal sender/value positions use the additive level so that the closing `>`
is never mistaken for a comparison.
"""
from __future__ import annotations

from typing import Optional

from hmlmc.contracts.ast import BOOL, INT, ADDRESS
from hmlmc.contracts.lexer import TokenStream, tokenize
from hmlmc.diag import FrontendError, fail
from hmlmc.properties.ast import (
    ARGS,
    PROC,
    CType,
    FAnd,
    FExpr,
    FForall,
    FModal,
    FNot,
    Formula,
    Label,
    LastReverted,
    Name,
    Old,
    PBalance,
    PBinop,
    PBlockNumber,
    PExpr,
    PBool,
    PInt,
    PNull,
    Property,
    PUnop,
    Qualified,
)

_CTYPES: dict[str, CType] = {
    "bool": BOOL, "int": INT, "address": ADDRESS, "proc": PROC, "args": ARGS,
}

_KEYWORDS = {
    "property", "forall", "exists", "old", "last_reverted", "balance",
    "null", "block", "bool", "int", "address", "proc", "args", "true",
    "false",
}


def parse_properties(text: str) -> list[Property]:
    ts = TokenStream(tokenize(text))
    props: list[Property] = []
    seen: set[str] = set()
    while not ts.at_kind("eof"):
        ts.expect("property")
        name_tok = ts.expect_ident("property name")
        if name_tok.text in seen:
            fail(f"duplicate property `{name_tok.text}`", name_tok.span)
        seen.add(name_tok.text)
        ts.expect("{")
        formula = _formula(ts)
        ts.expect("}")
        props.append(Property(name=name_tok.text, formula=formula,
                              span=name_tok.span))
    return props


def _formula(ts: TokenStream) -> Formula:
    if ts.at("forall") or ts.at("exists"):
        head = ts.next()
        binders: list[tuple] = []
        while True:
            name_tok = ts.expect_ident("variable name")
            if name_tok.text in _KEYWORDS:
                fail(f"`{name_tok.text}` cannot be a variable name",
                     name_tok.span)
            ts.expect(":")
            ty_tok = ts.expect_ident("a type")
            if ty_tok.text not in _CTYPES:
                fail(f"unknown type `{ty_tok.text}`", ty_tok.span)
            binders.append((name_tok.text, _CTYPES[ty_tok.text],
                            name_tok.span))
            if not ts.accept(","):
                break
        ts.expect(".")
        body = _formula(ts)
        for name, ctype, span in reversed(binders):
            quantified = FForall(var=name, ctype=ctype, body=body, span=span)
            if head.text == "exists":
                quantified = FNot(
                    body=FForall(var=name, ctype=ctype,
                                 body=FNot(body=body, span=span), span=span),
                    span=span)
            body = quantified
        return body

    left = _disjunct(ts)
    if ts.at("->"):
        arrow = ts.next()
        right = _formula(ts)  # right-associative
        return FNot(body=FAnd(left=left, right=FNot(body=right,
                                                    span=arrow.span),
                              span=arrow.span), span=arrow.span)
    return left


def _disjunct(ts: TokenStream) -> Formula:
    left = _conjunct(ts)
    while ts.at("||"):
        op = ts.next()
        right = _conjunct(ts)
        left = FNot(body=FAnd(left=FNot(body=left, span=op.span),
                              right=FNot(body=right, span=op.span),
                              span=op.span), span=op.span)
    return left


def _conjunct(ts: TokenStream) -> Formula:
    left = _prefix(ts)
    while ts.at("&&"):
        op = ts.next()
        right = _prefix(ts)
        left = FAnd(left=left, right=right, span=op.span)
    return left


def _prefix(ts: TokenStream) -> Formula:
    if ts.at("!"):
        op = ts.next()
        return FNot(body=_prefix(ts), span=op.span)
    if ts.at("<"):
        return _modal(ts)
    return _atom(ts)


def _modal(ts: TokenStream) -> Formula:
    open_tok = ts.expect("<")
    sender = _additive(ts)
    ts.expect(",")

    first = ts.expect_ident("a procedure or contract name")
    contract: Optional[str] = None
    proc = first.text
    if ts.accept("."):
        contract = first.text
        proc = ts.expect_ident("a procedure name").text
    ts.expect("(")
    args: list[PExpr] = []
    if not ts.at(")"):
        while True:
            args.append(_pexpr(ts))
            if not ts.accept(","):
                break
    ts.expect(")")

    ts.expect(",")
    value = _additive(ts)
    ts.expect(">")
    body = _prefix(ts)
    label = Label(sender=sender, contract=contract, proc=proc,
                  args=tuple(args), value=value, span=open_tok.span)
    return FModal(label=label, body=body, span=open_tok.span)


def _atom(ts: TokenStream) -> Formula:
    if ts.at("("):
        mark = ts.mark()
        try:
            expr = _pexpr(ts)
            return FExpr(expr=expr, span=expr.span)
        except FrontendError:
            ts.reset(mark)
            ts.expect("(")
            inner = _formula(ts)
            ts.expect(")")
            return inner
    expr = _pexpr(ts)
    return FExpr(expr=expr, span=expr.span)


# --- property expressions ----------------------------------------------------
# Precedence: ==/!= and relational share one non-associative comparison level
# above additive; chaining like `a < b < c` is rejected by the checker (bool
# compared with int), matching the contract language's two separate levels
# closely enough for the shapes properties actually use.

def _pexpr(ts: TokenStream) -> PExpr:
    left = _additive(ts)
    if ts.cur.kind == "punct" and ts.cur.text in ("==", "!=", "<", "<=",
                                                  ">", ">="):
        op = ts.next()
        right = _additive(ts)
        return PBinop(op=op.text, left=left, right=right, span=op.span)
    return left


def _additive(ts: TokenStream) -> PExpr:
    left = _multiplicative(ts)
    while ts.cur.kind == "punct" and ts.cur.text in ("+", "-"):
        op = ts.next()
        right = _multiplicative(ts)
        left = PBinop(op=op.text, left=left, right=right, span=op.span)
    return left


def _multiplicative(ts: TokenStream) -> PExpr:
    left = _unary(ts)
    while ts.cur.kind == "punct" and ts.cur.text == "*":
        op = ts.next()
        right = _unary(ts)
        left = PBinop(op="*", left=left, right=right, span=op.span)
    return left


def _unary(ts: TokenStream) -> PExpr:
    if ts.at("-"):
        op = ts.next()
        return PUnop(op="-", operand=_unary(ts), span=op.span)
    if ts.at("!"):
        op = ts.next()
        return PUnop(op="!", operand=_unary(ts), span=op.span)
    return _postfix(ts)


def _postfix(ts: TokenStream) -> PExpr:
    expr = _primary(ts)
    while ts.at("["):
        open_tok = ts.next()
        key = _pexpr(ts)
        ts.expect("]")
        if isinstance(expr, PBalance) and expr.owner is None:
            expr = PBalance(owner=key, span=open_tok.span)
        elif isinstance(expr, Name):
            expr = Qualified(contract="", name=expr.name, key=key,
                             span=expr.span)
        elif isinstance(expr, Qualified) and expr.key is None:
            expr = Qualified(contract=expr.contract, name=expr.name, key=key,
                             span=expr.span)
        else:
            fail("only map fields and `balance` can be indexed",
                 open_tok.span)
    return expr


def _primary(ts: TokenStream) -> PExpr:
    tok = ts.cur

    if ts.accept("("):
        inner = _pexpr(ts)
        ts.expect(")")
        return inner

    if tok.kind == "int":
        ts.next()
        return PInt(value=int(tok.text), span=tok.span)

    if tok.kind == "ident":
        ts.next()
        if tok.text in ("true", "false"):
            return PBool(value=tok.text == "true", span=tok.span)
        if tok.text == "null":
            return PNull(span=tok.span)
        if tok.text == "last_reverted":
            return LastReverted(span=tok.span)
        if tok.text == "balance":
            return PBalance(owner=None, span=tok.span)
        if tok.text == "old":
            ts.expect("(")
            inner = _pexpr(ts)
            ts.expect(")")
            return Old(expr=inner, span=tok.span)
        if tok.text == "block":
            ts.expect(".")
            attr = ts.expect_ident("`number`")
            if attr.text != "number":
                fail(f"unknown attribute `block.{attr.text}`", attr.span)
            return PBlockNumber(span=tok.span)
        if ts.at(".") and ts.peek().kind == "ident":
            ts.next()
            attr = ts.expect_ident("a field name")
            return Qualified(contract=tok.text, name=attr.text, key=None,
                             span=tok.span)
        return Name(name=tok.text, span=tok.span)

    found = tok.text or "end of input"
    fail(f"expected an expression, found `{found}`", tok.span)
    raise AssertionError
