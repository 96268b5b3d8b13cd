"""Recursive-descent parser for the contract language.

Grammar (statements and expressions follow Solidity surface syntax, restricted
to the fragment the checker supports):

    contract  ::= "contract" NAME "{" fielddecl* procdecl* "}"
    fielddecl ::= type NAME ";"
    type      ::= "bool" | "int" | "address"
                | "mapping" "(" "address" "=>" basetype ")"
    procdecl  ::= ("function" NAME | "constructor") "(" params ")" ["payable"]
                  "{" stmt* "}"
    stmt      ::= "require" "(" expr ")" ";"
                | NAME "=" expr ";"
                | NAME "[" expr "]" "=" expr ";"
                | expr "." "transfer" "(" expr ")" ";"
                | NAME "." NAME "(" exprs ")" ["value" expr] ";"
                | "if" "(" expr ")" block ["else" block]
                | ";"
"""
from __future__ import annotations

from hmlmc.contracts.ast import (
    ADDRESS,
    BOOL,
    INT,
    Assign,
    Balance,
    BaseType,
    Binop,
    BlockNumber,
    BoolLit,
    Call,
    ContractDecl,
    Expr,
    FieldDecl,
    If,
    IntLit,
    MapAssign,
    MapType,
    Null,
    Param,
    Procedure,
    Require,
    Sender,
    Skip,
    Stmt,
    This,
    Transfer,
    Type,
    Unop,
    Value,
    Var,
)
from hmlmc.contracts.lexer import Token, TokenStream, tokenize
from hmlmc.diag import fail

_BASE_TYPES = {"bool": BOOL, "int": INT, "address": ADDRESS}

# Names that may not be declared as fields, parameters, or procedures because
# the expression grammar gives them a fixed meaning.
RESERVED = {
    "balance", "sender", "value", "this", "null", "msg", "block",
    "transfer", "require", "if", "else", "function", "constructor",
    "contract", "payable", "mapping", "bool", "int", "address",
    "true", "false", "old", "last_reverted",
}


def parse_contract(text: str) -> ContractDecl:
    ts = TokenStream(tokenize(text))
    decl = _contract(ts)
    if not ts.at_kind("eof"):
        fail(f"unexpected `{ts.cur.text}` after contract body", ts.cur.span)
    return decl


def _contract(ts: TokenStream) -> ContractDecl:
    ts.expect("contract")
    name_tok = ts.expect_ident("contract name")
    _check_name(name_tok)
    ts.expect("{")

    fields: list[FieldDecl] = []
    while _at_type(ts):
        fields.append(_field(ts))

    procedures: list[Procedure] = []
    while ts.at("function") or ts.at("constructor"):
        procedures.append(_procedure(ts))

    close = ts.expect("}")

    seen_fields: set[str] = set()
    for f in fields:
        if f.name in seen_fields:
            fail(f"duplicate field `{f.name}`", f.span)
        seen_fields.add(f.name)
    seen_procs: set[str] = set()
    for p in procedures:
        if p.name in seen_procs:
            fail(f"duplicate procedure `{p.name}`", p.span)
        seen_procs.add(p.name)
    if "constructor" not in seen_procs:
        fail(f"contract `{name_tok.text}` has no constructor", close.span)

    return ContractDecl(
        name=name_tok.text,
        fields=tuple(fields),
        procedures=tuple(procedures),
        span=name_tok.span,
    )


def _at_type(ts: TokenStream) -> bool:
    return ts.cur.kind == "ident" and ts.cur.text in (*_BASE_TYPES, "mapping")


def _field(ts: TokenStream) -> FieldDecl:
    ty = _type(ts)
    name_tok = ts.expect_ident("field name")
    _check_name(name_tok)
    ts.expect(";")
    return FieldDecl(name=name_tok.text, ty=ty, span=name_tok.span)


def _type(ts: TokenStream) -> Type:
    tok = ts.next()
    if tok.text in _BASE_TYPES:
        return _BASE_TYPES[tok.text]
    if tok.text == "mapping":
        ts.expect("(")
        key = ts.next()
        if key.text != "address":
            fail("mapping keys must have type `address`", key.span)
        ts.expect("=>")
        value = _base_type(ts)
        ts.expect(")")
        return MapType(value)
    fail(f"expected a type, found `{tok.text}`", tok.span)
    raise AssertionError  # unreachable; fail() raises


def _base_type(ts: TokenStream) -> BaseType:
    tok = ts.next()
    if tok.text in _BASE_TYPES:
        return _BASE_TYPES[tok.text]
    fail(f"expected `bool`, `int`, or `address`, found `{tok.text}`", tok.span)
    raise AssertionError


def _procedure(ts: TokenStream) -> Procedure:
    if ts.accept("constructor"):
        name_tok = None
        name = "constructor"
        span = ts.cur.span
    else:
        ts.expect("function")
        name_tok = ts.expect_ident("procedure name")
        _check_name(name_tok)
        name = name_tok.text
        span = name_tok.span

    ts.expect("(")
    params: list[Param] = []
    if not ts.at(")"):
        while True:
            pty = _base_type(ts)
            ptok = ts.expect_ident("parameter name")
            _check_name(ptok)
            params.append(Param(name=ptok.text, ty=pty, span=ptok.span))
            if not ts.accept(","):
                break
    ts.expect(")")

    seen: set[str] = set()
    for p in params:
        if p.name in seen:
            fail(f"duplicate parameter `{p.name}`", p.span)
        seen.add(p.name)

    payable = ts.accept("payable")
    body = _block(ts)
    return Procedure(name=name, params=tuple(params), payable=payable,
                     body=body, span=span)


def _check_name(tok: Token) -> None:
    if tok.text in RESERVED:
        fail(f"`{tok.text}` is a reserved name", tok.span)


def _block(ts: TokenStream) -> tuple[Stmt, ...]:
    ts.expect("{")
    stmts: list[Stmt] = []
    while not ts.at("}"):
        stmts.append(_stmt(ts))
    ts.expect("}")
    return tuple(stmts)


def _stmt(ts: TokenStream) -> Stmt:
    tok = ts.cur

    if ts.accept(";"):
        return Skip(span=tok.span)

    if ts.at("require"):
        ts.next()
        ts.expect("(")
        cond = _expr(ts)
        ts.expect(")")
        ts.expect(";")
        return Require(cond=cond, span=tok.span)

    if ts.at("if"):
        ts.next()
        ts.expect("(")
        cond = _expr(ts)
        ts.expect(")")
        then = _block(ts)
        els: tuple[Stmt, ...] = ()
        if ts.accept("else"):
            els = _block(ts)
        return If(cond=cond, then=then, els=els, span=tok.span)

    # The remaining forms all start with an expression-ish prefix. Dispatch on
    # shape: `name = e;`, `name[k] = e;`, `e.transfer(n);`, `C.f(args);`.
    if ts.cur.kind == "ident" and ts.peek().text == "=" and ts.peek().kind == "punct":
        name_tok = ts.next()
        ts.next()  # "="
        expr = _expr(ts)
        ts.expect(";")
        return Assign(name=name_tok.text, expr=expr, span=name_tok.span)

    if ts.cur.kind == "ident" and ts.peek().text == "[" and ts.cur.text != "balance":
        name_tok = ts.next()
        ts.expect("[")
        key = _expr(ts)
        ts.expect("]")
        ts.expect("=")
        expr = _expr(ts)
        ts.expect(";")
        return MapAssign(name=name_tok.text, key=key, expr=expr,
                         span=name_tok.span)

    # Calls: `Name.proc(args) [value e];` where proc != transfer. Check before
    # parsing a general expression so the callee name is not swallowed.
    if (
        ts.cur.kind == "ident"
        and ts.peek().text == "."
        and ts.peek(2).kind == "ident"
        and ts.peek(2).text != "transfer"
        and ts.peek(3).text == "("
    ):
        callee_tok = ts.next()
        ts.next()  # "."
        proc_tok = ts.next()
        ts.expect("(")
        args: list[Expr] = []
        if not ts.at(")"):
            while True:
                args.append(_expr(ts))
                if not ts.accept(","):
                    break
        ts.expect(")")
        value: Expr = IntLit(value=0, span=tok.span)
        if ts.at("value"):
            ts.next()
            value = _expr(ts)
        ts.expect(";")
        return Call(contract=callee_tok.text, proc=proc_tok.text,
                    args=tuple(args), value=value, span=callee_tok.span)

    recipient = _expr(ts)
    ts.expect(".")
    kw = ts.expect_ident("`transfer`")
    if kw.text != "transfer":
        fail(f"expected `transfer`, found `{kw.text}`", kw.span)
    ts.expect("(")
    amount = _expr(ts)
    ts.expect(")")
    ts.expect(";")
    return Transfer(to=recipient, amount=amount, span=tok.span)


# --- expressions -----------------------------------------------------------
#
# Precedence, loosest first: ||  &&  ==/!=  </<=/>/>=  +/-  *  unary  postfix.

def _expr(ts: TokenStream) -> Expr:
    return _or(ts)


def _binop_chain(ts: TokenStream, ops: tuple[str, ...], sub) -> Expr:
    left = sub(ts)
    while ts.cur.kind == "punct" and ts.cur.text in ops:
        op = ts.next()
        right = sub(ts)
        left = Binop(op=op.text, left=left, right=right, span=op.span)
    return left


def _or(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("||",), _and)


def _and(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("&&",), _equality)


def _equality(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("==", "!="), _relational)


def _relational(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("<", "<=", ">", ">="), _additive)


def _additive(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("+", "-"), _multiplicative)


def _multiplicative(ts: TokenStream) -> Expr:
    return _binop_chain(ts, ("*",), _unary)


def _unary(ts: TokenStream) -> Expr:
    if ts.at("!"):
        op = ts.next()
        return Unop(op="!", operand=_unary(ts), span=op.span)
    if ts.at("-"):
        op = ts.next()
        return Unop(op="-", operand=_unary(ts), span=op.span)
    return _postfix(ts)


def _postfix(ts: TokenStream) -> Expr:
    expr = _primary(ts)
    while ts.at("["):
        open_tok = ts.next()
        key = _expr(ts)
        ts.expect("]")
        if isinstance(expr, Balance) and expr.owner is None:
            expr = Balance(owner=key, span=open_tok.span)
        elif isinstance(expr, Var):
            # Typechecking decides whether the name is really a map field.
            from hmlmc.contracts.ast import MapRead

            expr = MapRead(name=expr.name, key=key, span=expr.span)
        else:
            fail("only map fields and `balance` can be indexed", open_tok.span)
    return expr


def _primary(ts: TokenStream) -> Expr:
    tok = ts.cur

    if ts.accept("("):
        inner = _expr(ts)
        ts.expect(")")
        return inner

    if tok.kind == "int":
        ts.next()
        return IntLit(value=int(tok.text), span=tok.span)

    if tok.kind == "ident":
        ts.next()
        if tok.text in ("true", "false"):
            return BoolLit(value=tok.text == "true", span=tok.span)
        if tok.text == "null":
            return Null(span=tok.span)
        if tok.text == "balance":
            return Balance(owner=None, span=tok.span)
        if tok.text == "sender":
            return Sender(span=tok.span)
        if tok.text == "value":
            return Value(span=tok.span)
        if tok.text == "this":
            return This(span=tok.span)
        if tok.text == "msg":
            ts.expect(".")
            attr = ts.expect_ident("`sender` or `value`")
            if attr.text == "sender":
                return Sender(span=tok.span)
            if attr.text == "value":
                return Value(span=tok.span)
            fail(f"unknown attribute `msg.{attr.text}`", attr.span)
        if tok.text == "block":
            ts.expect(".")
            attr = ts.expect_ident("`number`")
            if attr.text != "number":
                fail(f"unknown attribute `block.{attr.text}`", attr.span)
            return BlockNumber(span=tok.span)
        return Var(name=tok.text, span=tok.span)

    found = tok.text or "end of input"
    fail(f"expected an expression, found `{found}`", tok.span)
    raise AssertionError
