"""Evaluation-order rewrites for typed formulas.

`miniscope` narrows quantifier scopes without changing meaning: a binder is
pushed inside modalities whose label does not mention it, and into the one
conjunct that uses it. Both rewrites are equivalences here because the modal
relation is deterministic and left-total (a unique successor exists for every
label instance), so <l> commutes with quantification over variables free of
the label. Double negations introduced by the exists-desugaring are dropped,
and a `not (forall v. not phi)` sandwich is treated as the existential it
denotes so its binder can sink as well. Unused binders are eliminated only
for int/bool/address domains, which are never empty; proc and args domains
can be empty (a contract may declare nothing but a constructor), where
dropping a vacuous quantifier would flip its truth value.

Narrow scopes matter to the explicit-state oracle: once a quantifier sits
below a modality, successor states are computed once per label instance
instead of once per assignment of every outer binder, and the evaluator's
subformula memo gets keys small enough to hit.
"""
from __future__ import annotations

from dataclasses import replace

from hmlmc.properties.ast import (
    AddrConst,
    FAnd,
    FExpr,
    FieldRef,
    FModal,
    FNot,
    Formula,
    FForall,
    Label,
    LastReverted,
    MapRef,
    Old,
    PBalance,
    PBinop,
    PBlockNumber,
    PBool,
    PExpr,
    PInt,
    PNull,
    PUnop,
    VarRef,
)
from hmlmc.contracts.ast import ADDRESS, BOOL, INT

_ALWAYS_NONEMPTY = (INT, BOOL, ADDRESS)


def expr_free_uids(e: PExpr) -> frozenset[int]:
    if isinstance(e, VarRef):
        return frozenset((e.uid,))
    if isinstance(e, PUnop):
        return expr_free_uids(e.operand)
    if isinstance(e, PBinop):
        return expr_free_uids(e.left) | expr_free_uids(e.right)
    if isinstance(e, Old):
        return expr_free_uids(e.expr)
    if isinstance(e, MapRef):
        return expr_free_uids(e.key)
    if isinstance(e, PBalance):
        return expr_free_uids(e.owner) if e.owner is not None else frozenset()
    if isinstance(e, (PInt, PBool, PNull, AddrConst, FieldRef, PBlockNumber,
                      LastReverted)):
        return frozenset()
    raise TypeError(f"unknown property expression {type(e).__name__}")


def label_free_uids(label: Label) -> frozenset[int]:
    out = expr_free_uids(label.sender) | expr_free_uids(label.value)
    if label.proc_var is not None:
        out |= frozenset((label.proc_var.uid,))
    if label.args_var is not None:
        out |= frozenset((label.args_var.uid,))
    if label.args is not None:
        for a in label.args:
            out |= expr_free_uids(a)
    return out


def formula_free_uids(f: Formula) -> frozenset[int]:
    if isinstance(f, FExpr):
        return expr_free_uids(f.expr)
    if isinstance(f, FNot):
        return formula_free_uids(f.body)
    if isinstance(f, FAnd):
        return formula_free_uids(f.left) | formula_free_uids(f.right)
    if isinstance(f, FForall):
        return formula_free_uids(f.body) - {f.uid}
    if isinstance(f, FModal):
        return label_free_uids(f.label) | formula_free_uids(f.body)
    raise TypeError(f"unknown formula {type(f).__name__}")


def _is_exists(f: Formula) -> bool:
    """not (forall v. not phi) - the shape the exists-desugaring emits."""
    return (isinstance(f, FNot) and isinstance(f.body, FForall)
            and isinstance(f.body.body, FNot))


def miniscope(f: Formula) -> Formula:
    if isinstance(f, FExpr):
        return f
    if isinstance(f, FAnd):
        return replace(f, left=miniscope(f.left), right=miniscope(f.right))
    if isinstance(f, FModal):
        return replace(f, body=miniscope(f.body))
    if isinstance(f, FNot):
        body = miniscope(f.body)
        if isinstance(body, FNot):
            return body.body
        if isinstance(body, FForall) and isinstance(body.body, FNot):
            return _push(body, body.body.body, exists=True)
        return replace(f, body=body)
    if isinstance(f, FForall):
        return _push(f, miniscope(f.body), exists=False)
    raise TypeError(f"unknown formula {type(f).__name__}")


def _wrap(q: FForall, body: Formula, exists: bool) -> Formula:
    if exists:
        return FNot(body=replace(q, body=FNot(body=body, span=q.span)),
                    span=q.span)
    return replace(q, body=body)


def _push(q: FForall, body: Formula, exists: bool) -> Formula:
    """A formula equivalent to `forall q. body` (or `exists q. body`)."""
    uid = q.uid
    if uid not in formula_free_uids(body):
        if q.ctype in _ALWAYS_NONEMPTY:
            return body
        return _wrap(q, body, exists)
    if isinstance(body, FModal) and uid not in label_free_uids(body.label):
        return replace(body, body=_push(q, body.body, exists))
    if isinstance(body, FAnd):
        in_left = uid in formula_free_uids(body.left)
        in_right = uid in formula_free_uids(body.right)
        if in_left and not in_right:
            return replace(body, left=_push(q, body.left, exists))
        if in_right and not in_left:
            return replace(body, right=_push(q, body.right, exists))
        return _wrap(q, body, exists)
    if not exists and isinstance(body, FForall):
        return replace(body, body=_push(q, body.body, exists=False))
    if exists and _is_exists(body):
        inner = body.body  # the FForall of the sandwich
        pushed = _push(q, inner.body.body, exists=True)
        return FNot(body=replace(inner, body=FNot(body=pushed,
                                                  span=inner.span)),
                    span=body.span)
    return _wrap(q, body, exists)
