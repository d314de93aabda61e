"""Decode solver witnesses back into annotated LF objects.

The term encoding erases Pi-domain annotations down to simple types, so
decoding is type-directed: lambda binders get their annotations back from
the expected type's Pi domains, and application spines are walked against
the head's declared classifier, substituting each decoded argument into
the remaining prefix.  Decoding is deliberately structural; it restores
shape and annotations but does not judge typing.  A decoded witness whose
target type disagrees with the query still comes back, and the checker is
the oracle that rejects it.
"""

from __future__ import annotations

from typing import Optional

from . import lfsyntax
from .hohh import Abs, App, Bound, Const, HTerm, MetaVar, spine
from .lfcheck import CheckReport, check_object
from .lfsyntax import LfContext, LfError, LfExpr, Pi, shift, subst_normalize


class DecodeError(LfError):
    pass


def decode(t: HTerm, expected: LfExpr, ctx: LfContext) -> LfExpr:
    """The LF object whose encoding is t, annotations read off expected.

    expected must be a canonical type; t must be a closed beta-eta-long
    term.  Raises DecodeError when t cannot be the encoding of any object
    at this shape: unbound metavariables, heads not declared in ctx, or
    spines that over- or under-run the head's Pi prefix.
    """
    return _decode(t, expected, ctx, [])


def _decode(t: HTerm, expected: LfExpr, ctx: LfContext, env: list[LfExpr]) -> LfExpr:
    """env holds the domains of enclosing binders, innermost first, each
    stored at its own binding depth."""
    match t:
        case Abs(hint, _, body):
            if not isinstance(expected, Pi):
                raise DecodeError(
                    "abstraction in the witness but the expected type has no "
                    "matching dependent product"
                )
            name = hint or expected.name or "x"
            dom = expected.domain
            inner = _decode(body, expected.body, ctx, [dom, *env])
            return lfsyntax.Lam(name, dom, inner)
        case MetaVar() as m:
            if m.ref is not None:
                return _decode(m.ref, expected, ctx, env)
            raise DecodeError(f"witness contains the unbound metavariable {m.name}")
    head, args = spine(t)
    classifier = _head_classifier(head, ctx, env)
    out: LfExpr
    match head:
        case Const(name, _, level):
            if level > 0:
                raise DecodeError(f"witness mentions the scoped constant {name}")
            out = lfsyntax.Var(name)
        case Bound(i):
            out = lfsyntax.Bound(i)
        case MetaVar() as m:
            if m.ref is None:
                raise DecodeError(
                    f"witness contains the unbound metavariable {m.name}"
                )
            return _decode(_reapply(m.ref, args), expected, ctx, env)
        case _:
            raise DecodeError(f"cannot decode head {head!r}")
    for a in args:
        if not isinstance(classifier, Pi):
            raise DecodeError(
                f"head {out} is applied to more arguments than its "
                "declared type provides"
            )
        arg = _decode(a, classifier.domain, ctx, env)
        classifier = subst_normalize(classifier.body, arg)
        out = lfsyntax.App(out, arg)
    if isinstance(classifier, Pi):
        raise DecodeError(f"head {out} is not fully applied")
    return out


def _reapply(head: HTerm, args: list[HTerm]) -> HTerm:
    for a in args:
        head = App(head, a)
    return head


def _head_classifier(head: HTerm, ctx: LfContext, env: list[LfExpr]) -> Optional[LfExpr]:
    match head:
        case Const(name, _, _):
            if name not in ctx:
                raise DecodeError(f"head constant {name} is not declared")
            return ctx.lookup(name).classifier
        case Bound(i):
            if i >= len(env):
                raise DecodeError(f"dangling bound index #{i} in witness")
            return shift(env[i], i + 1)
    return None


def verify_witness(ctx: LfContext, obj: LfExpr, ty: LfExpr) -> CheckReport:
    """The decoded witness is only as good as the checker says it is."""
    return check_object(ctx, obj, ty)
