"""Type checking for LF: context validity, kind inference, object typing.

The four judgment forms are values (`CtxOk`, `KindOk`, `FamKind`, `ObjType`)
so tests can speak about assertions directly.  Checking is syntax directed;
every rule application is recorded by name in the report's trace.  Dependent
result classifiers are beta-normalized as they are built, so premises that
demand equal types compare with plain alpha-equality (with an eta fallback
for inputs that are normal but not eta-long).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .lfsyntax import (
    TYPE,
    App,
    Bound,
    KindType,
    Lam,
    LfContext,
    LfError,
    LfExpr,
    Pi,
    Sort,
    Var,
    beta_normalize,
    canonicalize,
    close_over,
    open_with,
    sort_of,
    subst_normalize,
    to_str,
)

# ---------------------------------------------------------------------------
# assertions


@dataclass(frozen=True)
class CtxOk:
    ctx: LfContext


@dataclass(frozen=True)
class KindOk:
    ctx: LfContext
    kind: LfExpr


@dataclass(frozen=True)
class FamKind:
    ctx: LfContext
    family: LfExpr
    kind: LfExpr


@dataclass(frozen=True)
class ObjType:
    ctx: LfContext
    obj: LfExpr
    family: LfExpr


Assertion = Union[CtxOk, KindOk, FamKind, ObjType]


@dataclass(frozen=True)
class Failure:
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.detail}"


@dataclass
class CheckReport:
    ok: bool
    failure: Optional[Failure] = None
    rule_trace: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


class _Fail(Exception):
    def __init__(self, rule: str, detail: str):
        self.failure = Failure(rule, detail)


class _Trace:
    def __init__(self) -> None:
        self.rules: list[str] = []

    def add(self, rule: str) -> None:
        self.rules.append(rule)


# ---------------------------------------------------------------------------
# the checker


def _eq_families(ctx: LfContext, a: LfExpr, b: LfExpr) -> bool:
    """Alpha-equality of normalized families, eta-expanding on mismatch."""
    if a == b:
        return True
    try:
        return canonicalize(a, TYPE, ctx) == canonicalize(b, TYPE, ctx)
    except LfError:
        return False


def _open_binder(
    ctx: LfContext, hint: str, domain: LfExpr, body: LfExpr
) -> tuple[LfContext, str, LfExpr]:
    name = ctx.fresh(hint or "x")
    return ctx.extended(name, domain), name, open_with(body, Var(name))


def _check_kind(ctx: LfContext, k: LfExpr, tr: _Trace) -> None:
    match k:
        case KindType():
            tr.add("type-kind")
        case Pi(x, dom, cod):
            tr.add("pi-kind")
            dk = _infer_kind(ctx, dom, tr)
            if not isinstance(dk, KindType):
                raise _Fail("pi-kind", f"domain {to_str(dom)} has kind {to_str(dk)}, not type")
            inner, _, opened = _open_binder(ctx, x, beta_normalize(dom), cod)
            _check_kind(inner, opened, tr)
        case _:
            raise _Fail("kind", f"not a kind: {to_str(k)}")


def _infer_kind(ctx: LfContext, a: LfExpr, tr: _Trace) -> LfExpr:
    """Kind of a family, beta-normalized."""
    match a:
        case Var(n):
            tr.add("var-fam")
            if n not in ctx:
                raise _Fail("var-fam", f"{n} is not declared")
            entry = ctx.lookup(n)
            if sort_of(entry.classifier, ctx) is not Sort.KIND:
                raise _Fail("var-fam", f"{n} is an object, not a family")
            return beta_normalize(entry.classifier)
        case Pi(x, dom, cod):
            tr.add("pi-fam")
            dk = _infer_kind(ctx, dom, tr)
            if not isinstance(dk, KindType):
                raise _Fail("pi-fam", f"domain {to_str(dom)} has kind {to_str(dk)}, not type")
            inner, _, opened = _open_binder(ctx, x, beta_normalize(dom), cod)
            ck = _infer_kind(inner, opened, tr)
            if not isinstance(ck, KindType):
                raise _Fail("pi-fam", f"body {to_str(cod)} has kind {to_str(ck)}, not type")
            return TYPE
        case Lam(x, ann, body):
            tr.add("abs-fam")
            ak = _infer_kind(ctx, ann, tr)
            if not isinstance(ak, KindType):
                raise _Fail("abs-fam", f"annotation {to_str(ann)} has kind {to_str(ak)}, not type")
            ann_n = beta_normalize(ann)
            inner, name, opened = _open_binder(ctx, x, ann_n, body)
            bk = _infer_kind(inner, opened, tr)
            return Pi(x, ann_n, close_over(bk, name))
        case App(f, m):
            tr.add("app-fam")
            fk = _infer_kind(ctx, f, tr)
            if not isinstance(fk, Pi):
                raise _Fail("app-fam", f"{to_str(f)} has kind {to_str(fk)}, cannot be applied")
            _check_object(ctx, m, fk.domain, tr)
            return subst_normalize(fk.body, m)
        case _:
            raise _Fail("family", f"not a family: {to_str(a)}")


def _infer_type(ctx: LfContext, m: LfExpr, tr: _Trace) -> LfExpr:
    """Family of an object, beta-normalized."""
    match m:
        case Var(n):
            tr.add("var-obj")
            if n not in ctx:
                raise _Fail("var-obj", f"{n} is not declared")
            entry = ctx.lookup(n)
            if sort_of(entry.classifier, ctx) is not Sort.FAMILY:
                raise _Fail("var-obj", f"{n} is a family, not an object")
            return beta_normalize(entry.classifier)
        case Lam(x, ann, body):
            tr.add("abs-obj")
            ak = _infer_kind(ctx, ann, tr)
            if not isinstance(ak, KindType):
                raise _Fail("abs-obj", f"annotation {to_str(ann)} has kind {to_str(ak)}, not type")
            ann_n = beta_normalize(ann)
            inner, name, opened = _open_binder(ctx, x, ann_n, body)
            bt = _infer_type(inner, opened, tr)
            return Pi(x, ann_n, close_over(bt, name))
        case App(f, n):
            tr.add("app-obj")
            ft = _infer_type(ctx, f, tr)
            if not isinstance(ft, Pi):
                raise _Fail("app-obj", f"{to_str(f)} has type {to_str(ft)}, cannot be applied")
            _check_object(ctx, n, ft.domain, tr)
            return subst_normalize(ft.body, n)
        case Bound(i):
            raise _Fail("var-obj", f"dangling index #{i}")
        case _:
            raise _Fail("object", f"not an object: {to_str(m)}")


def _check_object(ctx: LfContext, m: LfExpr, a: LfExpr, tr: _Trace) -> None:
    got = _infer_type(ctx, m, tr)
    want = beta_normalize(a)
    if not _eq_families(ctx, got, want):
        raise _Fail(
            "obj-type",
            f"{to_str(m)} has type {to_str(got)}, expected {to_str(want)}",
        )


# ---------------------------------------------------------------------------
# public entry points


def check_context(ctx: LfContext) -> CheckReport:
    """Every declaration classified by a good kind or a Type-kinded family.

    Validity is memoized on the context object; the other entry points
    assume their context has already been checked.
    """
    cached = getattr(ctx, "_lf2hh_valid", None)
    if cached is not None:
        return cached
    tr = _Trace()
    tr.add("null-ctx")
    try:
        seen = LfContext()
        for entry in ctx:
            cl_sort = sort_of(entry.classifier, seen)
            if cl_sort is Sort.KIND:
                tr.add("kind-ctx")
                _check_kind(seen, entry.classifier, tr)
            elif cl_sort is Sort.FAMILY:
                tr.add("type-ctx")
                k = _infer_kind(seen, entry.classifier, tr)
                if not isinstance(k, KindType):
                    raise _Fail(
                        "type-ctx",
                        f"{entry.name} : {to_str(entry.classifier)} has kind "
                        f"{to_str(k)}, not type",
                    )
            else:
                raise _Fail("type-ctx", f"{entry.name} is classified by an object")
            seen = seen.extended(entry.name, entry.classifier)
        report = CheckReport(True, None, tuple(tr.rules))
    except (_Fail, LfError) as e:
        failure = e.failure if isinstance(e, _Fail) else Failure("context", str(e))
        report = CheckReport(False, failure, tuple(tr.rules))
    setattr(ctx, "_lf2hh_valid", report)
    return report


def infer_kind(ctx: LfContext, fam: LfExpr) -> tuple[CheckReport, Optional[LfExpr]]:
    """Kind of a family under a valid context; (report, normalized kind)."""
    tr = _Trace()
    try:
        k = _infer_kind(ctx, fam, tr)
        return CheckReport(True, None, tuple(tr.rules)), k
    except (_Fail, LfError) as e:
        failure = e.failure if isinstance(e, _Fail) else Failure("family", str(e))
        return CheckReport(False, failure, tuple(tr.rules)), None


def infer_type(ctx: LfContext, obj: LfExpr) -> tuple[CheckReport, Optional[LfExpr]]:
    """Type of an object under a valid context; (report, normalized family)."""
    tr = _Trace()
    try:
        a = _infer_type(ctx, obj, tr)
        return CheckReport(True, None, tuple(tr.rules)), a
    except (_Fail, LfError) as e:
        failure = e.failure if isinstance(e, _Fail) else Failure("object", str(e))
        return CheckReport(False, failure, tuple(tr.rules)), None


def check_object(ctx: LfContext, obj: LfExpr, fam: LfExpr) -> CheckReport:
    """Does obj inhabit fam?  fam must itself be Type-kinded."""
    tr = _Trace()
    try:
        _check_object(ctx, obj, fam, tr)
        return CheckReport(True, None, tuple(tr.rules))
    except (_Fail, LfError) as e:
        failure = e.failure if isinstance(e, _Fail) else Failure("object", str(e))
        return CheckReport(False, failure, tuple(tr.rules))


def check_assertion(a: Assertion) -> CheckReport:
    match a:
        case CtxOk(ctx):
            return check_context(ctx)
        case KindOk(ctx, kind):
            tr = _Trace()
            try:
                _check_kind(ctx, kind, tr)
                return CheckReport(True, None, tuple(tr.rules))
            except (_Fail, LfError) as e:
                failure = e.failure if isinstance(e, _Fail) else Failure("kind", str(e))
                return CheckReport(False, failure, tuple(tr.rules))
        case FamKind(ctx, family, kind):
            report, got = infer_kind(ctx, family)
            if not report.ok:
                return report
            want = beta_normalize(kind)
            if got != want:
                return CheckReport(
                    False,
                    Failure("fam-kind", f"kind {to_str(got)} differs from {to_str(want)}"),
                    report.rule_trace,
                )
            return report
        case ObjType(ctx, obj, family):
            return check_object(ctx, obj, family)
    raise TypeError(f"not an assertion: {a!r}")
