"""Dependently typed LF terms and the operations the rest of the toolkit leans on.

Terms use a locally nameless representation: bound variables are de Bruijn
indices (`Bound`), free variables and signature constants are named (`Var`).
Binders keep a display hint that is ignored by equality, so `==` is
alpha-equivalence.  One `LfExpr` union covers kinds, type families and
objects; `sort_of` recovers which of the three a term is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional, Union

DEFAULT_FUEL = 10**6


class LfError(Exception):
    """Base class for everything raised out of the LF layer."""


class SortError(LfError):
    """A term landed in a position its sort cannot occupy."""


class NonTerminationGuard(LfError):
    """beta_normalize ran out of fuel; the input is likely ill-typed."""


class ClassifierError(LfError):
    """A term does not fit the classifier it was canonicalized against."""


class UnboundVariable(LfError):
    """A named variable has no declaration, or an index has no binder."""


class DuplicateName(LfError):
    """A context already declares this name."""


@dataclass(frozen=True)
class KindType:
    """The kind `type` that classifies type families."""

    def __str__(self) -> str:
        return "type"


@dataclass(frozen=True)
class Var:
    """Free variable: a reference into some LfContext by name."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bound:
    """de Bruijn index, innermost binder is 0."""

    index: int

    def __str__(self) -> str:
        return f"#{self.index}"


@dataclass(frozen=True)
class Pi:
    """Dependent product {x:domain} body; binds Bound(0) in body."""

    name: str = field(compare=False)
    domain: "LfExpr"
    body: "LfExpr"

    def __str__(self) -> str:
        return to_str(self)


@dataclass(frozen=True)
class Lam:
    """Abstraction [x:annot] body; binds Bound(0) in body."""

    name: str = field(compare=False)
    annot: "LfExpr"
    body: "LfExpr"

    def __str__(self) -> str:
        return to_str(self)


@dataclass(frozen=True)
class App:
    fn: "LfExpr"
    arg: "LfExpr"

    def __str__(self) -> str:
        return to_str(self)


LfExpr = Union[KindType, Var, Bound, Pi, Lam, App]

TYPE = KindType()


class Sort(Enum):
    KIND = "kind"
    FAMILY = "family"
    OBJECT = "object"


# ---------------------------------------------------------------------------
# index plumbing


def shift(e: LfExpr, by: int, cutoff: int = 0) -> LfExpr:
    """Add `by` to every index >= cutoff."""
    match e:
        case Bound(i):
            return Bound(i + by) if i >= cutoff else e
        case Var() | KindType():
            return e
        case App(f, a):
            return App(shift(f, by, cutoff), shift(a, by, cutoff))
        case Lam(x, t, b):
            return Lam(x, shift(t, by, cutoff), shift(b, by, cutoff + 1))
        case Pi(x, t, b):
            return Pi(x, shift(t, by, cutoff), shift(b, by, cutoff + 1))
    raise TypeError(f"not an LfExpr: {e!r}")


def open_with(body: LfExpr, value: LfExpr, depth: int = 0) -> LfExpr:
    """Instantiate the binder the body hangs under: Bound(depth) := value."""
    match body:
        case Bound(i):
            if i == depth:
                return shift(value, depth)
            return Bound(i - 1) if i > depth else body
        case Var() | KindType():
            return body
        case App(f, a):
            return App(open_with(f, value, depth), open_with(a, value, depth))
        case Lam(x, t, b):
            return Lam(x, open_with(t, value, depth), open_with(b, value, depth + 1))
        case Pi(x, t, b):
            return Pi(x, open_with(t, value, depth), open_with(b, value, depth + 1))
    raise TypeError(f"not an LfExpr: {body!r}")


def close_over(e: LfExpr, name: str, depth: int = 0) -> LfExpr:
    """Turn the free variable `name` back into Bound(depth)."""
    match e:
        case Var(n):
            return Bound(depth) if n == name else e
        case Bound(i):
            return Bound(i + 1) if i >= depth else e
        case KindType():
            return e
        case App(f, a):
            return App(close_over(f, name, depth), close_over(a, name, depth))
        case Lam(x, t, b):
            return Lam(x, close_over(t, name, depth), close_over(b, name, depth + 1))
        case Pi(x, t, b):
            return Pi(x, close_over(t, name, depth), close_over(b, name, depth + 1))
    raise TypeError(f"not an LfExpr: {e!r}")


def free_vars(e: LfExpr) -> set[str]:
    match e:
        case Var(n):
            return {n}
        case Bound() | KindType():
            return set()
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Lam(_, t, b) | Pi(_, t, b):
            return free_vars(t) | free_vars(b)
    raise TypeError(f"not an LfExpr: {e!r}")


def spine(e: LfExpr) -> tuple[LfExpr, list[LfExpr]]:
    """Split nested applications into (head, [arg, ...])."""
    args: list[LfExpr] = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def apply_spine(head: LfExpr, args: list[LfExpr]) -> LfExpr:
    for a in args:
        head = App(head, a)
    return head


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class CtxEntry:
    name: str
    classifier: LfExpr  # a kind for family declarations, a family for objects


class LfContext:
    """Ordered declarations, later entries may mention earlier names."""

    def __init__(self, entries: tuple[CtxEntry, ...] = ()):
        self._entries = entries
        self._index = {}
        for entry in entries:
            if entry.name in self._index:
                raise DuplicateName(f"{entry.name} is declared twice")
            self._index[entry.name] = entry

    @property
    def entries(self) -> tuple[CtxEntry, ...]:
        return self._entries

    def __iter__(self) -> Iterator[CtxEntry]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def lookup(self, name: str) -> CtxEntry:
        try:
            return self._index[name]
        except KeyError:
            raise UnboundVariable(f"{name} is not declared") from None

    def extended(self, name: str, classifier: LfExpr) -> "LfContext":
        if name in self._index:
            raise DuplicateName(f"{name} is declared twice")
        return LfContext(self._entries + (CtxEntry(name, classifier),))

    def fresh(self, hint: str) -> str:
        """A name not declared here, based on the hint."""
        if hint and hint not in self._index:
            return hint
        base = hint or "x"
        i = 1
        while f"{base}{i}" in self._index:
            i += 1
        return f"{base}{i}"

    def __repr__(self) -> str:
        return f"LfContext({', '.join(e.name for e in self._entries)})"


# ---------------------------------------------------------------------------
# sorts


def sort_of(e: LfExpr, ctx: LfContext) -> Sort:
    """kind / family / object, from the shape and the context.

    All binders in LF bind object variables, so Bound is always an object.
    """
    match e:
        case KindType():
            return Sort.KIND
        case Bound():
            return Sort.OBJECT
        case Var(n):
            entry = ctx.lookup(n)
            cl_sort = sort_of(entry.classifier, ctx)
            if cl_sort is Sort.KIND:
                return Sort.FAMILY
            if cl_sort is Sort.FAMILY:
                return Sort.OBJECT
            raise SortError(f"{n} is classified by an object")
        case Pi(_, _, b):
            s = sort_of(b, ctx)
            if s is Sort.OBJECT:
                raise SortError("product over an object body")
            return s
        case Lam(_, _, b):
            s = sort_of(b, ctx)
            if s is Sort.KIND:
                raise SortError("abstraction over a kind body")
            return s
        case App(f, _):
            s = sort_of(f, ctx)
            if s is Sort.KIND:
                raise SortError("a kind cannot be applied")
            return s
    raise TypeError(f"not an LfExpr: {e!r}")


# ---------------------------------------------------------------------------
# substitution


def substitute(
    e: LfExpr,
    bindings: Mapping[str, LfExpr],
    ctx: Optional[LfContext] = None,
) -> LfExpr:
    """Simultaneous, capture-avoiding replacement of free variables.

    Replacement values must be locally closed (no dangling indices), which
    makes capture impossible: indices never clash with names.  Inserted
    values are not themselves searched, so the substitution really is
    simultaneous.  When a context is supplied, each replacement's sort is
    checked against the sort of the variable it replaces.
    """
    if ctx is not None:
        for name, value in bindings.items():
            if name not in ctx:
                continue
            var_sort = sort_of(Var(name), ctx)
            val_sort = sort_of(value, ctx)
            if var_sort is not val_sort:
                raise SortError(
                    f"cannot replace {var_sort.value} variable {name} "
                    f"with a {val_sort.value}"
                )

    def go(e: LfExpr) -> LfExpr:
        match e:
            case Var(n):
                return bindings.get(n, e)
            case Bound() | KindType():
                return e
            case App(f, a):
                return App(go(f), go(a))
            case Lam(x, t, b):
                return Lam(x, go(t), go(b))
            case Pi(x, t, b):
                return Pi(x, go(t), go(b))
        raise TypeError(f"not an LfExpr: {e!r}")

    return go(e)


# ---------------------------------------------------------------------------
# beta normalization


def beta_normalize(e: LfExpr, fuel: int = DEFAULT_FUEL) -> LfExpr:
    """Full beta-normal form, normal order, at most `fuel` contractions."""
    remaining = [fuel]

    def tick() -> None:
        remaining[0] -= 1
        if remaining[0] < 0:
            raise NonTerminationGuard(f"no normal form within {fuel} contractions")

    def whnf(e: LfExpr) -> LfExpr:
        while True:
            match e:
                case App(f, a):
                    f = whnf(f)
                    if isinstance(f, Lam):
                        tick()
                        e = open_with(f.body, a)
                    else:
                        return App(f, a)
                case _:
                    return e

    def norm(e: LfExpr) -> LfExpr:
        e = whnf(e)
        match e:
            case App(f, a):
                # the head of a whnf spine is stuck, so this cannot re-expose
                # a redex at the head position
                return App(norm(f), norm(a))
            case Lam(x, t, b):
                return Lam(x, norm(t), norm(b))
            case Pi(x, t, b):
                return Pi(x, norm(t), norm(b))
            case _:
                return e

    return norm(e)


def subst_normalize(body: LfExpr, value: LfExpr, fuel: int = DEFAULT_FUEL) -> LfExpr:
    """open_with followed by beta_normalize: the (K[M/x])^beta idiom."""
    return beta_normalize(open_with(body, value), fuel)


# ---------------------------------------------------------------------------
# canonical (beta-normal eta-long) forms


def _pi_prefix_len(classifier: LfExpr) -> int:
    n = 0
    while isinstance(classifier, Pi):
        n += 1
        classifier = classifier.body
    return n


def _head_classifier(
    head: LfExpr, ctx: LfContext, binders: list[LfExpr]
) -> LfExpr:
    """Declared classifier of a spine head; binders holds domains, innermost first."""
    match head:
        case Var(n):
            return ctx.lookup(n).classifier
        case Bound(i):
            if i >= len(binders):
                raise UnboundVariable(f"index {i} has no binder")
            # stored at the depth it was bound; bring under i binders
            return shift(binders[i], i + 1)
        case _:
            raise ClassifierError(f"spine head is not a variable: {head}")


def canonicalize(e: LfExpr, classifier: LfExpr, ctx: LfContext) -> LfExpr:
    """Eta-expand a beta-normal, well-typed term into canonical form.

    `classifier` is the (already canonical) kind of e when e is a family, or
    its family when e is an object.  Every variable ends up applied to as
    many arguments as its own classifier's product prefix demands.
    """

    def canon(e: LfExpr, cl: LfExpr, binders: list[LfExpr]) -> LfExpr:
        match cl:
            case Pi(x, dom, cod):
                if isinstance(e, Lam):
                    ann = canon_family_or_kind(e.annot, binders)
                    body = canon(e.body, cod, [dom] + binders)
                    return Lam(e.name, ann, body)
                # variable-headed term of product classifier: eta-expand
                expanded = App(shift(e, 1), Bound(0))
                return Lam(x, dom, canon(expanded, cod, [dom] + binders))
            case KindType():
                return canon_family_or_kind(e, binders)
            case _:
                return canon_spine(e, binders)

    def canon_family_or_kind(e: LfExpr, binders: list[LfExpr]) -> LfExpr:
        # families at kind `type`, plus kinds themselves
        match e:
            case KindType():
                return e
            case Pi(x, dom, cod):
                dom_c = canon_family_or_kind(dom, binders)
                return Pi(x, dom_c, canon_family_or_kind(cod, [dom_c] + binders))
            case Lam():
                raise ClassifierError("abstraction cannot have a base classifier")
            case _:
                return canon_spine(e, binders)

    def canon_spine(e: LfExpr, binders: list[LfExpr]) -> LfExpr:
        head, args = spine(e)
        if isinstance(head, Lam):
            raise ClassifierError("term is not beta-normal")
        head_cl = _head_classifier(head, ctx, binders)
        if _pi_prefix_len(head_cl) != len(args):
            raise ClassifierError(
                f"{head} expects {_pi_prefix_len(head_cl)} arguments, got {len(args)}"
            )
        cl = head_cl
        out: list[LfExpr] = []
        for a in args:
            assert isinstance(cl, Pi)
            out.append(canon(a, cl.domain, binders))
            cl = subst_normalize(cl.body, out[-1])
        return apply_spine(head, out)

    return canon(e, classifier, [])


def canonicalize_kind(k: LfExpr, ctx: LfContext) -> LfExpr:
    """Canonical form of a kind: canonicalize the embedded families."""
    match k:
        case KindType():
            return k
        case Pi(x, dom, cod):
            dom_c = canonicalize(dom, TYPE, ctx)
            # the body may mention the binder; open it with a fresh name so
            # nested canonicalization can look the domain up by name
            fresh = ctx.fresh(x or "x")
            opened = open_with(cod, Var(fresh))
            cod_c = canonicalize_kind(opened, ctx.extended(fresh, dom_c))
            return Pi(x, dom_c, close_over(cod_c, fresh))
        case _:
            raise ClassifierError(f"not a kind: {k}")


def is_canonical(e: LfExpr, ctx: LfContext) -> bool:
    """Beta-normal and every variable occurrence fully applied.

    Raises UnboundVariable if e mentions something the context does not
    declare.  Unlike canonicalize this needs no classifier: it just walks
    the term and counts arguments against each head's declaration.
    """

    def check(e: LfExpr, binders: list[LfExpr]) -> bool:
        match e:
            case KindType():
                return True
            case Pi(_, dom, cod):
                return check(dom, binders) and check(cod, [dom] + binders)
            case Lam(_, ann, body):
                return check(ann, binders) and check(body, [ann] + binders)
            case _:
                head, args = spine(e)
                if isinstance(head, (Lam, Pi, KindType)):
                    return False  # beta-redex or ill-formed head
                head_cl = _head_classifier(head, ctx, binders)
                if _pi_prefix_len(head_cl) != len(args):
                    return False
                return all(check(a, binders) for a in args)

    return check(e, [])


# ---------------------------------------------------------------------------
# display


def to_str(e: LfExpr, names: Optional[list[str]] = None) -> str:
    """Concrete syntax with {x:A} products, [x:A] abstractions, () grouping."""
    names = names or []

    def fresh(hint: str, avoid: list[str]) -> str:
        base = hint or "x"
        if base not in avoid:
            return base
        i = 1
        while f"{base}{i}" in avoid:
            i += 1
        return f"{base}{i}"

    def go(e: LfExpr, names: list[str], level: int) -> str:
        # level 0: anywhere, 1: argument position
        match e:
            case KindType():
                return "type"
            case Var(n):
                return n
            case Bound(i):
                return names[i] if i < len(names) else f"#{i}"
            case App():
                head, args = spine(e)
                parts = [go(head, names, 1)] + [go(a, names, 1) for a in args]
                s = " ".join(parts)
                return f"({s})" if level > 0 else s
            case Pi(x, dom, cod):
                n = fresh(x, names + [v for v in free_vars(cod)])
                s = f"{{{n}:{go(dom, names, 0)}}} {go(cod, [n] + names, 0)}"
                return f"({s})" if level > 0 else s
            case Lam(x, ann, body):
                n = fresh(x, names + [v for v in free_vars(body)])
                s = f"[{n}:{go(ann, names, 0)}] {go(body, [n] + names, 0)}"
                return f"({s})" if level > 0 else s
        raise TypeError(f"not an LfExpr: {e!r}")

    return go(e, names, 0)
