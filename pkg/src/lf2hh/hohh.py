"""Simply typed terms, goal/program formulas and clauses for the hohh logic.

Terms and formulas share one de Bruijn index space: a `Forall` binds term
occurrences inside its body exactly like an `Abs` does, so walking under
either kind of binder shifts the same way.  Metavariables are mutable cells
(identity equality, `ref` holds the binding) so the solver can bind and
untrail them in place; everything else is immutable and display hints are
excluded from equality, making `==` alpha-equivalence.

`level` stamps: a constant carries the signature stage it was introduced at
(0 for the initial signature, k for an eigenvariable introduced by the k-th
nested universal goal); a metavariable may only ever be bound to terms whose
constants all sit at or below its own level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .lfsyntax import (
    App as LfApp,
    Bound as LfBound,
    KindType,
    Lam as LfLam,
    LfExpr,
    Pi as LfPi,
    Var as LfVar,
)


class HohhError(Exception):
    """Base class for the hohh layer."""


class SimpleTypeError(HohhError):
    """A term does not fit together at the simple types."""


class CanonicityError(HohhError):
    """An LF input that must be canonical is not."""


class GrammarError(HohhError):
    """A formula is outside the goal or program grammar it must inhabit."""


# ---------------------------------------------------------------------------
# simple types


@dataclass(frozen=True)
class LfObjT:
    def __str__(self) -> str:
        return "lf-obj"


@dataclass(frozen=True)
class LfTypeT:
    def __str__(self) -> str:
        return "lf-type"


@dataclass(frozen=True)
class PropT:
    def __str__(self) -> str:
        return "o"


@dataclass(frozen=True)
class Arrow:
    arg: "SimpleType"
    res: "SimpleType"

    def __str__(self) -> str:
        a = f"({self.arg})" if isinstance(self.arg, Arrow) else str(self.arg)
        return f"{a} -> {self.res}"


SimpleType = Union[LfObjT, LfTypeT, PropT, Arrow]

LF_OBJ = LfObjT()
LF_TYPE = LfTypeT()
PROP = PropT()


def arrow(args: Sequence[SimpleType], res: SimpleType) -> SimpleType:
    for a in reversed(args):
        res = Arrow(a, res)
    return res


def arg_types(ty: SimpleType) -> tuple[list[SimpleType], SimpleType]:
    args: list[SimpleType] = []
    while isinstance(ty, Arrow):
        args.append(ty.arg)
        ty = ty.res
    return args, ty


def phi(p: LfExpr) -> SimpleType:
    """Simple-type skeleton of a canonical LF type or kind.

    Base types collapse to lf-obj, the kind `type` to lf-type, products to
    arrows.  Dependency is erased: {x:nat} num x and nat -> num z map to
    the same arrow.
    """
    match p:
        case KindType():
            return LF_TYPE
        case LfPi(_, dom, cod):
            return Arrow(phi(dom), phi(cod))
        case LfVar() | LfApp() | LfBound():
            head = p
            while isinstance(head, LfApp):
                head = head.fn
            if isinstance(head, (LfVar, LfBound)):
                return LF_OBJ
            raise CanonicityError(f"not a base type: {p}")
        case _:
            raise CanonicityError(f"not a canonical type or kind: {p}")


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Const:
    name: str
    ty: SimpleType
    level: int = 0

    def __str__(self) -> str:
        return self.name


class MetaVar:
    """Mutable unification variable; equality is identity."""

    __slots__ = ("name", "ty", "level", "ref")

    def __init__(self, name: str, ty: SimpleType, level: int = 0):
        self.name = name
        self.ty = ty
        self.level = level
        self.ref: Optional[HTerm] = None

    def __repr__(self) -> str:
        return f"MetaVar({self.name})"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bound:
    index: int

    def __str__(self) -> str:
        return f"#{self.index}"


@dataclass(frozen=True)
class Abs:
    hint: str = field(compare=False)
    ty: SimpleType
    body: "HTerm"


@dataclass(frozen=True)
class App:
    fn: "HTerm"
    arg: "HTerm"


HTerm = Union[Const, MetaVar, Bound, Abs, App]

_fresh_counter = itertools.count(1)


def fresh_metavar(hint: str, ty: SimpleType, level: int) -> MetaVar:
    return MetaVar(f"{hint or 'X'}_{next(_fresh_counter)}", ty, level)


def spine(t: HTerm) -> tuple[HTerm, list[HTerm]]:
    args: list[HTerm] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def apply_spine(head: HTerm, args: Iterable[HTerm]) -> HTerm:
    for a in args:
        head = App(head, a)
    return head


def deref(t: HTerm) -> HTerm:
    while isinstance(t, MetaVar) and t.ref is not None:
        t = t.ref
    return t


def term_facts(t: HTerm) -> tuple[bool, int, int]:
    """(has_metavar, bound_ceiling, level_ceiling) of the raw structure.

    bound_ceiling is one more than the largest free de Bruijn index (0 for
    a closed term), level_ceiling the largest constant level.  Metavariable
    references are deliberately not chased, so the three components are
    facts about the immutable node structure and can be cached; a term with
    has_metavar set must be walked the slow way by whoever needs exact
    answers.  Traversals short-circuit on these in the hot paths, which
    keeps instantiation from copying large ground subterms.
    """
    match t:
        case Const(_, _, level):
            return (False, 0, level)
        case Bound(i):
            return (False, i + 1, 0)
        case MetaVar():
            return (True, 0, 0)
        case App(f, a):
            cached = getattr(t, "_facts", None)
            if cached is None:
                fm, fb, fl = term_facts(f)
                am, ab, al = term_facts(a)
                cached = (fm or am, max(fb, ab), max(fl, al))
                object.__setattr__(t, "_facts", cached)
            return cached
        case Abs(_, _, b):
            cached = getattr(t, "_facts", None)
            if cached is None:
                m, bc, lc = term_facts(b)
                cached = (m, max(0, bc - 1), lc)
                object.__setattr__(t, "_facts", cached)
            return cached
    raise TypeError(f"not an HTerm: {t!r}")


def shift_term(t: HTerm, by: int, cutoff: int = 0) -> HTerm:
    if by == 0:
        return t
    match t:
        case Bound(i):
            if i < cutoff:
                return t
            if i + by < cutoff:
                raise GrammarError("negative shift would capture an index")
            return Bound(i + by)
        case Const() | MetaVar():
            return t
        case App(f, a):
            if term_facts(t)[1] <= cutoff:
                return t
            return App(shift_term(f, by, cutoff), shift_term(a, by, cutoff))
        case Abs(x, ty, b):
            if term_facts(t)[1] <= cutoff:
                return t
            return Abs(x, ty, shift_term(b, by, cutoff + 1))
    raise TypeError(f"not an HTerm: {t!r}")


def inst_term(body: HTerm, value: HTerm, depth: int = 0) -> HTerm:
    """Replace Bound(depth) by value, closing one binder."""
    match body:
        case Bound(i):
            if i == depth:
                return shift_term(value, depth)
            return Bound(i - 1) if i > depth else body
        case Const() | MetaVar():
            return body
        case App(f, a):
            if term_facts(body)[1] <= depth:
                return body
            return App(inst_term(f, value, depth), inst_term(a, value, depth))
        case Abs(x, ty, b):
            if term_facts(body)[1] <= depth:
                return body
            return Abs(x, ty, inst_term(b, value, depth + 1))
    raise TypeError(f"not an HTerm: {body!r}")


def term_metavars(t: HTerm, acc: Optional[list[MetaVar]] = None) -> list[MetaVar]:
    """Unbound metavariables, first occurrence order."""
    out = acc if acc is not None else []
    match deref(t):
        case MetaVar() as m:
            if m not in out:
                out.append(m)
        case App(f, a):
            term_metavars(f, out)
            term_metavars(a, out)
        case Abs(_, _, b):
            term_metavars(b, out)
        case _:
            pass
    return out


def type_of(t: HTerm, env: Sequence[SimpleType] = ()) -> SimpleType:
    """Simple type of a term; env lists binder types, innermost first."""
    match t:
        case Const(_, ty, _):
            return ty
        case MetaVar() as m:
            return m.ty
        case Bound(i):
            if i >= len(env):
                raise SimpleTypeError(f"dangling index #{i}")
            return env[i]
        case Abs(_, ty, b):
            return Arrow(ty, type_of(b, [ty, *env]))
        case App(f, a):
            fty = type_of(f, env)
            if not isinstance(fty, Arrow):
                raise SimpleTypeError(f"applying a term of type {fty}")
            aty = type_of(a, env)
            if aty != fty.arg:
                raise SimpleTypeError(f"argument has type {aty}, expected {fty.arg}")
            return fty.res
    raise TypeError(f"not an HTerm: {t!r}")


def whnf(t: HTerm) -> HTerm:
    while True:
        t = deref(t)
        if isinstance(t, App):
            f = whnf(t.fn)
            if isinstance(f, Abs):
                t = inst_term(f.body, t.arg)
                continue
            return App(f, t.arg) if f is not t.fn else t
        return t


def h_normalize(
    t: HTerm, env: Sequence[SimpleType] = (), ty: Optional[SimpleType] = None
) -> HTerm:
    """The unique beta-eta-long normal form.

    Abstractions cover the full arrow prefix of the type, every head is
    applied to as many arguments as its type feeds it, bound metavariables
    are resolved.  Idempotent; simply typed input always terminates.
    """
    if ty is None:
        ty = type_of(t, env)
    if isinstance(ty, Arrow):
        t = whnf(t)
        if isinstance(t, Abs):
            return Abs(t.hint, ty.arg, h_normalize(t.body, [ty.arg, *env], ty.res))
        expanded = App(shift_term(t, 1), Bound(0))
        return Abs("w", ty.arg, h_normalize(expanded, [ty.arg, *env], ty.res))
    head, args = spine(whnf(t))
    if isinstance(head, Abs):
        raise SimpleTypeError("whnf left an abstraction at the head")
    head_ty = type_of(head, env)
    doms, _ = arg_types(head_ty)
    if len(args) > len(doms):
        raise SimpleTypeError(f"head {head} applied to too many arguments")
    out = [h_normalize(a, env, d) for a, d in zip(args, doms)]
    return apply_spine(head, out)


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Atom:
    term: HTerm  # of type o


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    hint: str = field(compare=False)
    ty: SimpleType
    body: "Formula"


Formula = Union[Top, Atom, Implies, Forall]


def shift_formula(f: Formula, by: int, cutoff: int = 0) -> Formula:
    if by == 0:
        return f
    match f:
        case Top():
            return f
        case Atom(t):
            return Atom(shift_term(t, by, cutoff))
        case Implies(l, r):
            return Implies(shift_formula(l, by, cutoff), shift_formula(r, by, cutoff))
        case Forall(x, ty, b):
            return Forall(x, ty, shift_formula(b, by, cutoff + 1))
    raise TypeError(f"not a Formula: {f!r}")


def inst_formula(body: Formula, value: HTerm, depth: int = 0) -> Formula:
    match body:
        case Top():
            return body
        case Atom(t):
            return Atom(inst_term(t, value, depth))
        case Implies(l, r):
            return Implies(inst_formula(l, value, depth), inst_formula(r, value, depth))
        case Forall(x, ty, b):
            return Forall(x, ty, inst_formula(b, value, depth + 1))
    raise TypeError(f"not a Formula: {body!r}")


def normalize_formula(f: Formula, env: Sequence[SimpleType] = ()) -> Formula:
    match f:
        case Top():
            return f
        case Atom(t):
            return Atom(h_normalize(t, env, PROP))
        case Implies(l, r):
            return Implies(normalize_formula(l, env), normalize_formula(r, env))
        case Forall(x, ty, b):
            return Forall(x, ty, normalize_formula(b, [ty, *env]))
    raise TypeError(f"not a Formula: {f!r}")


def formula_metavars(f: Formula, acc: Optional[list[MetaVar]] = None) -> list[MetaVar]:
    out = acc if acc is not None else []
    match f:
        case Top():
            pass
        case Atom(t):
            term_metavars(t, out)
        case Implies(l, r):
            formula_metavars(l, out)
            formula_metavars(r, out)
        case Forall(_, _, b):
            formula_metavars(b, out)
    return out


def is_goal(f: Formula) -> bool:
    """G ::= true | A | D => G | pi x. G"""
    match f:
        case Top() | Atom():
            return True
        case Implies(l, r):
            return is_program(l) and is_goal(r)
        case Forall(_, _, b):
            return is_goal(b)
    return False


def is_program(f: Formula) -> bool:
    """D ::= A | G => D | pi x. D"""
    match f:
        case Atom():
            return True
        case Top():
            return False
        case Implies(l, r):
            return is_goal(l) and is_program(r)
        case Forall(_, _, b):
            return is_program(b)
    return False


# ---------------------------------------------------------------------------
# clauses


@dataclass(frozen=True)
class Clause:
    """Backchain form of a D-formula.

    `vars` lists the universally quantified variables outermost first.
    `premises` are the goals in source order, each expressed as if it sat
    under all the quantifiers; `scopes[i]` remembers how many quantifiers
    were actually in scope at premise i, so the original nesting can be
    rebuilt exactly.  `head` is the atom's term, also under all quantifiers.
    """

    vars: tuple[tuple[str, SimpleType], ...]
    premises: tuple[Formula, ...]
    scopes: tuple[int, ...]
    head: HTerm

    def head_name(self) -> Optional[str]:
        h, _ = spine(self.head)
        return h.name if isinstance(h, (Const, MetaVar)) else None


def clausify(d: Formula) -> Clause:
    """Strip quantifiers and premises off a D-formula."""
    if not is_program(d):
        raise GrammarError("not a program formula")
    vars_: list[tuple[str, SimpleType]] = []
    raw: list[tuple[Formula, int]] = []
    f = d
    while True:
        match f:
            case Forall(x, ty, b):
                vars_.append((x, ty))
                f = b
            case Implies(l, r):
                raw.append((l, len(vars_)))
                f = r
            case Atom(t):
                head = t
                break
            case _:
                raise GrammarError("not a program formula")
    n = len(vars_)
    premises = tuple(shift_formula(g, n - k) for g, k in raw)
    scopes = tuple(k for _, k in raw)
    return Clause(tuple(vars_), premises, scopes, head)


def unclausify(c: Clause) -> Formula:
    """Rebuild the D-formula; inverse of clausify up to alpha."""
    n = len(c.vars)
    f: Formula = Atom(c.head)
    items = list(zip(c.premises, c.scopes))
    for depth in range(n, -1, -1):
        while items and items[-1][1] == depth:
            g, _ = items.pop()
            f = Implies(shift_formula(g, depth - n), f)
        if depth > 0:
            x, ty = c.vars[depth - 1]
            f = Forall(x, ty, f)
    if items:
        raise GrammarError("premise recorded outside any quantifier scope")
    return f
