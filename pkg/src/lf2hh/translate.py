"""From checked LF signatures to hohh programs, two ways.

The simple translation turns every declaration `c : A` into a clause about
a single `hastype` predicate: products become universally quantified
implications whose premises re-derive the типing of each argument.  The
optimized translation specializes each type family into its own predicate
carrying the proof term as an extra argument, and replaces the premise for
a product-bound variable by `true` whenever the variable occurs rigidly in
the clause head, because head unification then pins it to something the
head's own typing already covers.

Rigidity of x in the eventual head: some argument of the final base type
contains, under local abstractions, either x applied to distinct local
binder variables, or an application headed by something other than a
product-bound variable with a rigid argument.  Only such occurrences
survive substitution unchanged, which is what makes dropping the premise
sound; `relaxed_init` deliberately waives the distinct-binder restriction
so tests can demonstrate how that breaks proof extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import hohh as hh
from .hohh import (
    LF_OBJ,
    LF_TYPE,
    PROP,
    Arrow,
    Atom,
    CanonicityError,
    Clause,
    Const,
    Forall,
    Formula,
    Implies,
    MetaVar,
    SimpleType,
    Top,
    arrow,
    clausify,
    fresh_metavar,
    normalize_formula,
    phi,
)
from .lfsyntax import (
    App,
    Bound,
    KindType,
    Lam,
    LfContext,
    LfExpr,
    Pi,
    Sort,
    Var,
    open_with,
    shift,
    sort_of,
    spine,
)

HASTYPE = "hastype"


@dataclass(frozen=True)
class TranslateOptions:
    mode: str = "simple"  # "simple" | "optimized"
    proof_arg_position: str = "first"  # "first" | "last"; simple mode ignores it
    simplify_top: bool = False
    specialize_predicates: Optional[bool] = None  # forced by mode
    relaxed_init: bool = False  # test-only: unsound rigidity, see module docstring

    def __post_init__(self) -> None:
        if self.mode not in ("simple", "optimized"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.proof_arg_position not in ("first", "last"):
            raise ValueError(f"unknown proof-arg position {self.proof_arg_position!r}")
        forced = self.mode == "optimized"
        if self.specialize_predicates is None:
            object.__setattr__(self, "specialize_predicates", forced)
        elif self.specialize_predicates != forced:
            raise ValueError("specialize_predicates is determined by the mode")


@dataclass(frozen=True)
class TranslationResult:
    """Ordered hohh signature plus the program in both printable and
    backchain form."""

    options: TranslateOptions
    constants: tuple[Const, ...]  # term constants, declaration order
    predicates: tuple[Const, ...]  # hastype, or the specialized families
    formulas: tuple[Formula, ...]  # one D-formula per object declaration
    clauses: tuple[Clause, ...]

    def atomic_types(self) -> tuple[str, ...]:
        used: set[str] = set()

        def scan(t: SimpleType) -> None:
            if isinstance(t, Arrow):
                scan(t.arg)
                scan(t.res)
            elif not isinstance(t, hh.PropT):
                used.add(str(t))

        for c in self.constants + self.predicates:
            scan(c.ty)
        return tuple(sorted(used))


# ---------------------------------------------------------------------------
# rigidity


@dataclass(frozen=True)
class RigidityEnv:
    """Gamma; delta; x of the occurrence judgments."""

    pi_vars: frozenset[str]
    local_binders: frozenset[str]
    target: str
    relaxed: bool = False


_fresh_rigid = [0]


def _fresh_name(base: str) -> str:
    _fresh_rigid[0] += 1
    return f"{base}%{_fresh_rigid[0]}"


def rigid(env: RigidityEnv, a: LfExpr) -> bool:
    """Does env.target occur rigidly in the base type at the end of a?

    Walks the remaining product prefix (each binder joins Gamma), then asks
    for a rigid occurrence in some argument of the base type.
    """
    pi_vars = env.pi_vars
    while isinstance(a, Pi):
        x = _fresh_name(a.name or "y")
        pi_vars = pi_vars | {x}
        a = open_with(a.body, Var(x))
    env = RigidityEnv(pi_vars, env.local_binders, env.target, env.relaxed)
    _, args = spine(a)
    return any(rigid_obj(env, m) for m in args)


def rigid_obj(env: RigidityEnv, m: LfExpr) -> bool:
    """The object occurrence judgment."""
    while isinstance(m, Lam):
        y = _fresh_name(m.name or "w")
        env = RigidityEnv(
            env.pi_vars, env.local_binders | {y}, env.target, env.relaxed
        )
        m = open_with(m.body, Var(y))
    head, args = spine(m)
    if not isinstance(head, Var):
        return False
    if head.name == env.target:
        if env.relaxed:
            return True
        # x applied to distinct local binders, possibly none
        names = []
        for a in args:
            if not (isinstance(a, Var) and a.name in env.local_binders):
                return False
            names.append(a.name)
        return len(set(names)) == len(names)
    if head.name in env.pi_vars:
        return False
    return any(rigid_obj(env, a) for a in args)


def binder_rigidity(a: LfExpr, relaxed: bool = False) -> list[bool]:
    """One flag per product binder of a: rigid in the final base type?"""
    names: list[str] = []
    body = a
    while isinstance(body, Pi):
        x = _fresh_name(body.name or "y")
        names.append(x)
        body = open_with(body.body, Var(x))
    flags = []
    for x in names:
        env = RigidityEnv(frozenset(n for n in names if n != x), frozenset(), x, relaxed)
        _, args = spine(body)
        flags.append(any(rigid_obj(env, m) for m in args))
    return flags


# ---------------------------------------------------------------------------
# encoding of canonical objects and base types


def _display(name: str) -> str:
    return name.lower() if name else ""


def _binder_hint(dom: LfExpr) -> str:
    """Display hint for a quantifier over dom: head letter of its base type."""
    while isinstance(dom, Pi):
        dom = dom.body
    head, _ = spine(dom)
    if isinstance(head, Var) and head.name:
        return head.name[0].lower()
    return "x"


class Translator:
    def __init__(self, ctx: LfContext, options: TranslateOptions):
        self.ctx = ctx
        self.options = options
        self.const_types: dict[str, SimpleType] = {}
        self.pred_types: dict[str, SimpleType] = {}
        for entry in ctx:
            f = phi(entry.classifier)
            if sort_of(entry.classifier, ctx) is Sort.KIND:
                if options.specialize_predicates:
                    self.pred_types[entry.name] = self._pred_type(entry.classifier)
                else:
                    self.const_types[entry.name] = f
            else:
                self.const_types[entry.name] = f
        if not options.specialize_predicates:
            self.pred_types[HASTYPE] = arrow([LF_OBJ, LF_TYPE], PROP)

    def _pred_type(self, kind: LfExpr) -> SimpleType:
        args: list[SimpleType] = []
        while isinstance(kind, Pi):
            args.append(phi(kind.domain))
            kind = kind.body
        if not isinstance(kind, KindType):
            raise CanonicityError("family kind does not end in type")
        if self.options.proof_arg_position == "first":
            args = [LF_OBJ] + args
        else:
            args = args + [LF_OBJ]
        return arrow(args, PROP)

    # -- objects and base types as terms

    def encode(self, e: LfExpr) -> hh.HTerm:
        """Canonical object or base type, as a simply typed term."""
        match e:
            case Var(n):
                ty = self.const_types.get(n)
                if ty is None:
                    # family name: only a term in unspecialized mode
                    raise CanonicityError(f"{n} has no term-level encoding here")
                return Const(n, ty)
            case Bound(i):
                return hh.Bound(i)
            case Lam(x, ann, body):
                return hh.Abs(_display(x) or "w", phi(ann), self.encode(body))
            case App(f, a):
                return hh.App(self.encode(f), self.encode(a))
            case _:
                raise CanonicityError(f"not encodable as a term: {e}")

    def _atom(self, base: LfExpr, proof: hh.HTerm) -> Formula:
        """The atom for proof inhabiting the base type."""
        if self.options.specialize_predicates:
            head, args = spine(base)
            if not isinstance(head, Var) or head.name not in self.pred_types:
                raise CanonicityError(f"base type head is not a family constant: {base}")
            pred = Const(head.name, self.pred_types[head.name])
            encoded = [self.encode(a) for a in args]
            if self.options.proof_arg_position == "first":
                ordered = [proof] + encoded
            else:
                ordered = encoded + [proof]
            return Atom(hh.apply_spine(pred, ordered))
        pred = Const(HASTYPE, self.pred_types[HASTYPE])
        return Atom(hh.apply_spine(pred, [proof, self.encode(base)]))

    # -- the simple translation

    def simple_type(self, a: LfExpr, proof: hh.HTerm) -> Formula:
        match a:
            case Pi(x, dom, cod):
                hint = _display(x) or _binder_hint(dom)
                prem = self.simple_type(shift(dom, 1), hh.Bound(0))
                body = self.simple_type(
                    cod, hh.App(hh.shift_term(proof, 1), hh.Bound(0))
                )
                return Forall(hint, phi(dom), Implies(prem, body))
            case _:
                return self._atom(a, proof)

    # -- the optimized translation

    def opt_neg(self, a: LfExpr, proof: hh.HTerm) -> Formula:
        match a:
            case Pi(x, dom, cod):
                hint = _display(x) or _binder_hint(dom)
                prem = self.opt_pos(shift(dom, 1), hh.Bound(0))
                body = self.opt_neg(cod, hh.App(hh.shift_term(proof, 1), hh.Bound(0)))
                return Forall(hint, phi(dom), Implies(prem, body))
            case _:
                return self._atom(a, proof)

    def opt_pos(self, a: LfExpr, proof: hh.HTerm) -> Formula:
        flags = binder_rigidity(a, self.options.relaxed_init)

        def build(a: LfExpr, proof: hh.HTerm, i: int) -> Formula:
            match a:
                case Pi(x, dom, cod):
                    hint = _display(x) or _binder_hint(dom)
                    prem: Formula
                    if flags[i]:
                        prem = Top()
                    else:
                        prem = self.opt_neg(shift(dom, 1), hh.Bound(0))
                    body = build(cod, hh.App(hh.shift_term(proof, 1), hh.Bound(0)), i + 1)
                    return Forall(hint, phi(dom), Implies(prem, body))
                case _:
                    return self._atom(a, proof)

        return build(a, proof, 0)


def simplify_top(f: Formula) -> Formula:
    """Drop every `true =>` premise."""
    match f:
        case Top() | Atom():
            return f
        case Implies(l, r):
            r = simplify_top(r)
            if isinstance(l, Top):
                return r
            return Implies(simplify_top(l), r)
        case Forall(x, ty, b):
            return Forall(x, ty, simplify_top(b))
    raise TypeError(f"not a Formula: {f!r}")


# ---------------------------------------------------------------------------
# whole signatures and queries


def translate_signature(ctx: LfContext, options: TranslateOptions) -> TranslationResult:
    """Clauses for every object declaration, in declaration order.

    Kind declarations contribute no clause; in optimized mode they define
    the specialized predicates, in simple mode the family constants.  The
    context must already have been checked and canonicalized.
    """
    tr = Translator(ctx, options)
    constants: list[Const] = []
    formulas: list[Formula] = []
    for entry in ctx:
        if sort_of(entry.classifier, ctx) is Sort.KIND:
            if not options.specialize_predicates:
                constants.append(Const(entry.name, tr.const_types[entry.name]))
            continue
        c = Const(entry.name, tr.const_types[entry.name])
        constants.append(c)
        if options.mode == "simple":
            f = tr.simple_type(entry.classifier, c)
        else:
            f = tr.opt_pos(entry.classifier, c)
        if options.simplify_top:
            f = simplify_top(f)
        formulas.append(normalize_formula(f))
    predicates = tuple(
        Const(n, t) for n, t in tr.pred_types.items()
    )
    clauses = tuple(clausify(f) for f in formulas)
    return TranslationResult(options, tuple(constants), predicates, tuple(formulas), clauses)


def translate_query(
    ctx: LfContext, a: LfExpr, options: TranslateOptions, hint: str = "M"
) -> tuple[Formula, MetaVar]:
    """Goal formula asking for an inhabitant of the (canonical) type a.

    Returns the goal and the metavariable standing for the proof term.
    """
    tr = Translator(ctx, options)
    proof = fresh_metavar(hint, phi(a), level=0)
    if options.mode == "simple":
        goal = tr.simple_type(a, proof)
    else:
        goal = tr.opt_neg(a, proof)
    if options.simplify_top:
        goal = simplify_top(goal)
    return normalize_formula(goal), proof
