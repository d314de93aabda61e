"""Seeded random generators for the differential and property suites.

Everything here is driven by an explicit `random.Random` so that every
test case is reproducible from its seed.  The central pieces:

* `gen_signature` builds a small well-formed signature, layered the way a
  hand-written one would be: type families first, then object constants
  whose product types draw their index terms from what is already in
  scope.  The result is validated with `check_context` before use, so a
  generator bug cannot silently weaken a suite.

* `TermGen` produces closed canonical objects at a wanted base type by
  recursion over constructor "recipes" (the split product structure of
  each declared constant).  Constructor selection works by one-way
  structural matching of the declared target against the wanted type,
  which keeps every generated term well typed by construction.

* `gen_query` builds ground base-type queries, `gen_lemma_triple` builds
  the (signature, product type, instantiation) triples used to exercise
  the rigidity projection property, and `run_diff_case` runs one
  simple-vs-optimized differential comparison end to end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from lf2hh.engine import BudgetExhausted, NonPatternResidual, Program, Solver, solve
from lf2hh.lfcheck import check_context, infer_kind
from lf2hh.pipeline import run_search
from lf2hh.lfsyntax import (
    TYPE,
    App,
    Bound,
    CtxEntry,
    Lam,
    LfContext,
    LfExpr,
    Pi,
    Var,
    beta_normalize,
    open_with,
    shift,
    to_str,
)
from lf2hh.translate import (
    TranslateOptions,
    binder_rigidity,
    translate_query,
    translate_signature,
)

# ---------------------------------------------------------------------------
# small syntactic helpers


def close_var(e: LfExpr, name: str, depth: int = 0) -> LfExpr:
    """Abstract the free variable `name` back into Bound(depth)."""
    match e:
        case Var(n):
            return Bound(depth) if n == name else e
        case App(f, a):
            return App(close_var(f, name, depth), close_var(a, name, depth))
        case Lam(x, t, b):
            return Lam(x, close_var(t, name, depth), close_var(b, name, depth + 1))
        case Pi(x, t, b):
            return Pi(x, close_var(t, name, depth), close_var(b, name, depth + 1))
        case _:
            return e


def subst_var(e: LfExpr, name: str, value: LfExpr) -> LfExpr:
    """Replace the free variable `name` by a closed value.

    Binders are de Bruijn indices, so a closed value can never be
    captured and no shifting is required.
    """
    match e:
        case Var(n):
            return value if n == name else e
        case App(f, a):
            return App(subst_var(f, name, value), subst_var(a, name, value))
        case Lam(x, t, b):
            return Lam(x, subst_var(t, name, value), subst_var(b, name, value))
        case Pi(x, t, b):
            return Pi(x, subst_var(t, name, value), subst_var(b, name, value))
        case _:
            return e


def inst_under(e: LfExpr, values: list[LfExpr]) -> LfExpr:
    """Instantiate an expression that sits under len(values) binders.

    values are ordered outermost first; each open_with plugs the current
    innermost binder, so the list is consumed from the right.
    """
    for v in reversed(values):
        e = open_with(e, v)
    return e


def split_pis(a: LfExpr) -> tuple[list[str], list[LfExpr], LfExpr]:
    """Product type -> (binder names, domains as stored, target).

    domains[i] sits under i binders, the target under all of them.
    """
    names: list[str] = []
    doms: list[LfExpr] = []
    body = a
    while isinstance(body, Pi):
        names.append(body.name or f"x{len(names)}")
        doms.append(body.domain)
        body = body.body
    return names, doms, body


def match_expr(pat: LfExpr, t: LfExpr, k: int, bind: list[Optional[LfExpr]]) -> bool:
    """One-way match of a pattern under k binders against a bound-free term.

    Bound(j) with j < k is the match variable for binder slot k-1-j; a
    non-linear occurrence must match an equal term.  Patterns containing
    abstractions are not needed by the generators and simply fail.
    """
    match pat:
        case Bound(j):
            if j >= k:
                return False
            slot = k - 1 - j
            if bind[slot] is None:
                bind[slot] = t
                return True
            return bind[slot] == t
        case Var(n):
            return isinstance(t, Var) and t.name == n
        case App(f, a):
            return (
                isinstance(t, App)
                and match_expr(f, t.fn, k, bind)
                and match_expr(a, t.arg, k, bind)
            )
        case _:
            return False


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Recipe:
    """Split product structure of one object constant."""

    name: str
    doms: tuple[LfExpr, ...]  # domain i as stored, under i binders
    target: LfExpr  # under all k binders
    k: int


def recipe_of(name: str, ty: LfExpr) -> Recipe:
    _, doms, target = split_pis(ty)
    return Recipe(name, tuple(doms), target, len(doms))


def _eta_long_slot(v: LfExpr, dom: LfExpr) -> Optional[LfExpr]:
    """Matched slot values land syntactically, so a function-typed slot
    can receive a bare head; canonical terms need it eta-long.  Only the
    single-level non-dependent shape {w:base} base occurs here; anything
    else rejects the candidate."""
    if not isinstance(dom, Pi):
        return v
    if isinstance(v, Lam):
        return v
    if isinstance(dom.domain, Var) and not isinstance(dom.body, Pi):
        return Lam("w", dom.domain, App(shift(v, 1), Bound(0)))
    return None


@dataclass
class GenSig:
    ctx: LfContext
    fam_a: str
    fam_b: Optional[str]
    b_indexed: bool
    recipes: list[Recipe]

    def base_a(self) -> LfExpr:
        return Var(self.fam_a)


class TermGen:
    """Closed canonical objects of a wanted base (or simple product) type."""

    def __init__(self, rng: random.Random, recipes: list[Recipe]):
        self.rng = rng
        self.recipes = list(recipes)
        self._fresh = 0

    def add(self, recipe: Recipe) -> None:
        self.recipes.append(recipe)

    def closed(self, wanted: LfExpr, size: int = 4) -> Optional[LfExpr]:
        return self.obj(wanted, [], size)

    def obj(
        self, wanted: LfExpr, binders: list[tuple[str, LfExpr]], size: int
    ) -> Optional[LfExpr]:
        if isinstance(wanted, Pi):
            # arrow or dependent product: build an abstraction
            self._fresh += 1
            x = f"w{self._fresh}"
            body_ty = beta_normalize(open_with(wanted.body, Var(x)))
            body = self.obj(body_ty, binders + [(x, wanted.domain)], size - 1)
            if body is None:
                return None
            return Lam(x, wanted.domain, close_var(body, x))
        cands: list[tuple] = []
        for name, dom in binders:
            if dom == wanted:
                cands.append(("var", name))
            elif (
                isinstance(dom, Pi)
                and not isinstance(dom.domain, Pi)
                and beta_normalize(open_with(dom.body, Var("??"))) == wanted
            ):
                # non-dependent local function binder returning the wanted
                # base type: apply it (keeps occurrences fully applied)
                cands.append(("app", name, dom.domain))
        for r in self.recipes:
            bind: list[Optional[LfExpr]] = [None] * r.k
            if match_expr(r.target, wanted, r.k, bind):
                cands.append(("con", r, bind))
        self.rng.shuffle(cands)
        for cand in cands:
            if cand[0] == "var":
                return Var(cand[1])
            if cand[0] == "app" and size > 0:
                arg = self.obj(cand[2], binders, size - 1)
                if arg is not None:
                    return App(Var(cand[1]), arg)
            elif cand[0] == "con":
                r, bind = cand[1], list(cand[2])
                rejected = False
                for j, v in enumerate(bind):
                    if v is None:
                        continue
                    bind[j] = _eta_long_slot(v, r.doms[j])
                    if bind[j] is None:
                        rejected = True
                        break
                if rejected:
                    continue
                missing = sum(1 for b in bind if b is None)
                if missing > 0 and size <= 0:
                    continue
                args = self._fill(r, bind, binders, size)
                if args is not None:
                    out: LfExpr = Var(r.name)
                    for a in args:
                        out = App(out, a)
                    return out
        return None

    def _fill(
        self,
        r: Recipe,
        bind: list[Optional[LfExpr]],
        binders: list[tuple[str, LfExpr]],
        size: int,
    ) -> Optional[list[LfExpr]]:
        for i in range(r.k):
            if bind[i] is not None:
                continue
            prefix = bind[:i]
            if any(p is None for p in prefix):
                return None  # dependency on a later slot; give up
            dom = beta_normalize(inst_under(r.doms[i], [p for p in prefix]))
            bind[i] = self.obj(dom, binders, size - 1)
            if bind[i] is None:
                return None
        return [b for b in bind if b is not None]


def _gen_index_term(
    rng: random.Random,
    tg: TermGen,
    base_vars: list[str],
    ho_vars: list[tuple[str, LfExpr]],
    size: int,
) -> Optional[LfExpr]:
    """Index term of the base family type, over binder variables in scope.

    Direct variable references dominate (they are the rigid occurrences);
    an applied function binder gives the occasional non-rigid shape.
    """
    base = tg.recipes[0].target  # the unindexed family's base type
    roll = rng.random()
    if base_vars and roll < 0.5:
        return Var(rng.choice(base_vars))
    if len(base_vars) >= 2 and roll < 0.65:
        # two distinct variables under one constructor head
        for r in rng.sample(tg.recipes, len(tg.recipes)):
            if r.k >= 2 and r.target == base and r.doms[0] == base and r.doms[1] == base:
                xs = rng.sample(base_vars, 2)
                args: list[LfExpr] = [Var(xs[0]), Var(xs[1])]
                ok = True
                for i in range(2, r.k):
                    dom = beta_normalize(inst_under(r.doms[i], args))
                    extra_arg = TermGen(rng, tg.recipes).closed(dom, size)
                    if extra_arg is None:
                        ok = False
                        break
                    args.append(extra_arg)
                if ok:
                    out: LfExpr = Var(r.name)
                    for a in args:
                        out = App(out, a)
                    return out
    if ho_vars and roll < 0.78:
        name, dom = rng.choice(ho_vars)
        arg = _gen_index_term(rng, tg, base_vars, [], size - 1)
        if arg is not None:
            return App(Var(name), arg)
    extra = [Recipe(x, (), base, 0) for x in base_vars]
    inner = TermGen(rng, tg.recipes + extra)
    return inner.closed(base, size)


def gen_decl_type(
    rng: random.Random,
    sig: GenSig,
    tg: TermGen,
    profile: str,
    force_binder: bool = False,
) -> LfExpr:
    """A closed product type over the signature, product depth <= 3."""
    first_order = profile == "fo"
    max_k = 2 if first_order else 3
    weights = [0.2, 0.35, 0.3, 0.15][: max_k + 1]
    k = rng.choices(range(max_k + 1), weights=weights)[0]
    if force_binder and k == 0:
        k = 1
    a = sig.base_a()
    names: list[str] = []
    doms: list[LfExpr] = []
    base_vars: list[str] = []
    ho_vars: list[tuple[str, LfExpr]] = []
    for j in range(k):
        x = f"x{j}"
        choices = ["a"]
        if sig.fam_b is not None:
            choices.append("b")
        if not first_order and j <= 1:
            choices.append("ho")
        pick = rng.choice(choices)
        if pick == "a":
            dom: LfExpr = a
        elif pick == "b":
            if sig.b_indexed:
                idx = _gen_index_term(rng, tg, base_vars, ho_vars, 2)
                dom = App(Var(sig.fam_b), idx if idx is not None else Var("c0"))
            else:
                dom = Var(sig.fam_b)
        else:
            dom = Pi("w", a, a)
        names.append(x)
        doms.append(dom)
        if dom == a:
            base_vars.append(x)
        elif isinstance(dom, Pi):
            ho_vars.append((x, dom))
    # target: prefer an indexed family so the binders can occur rigidly
    if sig.fam_b is not None and sig.b_indexed and rng.random() < 0.75:
        idx = _gen_index_term(rng, tg, base_vars, ho_vars, 3)
        target: LfExpr = App(Var(sig.fam_b), idx if idx is not None else Var("c0"))
    elif sig.fam_b is not None and not sig.b_indexed and rng.random() < 0.4:
        target = Var(sig.fam_b)
    else:
        target = a
    ty = target
    for x, dom in zip(reversed(names), reversed(doms)):
        ty = Pi(x, dom, close_var(ty, x))
    return ty


def gen_signature(rng: random.Random, profile: str = "diff") -> GenSig:
    """A layered well-formed signature; checked before being returned.

    profile "diff": up to 6 constants, function-typed binders allowed.
    profile "fo": up to 4 constants, strictly first order (the shapes the
    brute-force oracle understands).
    """
    total = rng.randint(3, 4) if profile == "fo" else rng.randint(4, 6)
    entries: list[CtxEntry] = [CtxEntry("a", TYPE)]
    fam_b: Optional[str] = None
    b_indexed = False
    if total >= 4 and rng.random() < 0.8:
        fam_b = "b"
        b_indexed = rng.random() < 0.75
        kind: LfExpr = Pi("i", Var("a"), TYPE) if b_indexed else TYPE
        entries.append(CtxEntry("b", kind))
    entries.append(CtxEntry("c0", Var("a")))
    sig = GenSig(LfContext(), "a", fam_b, b_indexed, [recipe_of("c0", Var("a"))])
    tg = TermGen(rng, sig.recipes)
    n = 1
    if profile != "fo" and len(entries) < total - 1 and rng.random() < 0.4:
        # a plain binary constructor; gives index terms room to mention
        # several binders at once
        pair = Pi("x0", Var("a"), Pi("x1", Var("a"), Var("a")))
        entries.append(CtxEntry("c1", pair))
        sig.recipes.append(recipe_of("c1", pair))
        tg.add(sig.recipes[-1])
        n = 2
    while len(entries) < total:
        ty = gen_decl_type(rng, sig, tg, profile)
        name = f"c{n}"
        n += 1
        entries.append(CtxEntry(name, ty))
        sig.recipes.append(recipe_of(name, ty))
        tg.add(sig.recipes[-1])
    ctx = LfContext(tuple(entries))
    report = check_context(ctx)
    if not report.ok:
        lines = "\n".join(f"{e.name} : {to_str(e.classifier)}" for e in entries)
        raise AssertionError(f"generator built an invalid signature:\n{lines}\n{report.failure}")
    sig.ctx = ctx
    return sig


def gen_query(rng: random.Random, sig: GenSig, tg: TermGen) -> LfExpr:
    """A ground base-type query over the signature."""
    if sig.fam_b is not None and rng.random() < 0.7:
        if sig.b_indexed:
            idx = tg.closed(sig.base_a(), rng.randint(1, 4))
            if idx is not None:
                return App(Var(sig.fam_b), idx)
        else:
            return Var(sig.fam_b)
    return sig.base_a()


# ---------------------------------------------------------------------------
# differential harness (simple vs optimized)


@dataclass
class DiffCase:
    sig: GenSig
    query: LfExpr
    status: dict[str, str] = field(default_factory=dict)  # mode -> status
    witness: dict[str, object] = field(default_factory=dict)  # mode -> HTerm
    goal: dict[str, object] = field(default_factory=dict)
    program: dict[str, object] = field(default_factory=dict)
    answer: dict[str, object] = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return any(s in ("budget", "residual") for s in self.status.values())

    @property
    def agreed(self) -> bool:
        return self.status["simple"] == self.status["optimized"]


# Depth ceiling for the differential runs.  Random witnesses are tiny, so
# any search that genuinely needs this much nesting is an unbounded
# enumeration; a pruned answerless search is counted as inconclusive
# (same bucket as a step-budget exhaustion), never as a refutation.
DIFF_MAX_DEPTH = 400


def run_diff_case(rng: random.Random, budget: int = 10_000) -> DiffCase:
    sig = gen_signature(rng, "diff")
    tg = TermGen(rng, sig.recipes)
    query = gen_query(rng, sig, tg)
    report, kind = infer_kind(sig.ctx, query)
    assert report.ok and kind == TYPE, f"generated query is ill-formed: {to_str(query)}"
    case = DiffCase(sig, query)
    for mode in ("simple", "optimized"):
        options = TranslateOptions(mode=mode)
        result = translate_signature(sig.ctx, options)
        program = Program(result.clauses)
        goal, proof = translate_query(sig.ctx, query, options)
        case.goal[mode] = goal
        case.program[mode] = program
        solver = Solver(program, budget=budget, max_depth=DIFF_MAX_DEPTH)
        try:
            answer = run_search(lambda: next(solver.solve(goal, proof), None))
        except BudgetExhausted:
            case.status[mode] = "budget"
            continue
        except NonPatternResidual:
            case.status[mode] = "residual"
            continue
        if answer is None:
            # exhaustive only if nothing was pruned by the depth ceiling
            case.status[mode] = "budget" if solver.stats.depth_prunes else "failed"
        else:
            case.status[mode] = "proved"
            case.witness[mode] = answer.witness
            case.answer[mode] = answer
    return case


# ---------------------------------------------------------------------------
# rigidity projection triples


@dataclass
class LemmaTriple:
    ctx: LfContext
    pi_type: LfExpr
    flags: list[bool]
    terms: list[LfExpr]
    instantiated_target: LfExpr


def gen_lemma_triple(rng: random.Random) -> Optional[LemmaTriple]:
    """One (signature, product type, instantiation) triple, or None when
    this seed does not produce a case satisfying the hypothesis (no rigid
    binder, generation dead end, or the instantiated target fails to be a
    well-formed type)."""
    sig = gen_signature(rng, "diff")
    tg = TermGen(rng, sig.recipes)
    flags: list[bool] = []
    pi_type: LfExpr = sig.base_a()
    for _ in range(8):  # retry until some binder is rigid
        pi_type = gen_decl_type(rng, sig, tg, "diff", force_binder=True)
        report, kind = infer_kind(sig.ctx, pi_type)
        assert report.ok and kind == TYPE, f"bad generated product type {to_str(pi_type)}"
        flags = binder_rigidity(pi_type)
        if any(flags):
            break
    if not any(flags):
        return None
    _, doms, target = split_pis(pi_type)
    terms: list[LfExpr] = []
    for i in range(len(doms)):
        dom = beta_normalize(inst_under(doms[i], terms))
        t = tg.closed(dom, 4)
        if t is None:
            return None
        terms.append(t)
    if rng.random() < 0.3:
        # adversarial variant: corrupt one slot with a term of another
        # base type; the triple only counts if the target still checks
        j = rng.randrange(len(terms))
        dom_j = beta_normalize(inst_under(doms[j], terms[:j]))
        other = sig.base_a() if dom_j != sig.base_a() else (
            App(Var(sig.fam_b), Var("c0")) if sig.fam_b and sig.b_indexed else None
        )
        if other is not None:
            bad = tg.closed(other, 3)
            if bad is not None:
                terms[j] = bad
    inst = beta_normalize(inst_under(target, terms))
    ok_report, ok_kind = infer_kind(sig.ctx, inst)
    if not (ok_report.ok and ok_kind == TYPE):
        return None
    return LemmaTriple(sig.ctx, pi_type, flags, terms, inst)
