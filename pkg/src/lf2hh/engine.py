"""Goal-directed proof search over hereditary Harrop programs.

Depth-first search with chronological backtracking.  Destructive
metavariable bindings are logged on a trail and undone when a branch is
abandoned, so suspended alternatives always resume in the exact state they
were created in.  The program extension made by an implication goal and
the signature level raised by a universal goal are lexically scoped to the
subderivation: both are threaded down the goal recursion as immutable
values, never mutated in place, so a sibling subgoal can never see an
assumption or a constant that belongs to another branch's scope.

Universal goals introduce fresh constants stamped with the scope level at
which they were born; metavariables carry the level current when they were
created, and a metavariable may never be bound to a term mentioning a
constant of a strictly greater level.  That check is what keeps clause
instantiation honest about which constants exist at each point of a
derivation.

Unification solves the pattern fragment eagerly: a metavariable applied to
distinct binder variables (or to constants younger than the metavariable)
is inverted directly.  Anything outside that fragment, and every
flexible-flexible pair, is delayed.  Delayed pairs are rechecked when a
branch is about to produce an answer; a branch whose pairs cannot be
discharged is counted and skipped, never silently succeeded.  The optional
guessing mode attacks surviving pairs with bounded projection and
imitation steps (projections first); it exists so that deliberately
unsound translation variants can be driven to an actual wrong witness in
tests, and is off by default.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .hohh import (
    Abs,
    App,
    Atom,
    Bound,
    Clause,
    Const,
    Forall,
    Formula,
    GrammarError,
    HohhError,
    HTerm,
    Implies,
    MetaVar,
    SimpleType,
    Top,
    apply_spine,
    arg_types,
    arrow,
    clausify,
    formula_metavars,
    fresh_metavar,
    h_normalize,
    inst_formula,
    inst_term,
    is_goal,
    normalize_formula,
    shift_term,
    spine,
    term_facts,
    whnf,
)

DEFAULT_BUDGET = 100_000
BUDGET_ENV_VAR = "LF2HH_DEPTH"
DEFAULT_MAX_NESTING = 100_000
DEFAULT_GUESS_LIMIT = 16


class EngineError(HohhError):
    pass


class BudgetExhausted(EngineError):
    """The step budget or the nesting bound was hit; says nothing about
    whether more answers exist."""

    def __init__(self, message: str, stats: "SolveStats"):
        super().__init__(message)
        self.stats = stats


class NonPatternResidual(EngineError):
    """Search ended with no answers, but at least one branch was abandoned
    because its delayed unification pairs could not be discharged, so
    finite failure cannot be claimed either."""

    def __init__(self, message: str, stats: "SolveStats"):
        super().__init__(message)
        self.stats = stats


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise EngineError(f"{BUDGET_ENV_VAR} must be an integer, got {raw!r}")
    if value <= 0:
        raise EngineError(f"{BUDGET_ENV_VAR} must be positive, got {value}")
    return value


@dataclass
class SolveStats:
    backchain_steps: int = 0
    unify_calls: int = 0
    answers: int = 0
    residual_branches: int = 0
    depth_prunes: int = 0

    def snapshot(self) -> "SolveStats":
        return replace(self)


@dataclass(frozen=True)
class Answer:
    """One successful derivation.

    `bindings` maps every metavariable of the original goal that ended up
    bound to its fully resolved, normalized value.  `witness` is the value
    of the designated proof variable when one was named in the solve call.
    """

    bindings: dict
    witness: Optional[HTerm]
    stats: SolveStats


class UnifyOutcome(Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    DELAYED = "delayed"


@dataclass(frozen=True)
class DelayedPair:
    """A postponed equation, closed over the binders it was found under."""

    left: HTerm
    right: HTerm


class Program:
    """Immutable clause base indexed by head predicate name."""

    def __init__(self, clauses: Iterable[Clause]):
        self.clauses = tuple(clauses)
        index: dict[str, list[Clause]] = {}
        for c in self.clauses:
            name = c.head_name()
            if name is None:
                raise EngineError("program clause with a non-constant head")
            index.setdefault(name, []).append(c)
        self._index = {k: tuple(v) for k, v in index.items()}

    def static_candidates(self, pred: str) -> tuple[Clause, ...]:
        return self._index.get(pred, ())

    def __len__(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class _DynNode:
    """Linked list of assumption clauses, newest at the head."""

    pred: str
    clause: Clause
    rest: Optional["_DynNode"]


@dataclass(frozen=True)
class _GoalEnv:
    """The lexically scoped part of a sequent: signature level and the
    assumption clauses currently in force."""

    level: int = 0
    dyn: Optional[_DynNode] = None

    def assume(self, pred: str, clause: Clause) -> "_GoalEnv":
        return _GoalEnv(self.level, _DynNode(pred, clause, self.dyn))

    def raised(self) -> "_GoalEnv":
        return _GoalEnv(self.level + 1, self.dyn)

    def candidates(self, pred: str, static: tuple[Clause, ...]) -> Iterator[Clause]:
        node = self.dyn
        while node is not None:
            if node.pred == pred:
                yield node.clause
            node = node.rest
        yield from static


class _MirrorFail(Exception):
    """No unifier exists for the pair being inverted."""


class _MirrorDelay(Exception):
    """The pair is outside the fragment this unifier solves eagerly."""


def _eta_contract(t: HTerm) -> HTerm:
    """Strip `lam x1..xn. h a* x1..xn` down to `h a*` when legal."""
    t = whnf(t)
    n = 0
    body = t
    while isinstance(body, Abs):
        n += 1
        body = whnf(body.body)
    if n == 0:
        return t
    head, args = spine(body)
    if len(args) < n:
        return t
    split = len(args) - n
    for i, a in enumerate(args[split:]):
        a = whnf(a)
        if not (isinstance(a, Bound) and a.index == n - 1 - i):
            return t
    prefix = apply_spine(head, args[:split])
    try:
        return shift_term(prefix, -n)
    except GrammarError:
        return t


class Solver:
    """One search session.  Sessions share nothing and are single-threaded.

    budget counts clause selection attempts; None means unbounded.
    max_nesting bounds the goal-stack depth (a safety net for the Python
    runtime, reported as budget exhaustion).  max_depth, when given, cuts
    every branch at that many nested backchain steps, turning the search
    into bounded-depth enumeration.  guess_residuals enables the bounded
    projection/imitation attack on delayed pairs at answer time.
    """

    def __init__(
        self,
        program: Program,
        *,
        budget: Optional[int] = DEFAULT_BUDGET,
        max_nesting: int = DEFAULT_MAX_NESTING,
        max_depth: Optional[int] = None,
        guess_residuals: bool = False,
        guess_limit: int = DEFAULT_GUESS_LIMIT,
    ):
        self.program = program
        self.budget = budget
        self.max_nesting = max_nesting
        self.max_depth = max_depth
        self.guess_residuals = guess_residuals
        self.guess_limit = guess_limit
        self.stats = SolveStats()
        self.trail: list[tuple] = []
        self.delayed: tuple[DelayedPair, ...] = ()
        self._names = itertools.count(1)
        self._nesting = 0
        self._bind_count = 0

    # -- trail ------------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            kind, payload = self.trail.pop()
            if kind == "bind":
                payload.ref = None
            else:  # "delayed"
                self.delayed = payload

    def _bind(self, m: MetaVar, value: HTerm) -> None:
        m.ref = value
        self._bind_count += 1
        self.trail.append(("bind", m))

    def _set_delayed(self, pairs: tuple[DelayedPair, ...]) -> None:
        self.trail.append(("delayed", self.delayed))
        self.delayed = pairs

    # -- unification -------------------------------------------------------

    def unify(self, t1: HTerm, t2: HTerm) -> UnifyOutcome:
        """Solve t1 = t2 at the same simple type.  Bindings go on the
        trail; the caller undoes them on FAILURE.  DELAYED means no
        contradiction was found but at least one pair was postponed."""
        self.stats.unify_calls += 1
        before = len(self.delayed)
        if not self._unify_pairs([(t1, t2, ())]):
            return UnifyOutcome.FAILURE
        if len(self.delayed) > before:
            return UnifyOutcome.DELAYED
        return UnifyOutcome.SUCCESS

    def _delay(self, s: HTerm, t: HTerm, binders: tuple[SimpleType, ...]) -> None:
        for ty in binders:  # innermost first, so the fold closes correctly
            s = Abs("d", ty, s)
            t = Abs("d", ty, t)
        self._set_delayed(self.delayed + (DelayedPair(s, t),))

    def _unify_pairs(
        self, pairs: list[tuple[HTerm, HTerm, tuple[SimpleType, ...]]]
    ) -> bool:
        while pairs:
            s, t, binders = pairs.pop()
            s = whnf(s)
            t = whnf(t)
            if s is t:
                continue
            if isinstance(s, Abs) or isinstance(t, Abs):
                if isinstance(s, Abs) and isinstance(t, Abs):
                    pairs.append((s.body, t.body, (s.ty, *binders)))
                elif isinstance(s, Abs):
                    expanded = App(shift_term(t, 1), Bound(0))
                    pairs.append((s.body, expanded, (s.ty, *binders)))
                else:
                    expanded = App(shift_term(s, 1), Bound(0))
                    pairs.append((expanded, t.body, (t.ty, *binders)))
                continue
            hs, args_s = spine(s)
            ht, args_t = spine(t)
            s_flex = isinstance(hs, MetaVar)
            t_flex = isinstance(ht, MetaVar)
            if not s_flex and not t_flex:
                if hs != ht or len(args_s) != len(args_t):
                    return False
                pairs.extend((a, b, binders) for a, b in zip(args_s, args_t))
                continue
            if s_flex and t_flex:
                if hs is ht and args_s == args_t:
                    continue
                self._delay(s, t, binders)
                continue
            if t_flex:
                s, t = t, s
                hs, args_s, ht, args_t = ht, args_t, hs, args_s
            # s flexible, t rigid
            amap = self._pattern_args(hs, args_s, len(binders))
            doms, _ = arg_types(hs.ty)
            if amap is None or len(args_s) != len(doms):
                self._delay(s, t, binders)
                continue
            try:
                body = self._mirror(t, hs, amap, 0, rigid=True)
            except _MirrorDelay:
                self._delay(s, t, binders)
                continue
            except _MirrorFail:
                return False
            for ty in reversed(doms):
                body = Abs("w", ty, body)
            self._bind(hs, body)
        return True

    def _pattern_args(
        self, m: MetaVar, args: Sequence[HTerm], depth: int
    ) -> Optional[dict]:
        """Map each argument to its slot in m's binding, or None when the
        spine is not a pattern: arguments must be distinct binder variables
        or distinct constants younger than m."""
        amap: dict = {}
        n = len(args)
        for pos, a in enumerate(args):
            a = _eta_contract(a)
            key: Optional[tuple] = None
            if isinstance(a, Bound) and a.index < depth:
                key = ("b", a.index)
            elif isinstance(a, Const) and a.level > m.level:
                key = ("c", a)
            if key is None or key in amap:
                return None
            amap[key] = n - 1 - pos
        return amap

    def _mirror(self, t: HTerm, m: MetaVar, amap: dict, j: int, rigid: bool) -> HTerm:
        """Rewrite t as the body of m's binding, at depth j inside it.

        Occurrences of spine arguments become the matching binder slots.
        A violation in rigid position proves there is no unifier; under a
        flexible head it only proves the pair is outside the fragment.
        """
        has_mv, bceil, lceil = term_facts(t)
        if not has_mv and bceil <= j and lceil <= m.level:
            # Ground up to local binders and within m's scope: nothing to
            # rewrite, nothing that can fail.  Sharing the node also keeps
            # repeated bindings of large terms from copying them.
            return t
        t = whnf(t)
        if isinstance(t, Abs):
            return Abs(t.hint, t.ty, self._mirror(t.body, m, amap, j + 1, rigid))
        head, args = spine(t)
        if isinstance(head, MetaVar):
            if head is m:
                raise _MirrorFail if rigid else _MirrorDelay
            out = [self._mirror(a, m, amap, j, rigid=False) for a in args]
            if head.level > m.level:
                # This variable may use constants that m's binding cannot
                # mention directly.  Those that are arguments of m's pattern
                # stay reachable through the matching binder slot, so the
                # variable is raised over exactly that set; any other high
                # constant would make the occurrence unsolvable anyway.
                kept = sorted(
                    (slot, key[1])
                    for key, slot in amap.items()
                    if key[0] == "c" and key[1].level <= head.level
                )
                raised = fresh_metavar(
                    head.name, arrow([c.ty for _, c in kept], head.ty), m.level
                )
                self._bind(head, apply_spine(raised, [c for _, c in kept]))
                head = apply_spine(raised, [Bound(slot + j) for slot, _ in kept])
                return apply_spine(head, out)
            return apply_spine(head, out)
        if isinstance(head, Bound):
            if head.index < j:
                base: HTerm = head
            else:
                slot = amap.get(("b", head.index - j))
                if slot is None:
                    raise _MirrorFail if rigid else _MirrorDelay
                base = Bound(slot + j)
        else:  # Const
            if head.level > m.level:
                slot = amap.get(("c", head))
                if slot is None:
                    raise _MirrorFail if rigid else _MirrorDelay
                base = Bound(slot + j)
            else:
                base = head
        return apply_spine(base, [self._mirror(a, m, amap, j, rigid) for a in args])

    # -- delayed-pair resolution --------------------------------------------

    def _resolve_delayed(self) -> str:
        """Recheck postponed pairs until nothing changes.
        Returns 'ok', 'fail', or 'residual'."""
        while True:
            if not self.delayed:
                return "ok"
            pending = self.delayed
            self._set_delayed(())
            binds_before = self._bind_count
            for pair in pending:
                if not self._unify_pairs([(pair.left, pair.right, ())]):
                    return "fail"
            if self._bind_count == binds_before and len(self.delayed) >= len(pending):
                return "residual" if self.delayed else "ok"

    def _guess_delayed(self, remaining: list[int]) -> bool:
        """Bounded search for instantiations discharging the delayed pairs.

        Projections are tried before imitation so that a program admitting
        several instantiations commits to the most specific one first.
        Only flexible-rigid pairs are attacked; each attempted candidate
        costs one unit of the budget.
        """
        if not self.delayed:
            return True
        target: Optional[tuple[MetaVar, HTerm]] = None
        for pair in self.delayed:
            m, rhs = self._orient_for_guess(pair)
            if m is not None:
                target = (m, rhs)
                break
        if target is None:
            return False
        m, rhs = target
        doms, res = arg_types(m.ty)
        candidates: list[HTerm] = []
        for i, d in enumerate(doms):
            if d == res:
                body: HTerm = Bound(len(doms) - 1 - i)
                for ty in reversed(doms):
                    body = Abs("w", ty, body)
                candidates.append(body)
        rhead, _ = spine(rhs)
        if isinstance(rhead, Const) and rhead.level <= m.level:
            hdoms, hres = arg_types(rhead.ty)
            if hres == res:
                slots = [Bound(len(doms) - 1 - i) for i in range(len(doms))]
                spine_args: list[HTerm] = [
                    apply_spine(fresh_metavar("G", arrow(doms, hd), m.level), slots)
                    for hd in hdoms
                ]
                body = apply_spine(rhead, spine_args)
                for ty in reversed(doms):
                    body = Abs("w", ty, body)
                candidates.append(body)
        for cand in candidates:
            if remaining[0] <= 0:
                return False
            remaining[0] -= 1
            mark = self.mark()
            self._bind(m, cand)
            status = self._resolve_delayed()
            if status == "ok":
                return True
            if status == "residual" and self._guess_delayed(remaining):
                return True
            self.undo_to(mark)
        return False

    def _orient_for_guess(
        self, pair: DelayedPair
    ) -> tuple[Optional[MetaVar], Optional[HTerm]]:
        """Pick the flexible head and the rigid side of a pair, descending
        under the closing binders; None for flexible-flexible pairs."""
        s, t = whnf(pair.left), whnf(pair.right)
        while isinstance(s, Abs) and isinstance(t, Abs):
            s, t = whnf(s.body), whnf(t.body)
        hs, _ = spine(s)
        ht, _ = spine(t)
        if isinstance(hs, MetaVar) and not isinstance(ht, MetaVar):
            return hs, t
        if isinstance(ht, MetaVar) and not isinstance(hs, MetaVar):
            return ht, s
        return None, None

    # -- search --------------------------------------------------------------

    def solve(
        self, goal: Formula, witness_var: Optional[MetaVar] = None
    ) -> Iterator[Answer]:
        """All derivations of goal, lazily, in clause-source order."""
        goal = normalize_formula(goal)
        if not is_goal(goal):
            raise GrammarError("not a goal formula")
        qvars = formula_metavars(goal)
        if witness_var is not None and witness_var not in qvars:
            qvars.append(witness_var)
        base = self.mark()
        try:
            for _ in self._solve(goal, _GoalEnv(), 0):
                mark = self.mark()
                status = self._resolve_delayed()
                if status == "residual" and self.guess_residuals:
                    if self._guess_delayed([self.guess_limit]):
                        status = "ok"
                if status == "ok" and not self.delayed:
                    self.stats.answers += 1
                    yield self._make_answer(qvars, witness_var)
                    continue
                if status == "residual":
                    self.stats.residual_branches += 1
                self.undo_to(mark)
        finally:
            self.undo_to(base)
        if self.stats.answers == 0 and self.stats.residual_branches > 0:
            raise NonPatternResidual(
                f"{self.stats.residual_branches} branch(es) ended with "
                "unresolved unification pairs; derivability is undecided",
                self.stats.snapshot(),
            )

    def _make_answer(
        self, qvars: Sequence[MetaVar], witness_var: Optional[MetaVar]
    ) -> Answer:
        bindings: dict = {}
        for mv in qvars:
            if mv.ref is None:
                continue
            value = h_normalize(mv, (), mv.ty)
            _check_level_closed(value, mv.level, mv.name)
            bindings[mv] = value
        witness = bindings.get(witness_var) if witness_var is not None else None
        return Answer(bindings=bindings, witness=witness, stats=self.stats.snapshot())

    def _solve(self, goal: Formula, env: _GoalEnv, depth: int) -> Iterator[None]:
        self._nesting += 1
        if self._nesting > self.max_nesting:
            raise BudgetExhausted(
                f"goal nesting exceeded {self.max_nesting}", self.stats.snapshot()
            )
        try:
            match goal:
                case Top():
                    yield
                case Atom(t):
                    yield from self._backchain(t, env, depth)
                case Implies(d, g):
                    clause = clausify(d)
                    name = clause.head_name()
                    if name is None:
                        raise EngineError("assumption clause with a flexible head")
                    yield from self._solve(g, env.assume(name, clause), depth)
                case Forall(hint, ty, b):
                    child = env.raised()
                    c = Const(f"{hint or 'c'}!{next(self._names)}", ty, child.level)
                    yield from self._solve(inst_formula(b, c), child, depth)
                case _:
                    raise GrammarError(f"not a goal formula: {goal!r}")
        finally:
            self._nesting -= 1

    def _backchain(self, term: HTerm, env: _GoalEnv, depth: int) -> Iterator[None]:
        if self.max_depth is not None and depth >= self.max_depth:
            # pruned, not refuted: callers that need exhaustiveness must
            # treat a no-answer search with prunes as inconclusive
            self.stats.depth_prunes += 1
            return
        term = whnf(term)
        head, _ = spine(term)
        if isinstance(head, MetaVar):
            raise EngineError("cannot select clauses for a flexible goal head")
        if not isinstance(head, Const):
            raise EngineError(f"goal head is not a predicate constant: {head!r}")
        static = self.program.static_candidates(head.name)
        for clause in env.candidates(head.name, static):
            self.stats.backchain_steps += 1
            if self.budget is not None and self.stats.backchain_steps > self.budget:
                raise BudgetExhausted(
                    f"backchain budget of {self.budget} exhausted",
                    self.stats.snapshot(),
                )
            mark = self.mark()
            mvs = [fresh_metavar(x, ty, env.level) for x, ty in clause.vars]
            chead = clause.head
            for mv in reversed(mvs):
                chead = inst_term(chead, mv)
            if self.unify(term, chead) is UnifyOutcome.FAILURE:
                self.undo_to(mark)
                continue
            if clause.premises:
                goals = []
                for p in clause.premises:
                    for mv in reversed(mvs):
                        p = inst_formula(p, mv)
                    goals.append(p)
                yield from self._solve_seq(goals, 0, env, depth + 1)
            else:
                yield
            self.undo_to(mark)

    def _solve_seq(
        self, goals: Sequence[Formula], i: int, env: _GoalEnv, depth: int
    ) -> Iterator[None]:
        if i == len(goals):
            yield
            return
        for _ in self._solve(goals[i], env, depth):
            yield from self._solve_seq(goals, i + 1, env, depth)


def _check_level_closed(t: HTerm, level: int, owner: str) -> None:
    match t:
        case Const(name, _, lv):
            if lv > level:
                raise EngineError(
                    f"binding of {owner} leaks constant {name} of level {lv}"
                )
        case App(f, a):
            _check_level_closed(f, level, owner)
            _check_level_closed(a, level, owner)
        case Abs(_, _, b):
            _check_level_closed(b, level, owner)
        case _:
            pass


def solve(
    program: Program,
    goal: Formula,
    *,
    budget: Optional[int] = None,
    witness_var: Optional[MetaVar] = None,
    max_depth: Optional[int] = None,
    max_nesting: int = DEFAULT_MAX_NESTING,
    guess_residuals: bool = False,
    guess_limit: int = DEFAULT_GUESS_LIMIT,
) -> Iterator[Answer]:
    """Lazy answers for goal against program; budget defaults to the
    LF2HH_DEPTH environment variable or 100000 steps."""
    solver = Solver(
        program,
        budget=budget if budget is not None else default_budget(),
        max_depth=max_depth,
        max_nesting=max_nesting,
        guess_residuals=guess_residuals,
        guess_limit=guess_limit,
    )
    return solver.solve(goal, witness_var)


def substitute_bindings(f: Formula, bindings: dict) -> Formula:
    """Replace goal metavariables by their answer values (closed terms)."""

    def on_term(t: HTerm) -> HTerm:
        match t:
            case MetaVar() as m:
                if m in bindings:
                    return bindings[m]
                return on_term(m.ref) if m.ref is not None else m
            case App(fn, a):
                return App(on_term(fn), on_term(a))
            case Abs(x, ty, b):
                return Abs(x, ty, on_term(b))
            case _:
                return t

    match f:
        case Top():
            return f
        case Atom(t):
            return Atom(on_term(t))
        case Implies(l, r):
            return Implies(
                substitute_bindings(l, bindings), substitute_bindings(r, bindings)
            )
        case Forall(x, ty, b):
            return Forall(x, ty, substitute_bindings(b, bindings))
    raise TypeError(f"not a Formula: {f!r}")


def replay(
    program: Program,
    goal: Formula,
    answer: Answer,
    *,
    budget: Optional[int] = None,
) -> bool:
    """Determinism oracle: with the answer's bindings substituted in, the
    goal must be derivable again, head selection degenerating to matching
    against ground atoms."""
    ground = substitute_bindings(goal, answer.bindings)
    if budget is None:
        budget = max(1000, 4 * answer.stats.backchain_steps + 100)
    solver = Solver(program, budget=budget)
    try:
        for _ in solver.solve(ground):
            return True
    except (BudgetExhausted, NonPatternResidual):
        return False
    return False
