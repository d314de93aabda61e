"""End-to-end plumbing: source text in, verified witnesses out.

Signatures are parsed, context-checked, then canonicalized (every
classifier rewritten to its beta-normal eta-long form) before translation,
so the translator only ever sees canonical input.  Queries follow the same
path: kind-checked against the signature, canonicalized, translated
alongside it.

Searches run on a dedicated thread with a large stack.  The engine's
depth-first loop suspends one Python generator frame per open subgoal, and
a long derivation (a few hundred thousand subgoals) overflows the default
interpreter limits long before it exhausts the step budget; the worker
thread raises both the stack size and the recursion limit so the nesting
guard in the engine is what actually fires.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

from .engine import (
    Answer,
    BudgetExhausted,
    NonPatternResidual,
    Program,
    Solver,
    SolveStats,
    default_budget,
)
from .extract import DecodeError, decode, verify_witness
from .lfcheck import CheckReport, check_context, infer_kind
from .lfsyntax import (
    TYPE,
    KindType,
    LfContext,
    LfExpr,
    Sort,
    canonicalize,
    canonicalize_kind,
    sort_of,
)
from .parser import SourceSignature, parse_query, parse_source_signature
from .translate import (
    TranslateOptions,
    TranslationResult,
    translate_query,
    translate_signature,
)

T = TypeVar("T")

SEARCH_STACK_BYTES = 512 * 1024 * 1024
SEARCH_RECURSION_LIMIT = 1_000_000


class PipelineError(Exception):
    pass


def run_search(fn: Callable[[], T]) -> T:
    """Run fn on a worker thread with a large stack and recursion limit."""
    box: dict = {}

    def work() -> None:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(SEARCH_RECURSION_LIMIT)
        try:
            box["value"] = fn()
        except BaseException as e:  # propagated to the caller below
            box["error"] = e
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(SEARCH_STACK_BYTES)
    try:
        worker = threading.Thread(target=work, name="lf2hh-search")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
    if "error" in box:
        raise box["error"]
    return box["value"]


@dataclass(frozen=True)
class LoadedSignature:
    source: SourceSignature
    raw: LfContext
    context: Optional[LfContext]  # canonicalized; None when the check failed
    report: CheckReport

    @property
    def ok(self) -> bool:
        return self.report.ok


def load_signature(text: str, filename: str = "<signature>") -> LoadedSignature:
    """Parse, check, and canonicalize a signature."""
    source = parse_source_signature(text, filename)
    raw = source.context()
    report = check_context(raw)
    if not report.ok:
        return LoadedSignature(source, raw, None, report)
    return LoadedSignature(source, raw, _canonicalize_context(raw), report)


def _canonicalize_context(ctx: LfContext) -> LfContext:
    out = LfContext()
    for entry in ctx.entries:
        sort = sort_of(entry.classifier, out)
        if sort is Sort.KIND:
            cls = canonicalize_kind(entry.classifier, out)
        else:
            cls = canonicalize(entry.classifier, TYPE, out)
        out = out.extended(entry.name, cls)
    return out


def prepare_query(loaded: LoadedSignature, text: str) -> LfExpr:
    """Parse a query type, kind-check it, and canonicalize it."""
    if loaded.context is None:
        raise PipelineError("cannot pose queries against an ill-formed signature")
    ctx = loaded.context
    expr = parse_query(text, ctx)
    report, kind = infer_kind(ctx, expr)
    if not report.ok:
        detail = report.failure.detail if report.failure else "kind check failed"
        raise PipelineError(f"query is not a well-formed type: {detail}")
    if not isinstance(kind, KindType):
        raise PipelineError("query must be a type, not a type family")
    return canonicalize(expr, TYPE, ctx)


def translate(loaded: LoadedSignature, options: TranslateOptions) -> TranslationResult:
    if loaded.context is None:
        raise PipelineError("cannot translate an ill-formed signature")
    return translate_signature(loaded.context, options)


@dataclass(frozen=True)
class WitnessResult:
    answer: Answer
    decoded: Optional[LfExpr]
    decode_error: Optional[str]
    report: Optional[CheckReport]

    @property
    def verified(self) -> Optional[bool]:
        return self.report.ok if self.report is not None else None


@dataclass(frozen=True)
class QueryOutcome:
    """status: 'proved' (at least one answer), 'failed' (search space
    exhausted without answers), 'budget', or 'residual'."""

    status: str
    results: tuple[WitnessResult, ...]
    stats: Optional[SolveStats]
    detail: str = ""

    @property
    def any_verified(self) -> bool:
        return any(r.verified for r in self.results)


def solve_query(
    loaded: LoadedSignature,
    query_type: LfExpr,
    options: TranslateOptions,
    *,
    budget: Optional[int] = None,
    max_answers: Optional[int] = 1,
    verify: bool = True,
    guess_residuals: bool = False,
    until_verified: bool = False,
) -> QueryOutcome:
    """Translate, search, decode, verify.  max_answers=None exhausts the
    search (subject to the budget).  With until_verified the search keeps
    going past answers whose witness fails to check, collecting them, and
    stops at the first one that verifies."""
    if loaded.context is None:
        raise PipelineError("cannot solve against an ill-formed signature")
    ctx = loaded.context
    result = translate_signature(ctx, options)
    goal, witness_var = translate_query(ctx, query_type, options)
    program = Program(result.clauses)

    def search() -> QueryOutcome:
        solver = Solver(
            program,
            budget=budget if budget is not None else default_budget(),
            guess_residuals=guess_residuals,
        )
        collected: list[WitnessResult] = []
        status = "failed"
        detail = ""
        try:
            for answer in solver.solve(goal, witness_var=witness_var):
                wr = _finish_answer(answer, query_type, ctx, verify)
                collected.append(wr)
                if until_verified:
                    if wr.verified:
                        break
                elif max_answers is not None and len(collected) >= max_answers:
                    break
            if collected:
                status = "proved"
        except BudgetExhausted as e:
            status = "proved" if collected else "budget"
            detail = str(e)
        except NonPatternResidual as e:
            status = "residual"
            detail = str(e)
        return QueryOutcome(status, tuple(collected), solver.stats.snapshot(), detail)

    return run_search(search)


def _finish_answer(
    answer: Answer, query_type: LfExpr, ctx: LfContext, verify: bool
) -> WitnessResult:
    if answer.witness is None:
        return WitnessResult(answer, None, "no witness binding in the answer", None)
    try:
        obj = decode(answer.witness, query_type, ctx)
    except DecodeError as e:
        return WitnessResult(answer, None, str(e), None)
    report = verify_witness(ctx, obj, query_type) if verify else None
    return WitnessResult(answer, obj, None, report)
