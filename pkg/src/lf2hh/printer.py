"""Concrete syntax for translated programs.

One declaration or clause per line: `kind t type.` for atomic types,
`type c <simple type>.` for constants and predicates, then one clause per
object declaration.  Clause syntax is `pi x \\ body` for quantifiers (the
body runs to the end of the clause), `=>` for implication (right
associative, binding tighter than `pi`), juxtaposition for application and
`true` for the empty premise.  Composite premises are parenthesized, so
every line parses back unambiguously.
"""

from __future__ import annotations

from .hohh import (
    Abs,
    App,
    Arrow,
    Atom,
    Bound,
    Const,
    Forall,
    Formula,
    HTerm,
    Implies,
    MetaVar,
    SimpleType,
    Top,
    deref,
)
from .translate import TranslationResult


def print_simple_type(ty: SimpleType) -> str:
    if isinstance(ty, Arrow):
        left = print_simple_type(ty.arg)
        if isinstance(ty.arg, Arrow):
            left = f"({left})"
        return f"{left} -> {print_simple_type(ty.res)}"
    return str(ty)


def _freshen(hint: str, used: set[str]) -> str:
    base = hint or "x"
    if base not in used:
        return base
    i = 1
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def print_term(t: HTerm, names: list[str], used: set[str], infix: bool = False) -> str:
    """names: display names of enclosing binders, innermost first."""
    t = deref(t)
    match t:
        case Const(name, _, _):
            return name
        case MetaVar() as m:
            return m.name
        case Bound(i):
            return names[i] if i < len(names) else f"#{i}"
        case Abs() as a:
            n = _freshen(a.hint, used)
            body = print_term(a.body, [n] + names, used | {n})
            return f"({n} \\ {body})"
        case App():
            parts = []
            head = t
            args: list[HTerm] = []
            while isinstance(head, App):
                args.append(head.arg)
                head = deref(head.fn)
            args.reverse()
            parts.append(print_term(head, names, used))
            for a in args:
                s = print_term(a, names, used)
                if isinstance(deref(a), App):
                    s = f"({s})"
                parts.append(s)
            s = " ".join(parts)
            return f"({s})" if infix else s
    raise TypeError(f"not an HTerm: {t!r}")


def print_formula(f: Formula, names: list[str], used: set[str]) -> str:
    match f:
        case Top():
            return "true"
        case Atom(t):
            return print_term(t, names, used)
        case Implies(l, r):
            left = print_formula(l, names, used)
            if isinstance(l, (Implies, Forall)):
                left = f"({left})"
            return f"{left} => {print_formula(r, names, used)}"
        case Forall(hint, _, b):
            n = _freshen(hint, used)
            return f"pi {n} \\ {print_formula(b, [n] + names, used | {n})}"
    raise TypeError(f"not a Formula: {f!r}")


def print_clause_line(f: Formula, used: set[str]) -> str:
    return print_formula(f, [], set(used)) + "."


def print_program(result: TranslationResult) -> str:
    """The whole translated signature and program as `.hh` text."""
    lines: list[str] = []
    for t in result.atomic_types():
        lines.append(f"kind {t} type.")
    lines.append("")
    for c in result.constants:
        lines.append(f"type {c.name} {print_simple_type(c.ty)}.")
    for p in result.predicates:
        lines.append(f"type {p.name} {print_simple_type(p.ty)}.")
    lines.append("")
    used = {c.name for c in result.constants} | {p.name for p in result.predicates}
    for f in result.formulas:
        lines.append(print_clause_line(f, used))
    return "\n".join(lines) + "\n"
