"""Parser for the Twelf-like surface syntax of signatures and queries.

Declarations look like `append : list -> list -> list -> type.` and end
with a dot.  `{x:A} B` is a dependent product, `[x:A] M` an abstraction,
`A -> B` sugar for a product whose binder is unused, application is
juxtaposition, `%%` starts a line comment.  Every identifier must be bound
by an enclosing brace/bracket binder or declared earlier in the file;
there is no implicit quantification.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .lfsyntax import (
    App,
    Bound,
    KindType,
    Lam,
    LfContext,
    LfExpr,
    Pi,
    Var,
    shift,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, filename: str = "<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(f"{filename}:{line}:{col}: {message}")


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT TYPE : . { } [ ] ( ) -> EOF
    text: str
    span: Span


@dataclass(frozen=True)
class SourceDecl:
    name: str
    classifier: LfExpr
    span: Span


@dataclass(frozen=True)
class SourceSignature:
    decls: tuple[SourceDecl, ...]

    def context(self) -> LfContext:
        ctx = LfContext()
        for d in self.decls:
            ctx = ctx.extended(d.name, d.classifier)
        return ctx


_PUNCT = {":": ":", ".": ".", "{": "{", "}": "}", "[": "[", "]": "]", "(": "(", ")": ")"}
_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_CHAR = re.compile(r"[A-Za-z0-9_'-]")


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("%%", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if text.startswith("->", i):
            tokens.append(Token("->", "->", span))
            i += 2
            col += 2
            continue
        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, span))
            i += 1
            col += 1
            continue
        if _IDENT_START.match(c):
            j = i
            while j < n and _IDENT_CHAR.match(text[j]):
                if text[j] == "-" and j + 1 < n and text[j + 1] == ">":
                    break
                j += 1
            word = text[i:j]
            kind = "TYPE" if word == "type" else "IDENT"
            tokens.append(Token(kind, word, span))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col, filename)
    tokens.append(Token("EOF", "", Span(line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], known: set[str], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.known = known  # previously declared signature names
        self.filename = filename

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {kind!r}, found {t.text or 'end of input'!r}", t)
        return self.next()

    def fail(self, message: str, tok: Optional[Token] = None) -> None:
        tok = tok or self.peek()
        raise ParseError(message, tok.span.line, tok.span.col, self.filename)

    # expr := binder expr | app ('->' expr)?
    def expr(self, binders: list[str]) -> LfExpr:
        t = self.peek()
        if t.kind in ("{", "["):
            close = "}" if t.kind == "{" else "]"
            self.next()
            name = self.expect("IDENT").text
            self.expect(":")
            dom = self.expr(binders)
            self.expect(close)
            body = self.expr([name] + binders)
            return Pi(name, dom, body) if close == "}" else Lam(name, dom, body)
        left = self.app(binders)
        if self.peek().kind == "->":
            self.next()
            right = self.expr(binders)
            # unused binder: the codomain was parsed outside its scope
            return Pi("", left, shift(right, 1))
        return left

    def app(self, binders: list[str]) -> LfExpr:
        e = self.atom(binders)
        while self.peek().kind in ("IDENT", "TYPE", "("):
            e = App(e, self.atom(binders))
        return e

    def atom(self, binders: list[str]) -> LfExpr:
        t = self.next()
        if t.kind == "TYPE":
            return KindType()
        if t.kind == "(":
            e = self.expr(binders)
            self.expect(")")
            return e
        if t.kind == "IDENT":
            if t.text in binders:
                return Bound(binders.index(t.text))
            if t.text in self.known:
                return Var(t.text)
            self.fail(
                f"undeclared identifier {t.text!r} (implicit arguments are not "
                f"supported; declare it or bind it with {{{t.text}:...}})",
                t,
            )
        self.fail(f"expected a term, found {t.text or 'end of input'!r}", t)
        raise AssertionError  # fail always raises

    def declaration(self) -> SourceDecl:
        name_tok = self.expect("IDENT")
        if name_tok.text in self.known:
            self.fail(f"{name_tok.text!r} is declared twice", name_tok)
        self.expect(":")
        classifier = self.expr([])
        self.expect(".")
        return SourceDecl(name_tok.text, classifier, name_tok.span)


def parse_source_signature(text: str, filename: str = "<input>") -> SourceSignature:
    p = _Parser(tokenize(text, filename), set(), filename)
    decls: list[SourceDecl] = []
    while p.peek().kind != "EOF":
        d = p.declaration()
        p.known.add(d.name)
        decls.append(d)
    return SourceSignature(tuple(decls))


def parse_signature(text: str, filename: str = "<input>") -> LfContext:
    """Text of dot-terminated declarations -> ordered context."""
    return parse_source_signature(text, filename).context()


def parse_query(text: str, ctx: LfContext, filename: str = "<query>") -> LfExpr:
    """A single type expression over the signature's names."""
    p = _Parser(tokenize(text, filename), {e.name for e in ctx}, filename)
    e = p.expr([])
    if p.peek().kind == ".":
        p.next()
    if p.peek().kind != "EOF":
        p.fail("trailing input after query")
    return e
