"""Text syntax for session types.

    T ::= end | rec X . T | X | +{ B } | &{ B }
    B ::= LABEL : T (, LABEL : T)*

``#`` starts a comment running to the end of the line.  With
``allow_holes=True`` the parser also accepts ``[]k`` for input-context holes.
"""

from __future__ import annotations

import re

from .syntax import (
    END,
    Branch,
    DuplicateLabelError,
    GuardednessError,
    Hole,
    ParseError,
    Rec,
    Select,
    ShadowedVariableError,
    Term,
    UnboundVariableError,
    Var,
    _guarded,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<open>[+&]\{)
  | (?P<close>\})
  | (?P<colon>:)
  | (?P<comma>,)
  | (?P<dot>\.)
  | (?P<hole>\[\]\s*\d+)
  | (?P<word>[A-Za-z0-9_$]+)
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


_LABEL = re.compile(r"[A-Za-z0-9_]+")


class _Parser:
    def __init__(self, text: str, allow_holes: bool):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_holes = allow_holes

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, what: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def term(self, scope: tuple[str, ...]) -> Term:
        kind, text, pos = self.peek()
        if kind == "open":
            self.i += 1
            branches = self.branches(scope)
            self.take("close", "'}'")
            return Select(branches) if text[0] == "+" else Branch(branches)
        if kind == "hole":
            if not self.allow_holes:
                raise ParseError("holes are only allowed in input contexts", pos)
            self.i += 1
            return Hole(int(text[2:].strip()))
        if kind != "word":
            raise ParseError(f"expected a session type, found {text or 'end of input'!r}", pos)
        self.i += 1
        if text == "end":
            return END
        if text == "rec":
            _, var, vpos = self.take("word", "recursion variable")
            if var in ("end", "rec"):
                raise ParseError(f"{var!r} is a keyword", vpos)
            if var in scope:
                raise ShadowedVariableError(f"recursion variable {var!r} shadows an outer binder", vpos)
            self.take("dot", "'.'")
            body = self.term(scope + (var,))
            if not _guarded(body, var):
                raise GuardednessError(f"unguarded recursion on {var!r}", pos)
            return Rec(var, body)
        if text not in scope:
            raise UnboundVariableError(f"unbound variable {text!r}", pos)
        return Var(text)

    def branches(self, scope: tuple[str, ...]) -> tuple[tuple[str, Term], ...]:
        out: list[tuple[str, Term]] = []
        seen: set[str] = set()
        if self.peek()[0] == "close":
            raise ParseError("empty choice", self.peek()[2])
        while True:
            _, label, pos = self.take("word", "label")
            if not _LABEL.fullmatch(label):
                raise ParseError(f"bad label {label!r}", pos)
            if label in seen:
                raise DuplicateLabelError(f"duplicate label {label!r}", pos)
            seen.add(label)
            self.take("colon", "':'")
            out.append((label, self.term(scope)))
            if self.peek()[0] != "comma":
                return tuple(out)
            self.i += 1


def parse(text: str, allow_holes: bool = False) -> Term:
    p = _Parser(text, allow_holes)
    t = p.term(())
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {tok!r}", pos)
    return t


def parse_context(text: str) -> Term:
    return parse(text, allow_holes=True)


def parse_file(path) -> Term:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
