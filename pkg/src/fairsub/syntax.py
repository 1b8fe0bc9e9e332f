"""Session type terms: AST, substitution, duality, unfolding, printing.

Terms are immutable and compare structurally.  Branch maps are kept as
tuples of ``(label, term)`` pairs so that source order survives every
transformation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union


class SessionTypeError(Exception):
    """Base class for every error raised on malformed session types."""


class ParseError(SessionTypeError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        self.message = message
        if pos is not None:
            message = f"{message} (at offset {pos})"
        super().__init__(message)


class GuardednessError(ParseError):
    pass


class UnboundVariableError(ParseError):
    pass


class ShadowedVariableError(ParseError):
    pass


class DuplicateLabelError(ParseError):
    pass


@dataclass(frozen=True)
class End:
    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Rec:
    var: str
    body: "Term"

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Select:
    branches: tuple[tuple[str, "Term"], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.branches)

    def get(self, label: str) -> "Term":
        for l, t in self.branches:
            if l == label:
                return t
        raise KeyError(label)

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Branch:
    branches: tuple[tuple[str, "Term"], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.branches)

    def get(self, label: str) -> "Term":
        for l, t in self.branches:
            if l == label:
                return t
        raise KeyError(label)

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Hole:
    """A numbered hole; only legal inside input contexts."""

    index: int

    def __str__(self) -> str:
        return f"[]{self.index}"


SessionType = Union[End, Var, Rec, Select, Branch]
Term = Union[End, Var, Rec, Select, Branch, Hole]

END = End()


def sel(**branches: Term) -> Select:
    """Keyword shorthand, mostly for tests: ``sel(a=END, b=Var('t'))``."""
    return Select(tuple(branches.items()))


def bra(**branches: Term) -> Branch:
    return Branch(tuple(branches.items()))


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Rec(var, body):
            return free_vars(body) - {var}
        case Select(bs) | Branch(bs):
            out: frozenset[str] = frozenset()
            for _, c in bs:
                out |= free_vars(c)
            return out
        case _:
            return frozenset()


def bound_vars(t: Term) -> set[str]:
    out: set[str] = set()
    for node in subterms(t):
        if isinstance(node, Rec):
            out.add(node.var)
    return out


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over syntactic sub-terms (no unfolding)."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        match node:
            case Rec(_, body):
                stack.append(body)
            case Select(bs) | Branch(bs):
                stack.extend(c for _, c in reversed(bs))


def contains_end(t: Term) -> bool:
    return any(isinstance(n, End) for n in subterms(t))


def subst(t: Term, var: str, repl: Term) -> Term:
    """``t{repl/var}``: replace free occurrences of ``var``.

    ``repl`` is expected to be closed wherever this is used, so no capture
    avoidance is needed.
    """
    match t:
        case Var(name):
            return repl if name == var else t
        case Rec(v, body):
            if v == var:
                return t
            return Rec(v, subst(body, var, repl))
        case Select(bs):
            return Select(tuple((l, subst(c, var, repl)) for l, c in bs))
        case Branch(bs):
            return Branch(tuple((l, subst(c, var, repl)) for l, c in bs))
        case _:
            return t


def subst_many(t: Term, env: Mapping[str, Term]) -> Term:
    if not env:
        return t
    match t:
        case Var(name):
            return env.get(name, t)
        case Rec(v, body):
            inner = {k: r for k, r in env.items() if k != v}
            return Rec(v, subst_many(body, inner))
        case Select(bs):
            return Select(tuple((l, subst_many(c, env)) for l, c in bs))
        case Branch(bs):
            return Branch(tuple((l, subst_many(c, env)) for l, c in bs))
        case _:
            return t


def unfold_once(t: Term) -> Term:
    if isinstance(t, Rec):
        return subst(t.body, t.var, t)
    return t


def unfold(t: Term) -> Term:
    """Unfold every recursion in front of ``t``; terminates on guarded terms."""
    while isinstance(t, Rec):
        t = subst(t.body, t.var, t)
    return t


def dual(t: Term) -> Term:
    match t:
        case Select(bs):
            return Branch(tuple((l, dual(c)) for l, c in bs))
        case Branch(bs):
            return Select(tuple((l, dual(c)) for l, c in bs))
        case Rec(v, body):
            return Rec(v, dual(body))
        case _:
            return t


def ast_depth(t: Term) -> int:
    """Height of the syntax tree; leaves count as 1."""
    match t:
        case Rec(_, body):
            return 1 + ast_depth(body)
        case Select(bs) | Branch(bs):
            return 1 + max(ast_depth(c) for _, c in bs)
        case _:
            return 1


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def check_well_formed(t: Term, allow_holes: bool = False, closed: bool = True) -> None:
    """Raise if ``t`` breaks any of the structural invariants on types.

    Checks closedness, guarded recursion, distinct labels, non-empty branch
    maps and the absence of shadowed recursion variables.
    """

    def walk(node: Term, scope: tuple[str, ...]) -> None:
        match node:
            case Var(name):
                if closed and name not in scope:
                    raise UnboundVariableError(f"unbound variable {name!r}")
            case Rec(v, body):
                if v in scope:
                    raise ShadowedVariableError(f"recursion variable {v!r} shadows an outer binder")
                if not _guarded(body, v):
                    raise GuardednessError(f"unguarded recursion on {v!r}")
                walk(body, scope + (v,))
            case Select(bs) | Branch(bs):
                if not bs:
                    raise ParseError("empty choice")
                labels = [l for l, _ in bs]
                if len(set(labels)) != len(labels):
                    dup = next(l for l in labels if labels.count(l) > 1)
                    raise DuplicateLabelError(f"duplicate label {dup!r}")
                for _, c in bs:
                    walk(c, scope)
            case Hole():
                if not allow_holes:
                    raise ParseError("hole outside an input context")
            case End():
                pass

    walk(t, ())


def _guarded(t: Term, var: str) -> bool:
    match t:
        case Var(name):
            return name != var
        case Rec(v, body):
            return v == var or _guarded(body, var)
        case _:
            return True


def pretty(t: Term) -> str:
    match t:
        case End():
            return "end"
        case Var(name):
            return name
        case Hole(k):
            return f"[]{k}"
        case Rec(v, body):
            return f"rec {v} . {pretty(body)}"
        case Select(bs):
            return "+{ " + ", ".join(f"{l}: {pretty(c)}" for l, c in bs) + " }"
        case Branch(bs):
            return "&{ " + ", ".join(f"{l}: {pretty(c)}" for l, c in bs) + " }"
    raise TypeError(f"not a term: {t!r}")
