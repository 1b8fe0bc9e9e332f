"""Selective unfolding and multi-hole input contexts.

Selective unfolding only unfolds recursion variables that sit under an
output selection.  The result of unfolding a supertype this way splits into
an input-only context whose holes hold closed, selection-headed types.
"""

from __future__ import annotations

from collections import deque

from .syntax import (
    Branch,
    End,
    Hole,
    Rec,
    Select,
    SessionType,
    Term,
    Var,
    size,
    subst,
    subst_many,
    unfold,
)


def oplus_guarded(var: str, t: Term, under_select: bool = False) -> bool:
    """True if every free occurrence of ``var`` in ``t`` sits under a selection."""
    match t:
        case Var(name):
            return name != var or under_select
        case Rec(v, body):
            return v == var or oplus_guarded(var, body, under_select)
        case Select(bs):
            return all(oplus_guarded(var, c, True) for _, c in bs)
        case Branch(bs):
            return all(oplus_guarded(var, c, under_select) for _, c in bs)
    return True


def _subst_under_select(t: Term, var: str, repl: Term, under: bool = False) -> Term:
    """Substitute ``repl`` for the free ``var`` occurrences inside selections."""
    match t:
        case Var(name):
            return repl if name == var and under else t
        case Rec(v, body):
            if v == var:
                return t
            return Rec(v, _subst_under_select(body, var, repl, under))
        case Select(bs):
            return Select(tuple((l, _subst_under_select(c, var, repl, True)) for l, c in bs))
        case Branch(bs):
            return Branch(tuple((l, _subst_under_select(c, var, repl, under)) for l, c in bs))
    return t


def sel_unfold(t: Term) -> Term:
    match t:
        case Branch(bs):
            return Branch(tuple((l, sel_unfold(c)) for l, c in bs))
        case Rec(v, body):
            if oplus_guarded(v, body):
                return subst(body, v, t)
            # marking the guarded occurrences and substituting for the marks
            # in one pass is the same as going through a fresh variable
            return Rec(v, sel_unfold(_subst_under_select(body, v, t)))
    return t


def holes(a: Term) -> list[int]:
    """Hole indices in pre-order, with repetitions."""
    match a:
        case Hole(k):
            return [k]
        case Rec(_, body):
            return holes(body)
        case Branch(bs) | Select(bs):
            return [k for _, c in bs for k in holes(c)]
    return []


def fill(a: Term, fills) -> Term:
    """Plug ``fills[k]`` into every hole ``k``; ``fills`` may be a dict or callable."""
    get = fills if callable(fills) else fills.__getitem__
    match a:
        case Hole(k):
            return get(k)
        case Rec(v, body):
            return Rec(v, fill(body, get))
        case Branch(bs):
            return Branch(tuple((l, fill(c, get)) for l, c in bs))
        case Select(bs):
            return Select(tuple((l, fill(c, get)) for l, c in bs))
    return a


def ctx_decompose(s: SessionType) -> tuple[Term, dict[int, SessionType]] | None:
    """Split ``sel_unfold(s)`` into an input context and closed selection fillers.

    Holes are numbered from 1 in pre-order.  Returns None when some path of
    the input skeleton ends in ``end`` or when there is no hole at all.
    """
    fills: dict[int, SessionType] = {}

    def walk(t: Term, env: dict[str, Term]) -> Term | None:
        match t:
            case End():
                return None
            case Var():
                return t
            case Select():
                k = len(fills) + 1
                fills[k] = subst_many(t, env)
                return Hole(k)
            case Rec(v, body):
                closed = subst_many(t, env)
                if isinstance(unfold(closed), Select):
                    k = len(fills) + 1
                    fills[k] = closed
                    return Hole(k)
                inner = walk(body, {**env, v: closed})
                return None if inner is None else Rec(v, inner)
            case Branch(bs):
                out = []
                for l, c in bs:
                    sub = walk(c, env)
                    if sub is None:
                        return None
                    out.append((l, sub))
                return Branch(tuple(out))
        raise TypeError(f"not a session type: {t!r}")

    ctx = walk(sel_unfold(s), {})
    if ctx is None or not fills:
        return None
    return ctx, fills


def ctx_is_reduction(a: Term, aq: Term) -> bool:
    """Whether ``aq`` is reachable from ``a`` by branch descent and unfolding."""
    cap = size(aq) + size(unfold(a))
    seen = {a}
    todo = deque([a])
    while todo:
        cur = todo.popleft()
        if cur == aq:
            return True
        match cur:
            case Branch(bs):
                nxt = [c for _, c in bs]
            case Rec(v, body):
                nxt = [subst(body, v, cur)]
            case _:
                nxt = []
        for n in nxt:
            if n not in seen and size(n) <= cap:
                seen.add(n)
                todo.append(n)
    return False


def is_input_context(a: Term) -> bool:
    match a:
        case Hole() | Var():
            return True
        case Rec(_, body):
            return is_input_context(body)
        case Branch(bs):
            return all(is_input_context(c) for _, c in bs)
    return False

