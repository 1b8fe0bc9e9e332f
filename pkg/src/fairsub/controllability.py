"""Controllability: does a session type have any compliant partner?

A type is controllable when each input prefix can be cut down to a single
branch so that the result passes the ``ok`` judgement:

    end ok
    rec t . T ok     if end occurs in T and T{end/t} ok
    &{l: T} ok       if T ok
    +{l_i: T_i} ok   if every T_i ok

The search for the cut uses a small dynamic programme instead of trying
every combination.  Each sub-term is summarised by the pairs
``(has_end, outermost_free_binder)`` it can achieve; ``rec`` keeps only the
pairs meeting its side condition.  Labels are then fixed greedily in
pre-order and source order, re-running the programme after each choice, so
the witness is the first one a naive enumeration would find.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Mapping

from .syntax import END, Branch, End, Rec, Select, SessionType, Term, Var, contains_end, dual, subst

INF = float("inf")

Path = tuple[str, ...]
ReplacementChoice = dict[Path, str]


class PreconditionError(ValueError):
    pass


def ok_check(t: Term) -> bool:
    """The ``ok`` judgement, applied rule by rule."""
    match t:
        case End():
            return True
        case Var():
            return False
        case Rec(v, body):
            return contains_end(body) and ok_check(subst(body, v, END))
        case Branch(bs):
            if len(bs) != 1:
                raise PreconditionError("ok is only defined after input prefixes are cut to one branch")
            return ok_check(bs[0][1])
        case Select(bs):
            return all(ok_check(c) for _, c in bs)
    raise TypeError(f"not a session type: {t!r}")


def apply_replacement(t: Term, choice: Mapping[Path, str], path: Path = ()) -> Term:
    match t:
        case Rec(v, body):
            return Rec(v, apply_replacement(body, choice, path))
        case Branch(bs):
            label = choice[path]
            return Branch(((label, apply_replacement(dict(bs)[label], choice, path + (label,))),))
        case Select(bs):
            return Select(tuple((l, apply_replacement(c, choice, path + (l,))) for l, c in bs))
    return t


def _front(pairs) -> frozenset:
    """Drop pairs dominated by another (more end, smaller free binder)."""
    pairs = set(pairs)
    return frozenset(
        (e, m) for e, m in pairs
        if not any((e2 >= e and m2 <= m) and (e2, m2) != (e, m) for e2, m2 in pairs)
    )


def _summaries(t: Term, choice: Mapping[Path, str], path: Path = (),
               env: tuple[str, ...] = ()) -> frozenset:
    match t:
        case End():
            return frozenset({(True, INF)})
        case Var(name):
            return frozenset({(False, env.index(name))})
        case Rec(v, body):
            d = len(env)
            out = set()
            for e, m in _summaries(body, choice, path, env + (v,)):
                if e or m < d:
                    out.add((e, m if m < d else INF))
            return _front(out)
        case Branch(bs):
            if path in choice:
                bs = [(choice[path], dict(bs)[choice[path]])]
            out = set()
            for l, c in bs:
                out |= _summaries(c, choice, path + (l,), env)
            return _front(out)
        case Select(bs):
            acc = {(False, INF)}
            for l, c in bs:
                kid = _summaries(c, choice, path + (l,), env)
                acc = _front((e1 or e2, min(m1, m2)) for e1, m1 in acc for e2, m2 in kid)
                if not acc:
                    break
            return frozenset(acc)
    raise TypeError(f"not a session type: {t!r}")


def ctrl_check(t: SessionType) -> tuple[bool, ReplacementChoice | None]:
    """Return whether ``t`` is controllable, with the first witnessing cut."""
    if not _summaries(t, {}):
        return False, None
    choice: ReplacementChoice = {}

    def walk(node: Term, path: Path) -> None:
        match node:
            case Rec(_, body):
                walk(body, path)
            case Select(bs):
                for l, c in bs:
                    walk(c, path + (l,))
            case Branch(bs):
                for l, c in bs:
                    choice[path] = l
                    if _summaries(t, choice):
                        walk(c, path + (l,))
                        return
                raise AssertionError("feasible cut lost during reconstruction")

    walk(t, ())
    return True, choice


@lru_cache(maxsize=65536)
def is_controllable(t: SessionType) -> bool:
    return bool(_summaries(t, {}))


def controlled_form(t: SessionType) -> SessionType | None:
    ok, choice = ctrl_check(t)
    return apply_replacement(t, choice) if ok else None


def synthesize_partner(t: SessionType) -> SessionType | None:
    """The dual of the cut type, which is compliant with ``t``."""
    cut = controlled_form(t)
    return None if cut is None else dual(cut)


def _branch_paths(t: Term, path: Path = ()) -> list[tuple[Path, tuple[str, ...]]]:
    out = []
    match t:
        case Rec(_, body):
            out += _branch_paths(body, path)
        case Branch(bs) | Select(bs):
            if isinstance(t, Branch):
                out.append((path, tuple(l for l, _ in bs)))
            for l, c in bs:
                out += _branch_paths(c, path + (l,))
    return out


def _ctrl_bruteforce(t: SessionType) -> tuple[bool, SessionType | None]:
    """Try every cut in enumeration order; exponential, used as a test oracle."""
    sites = _branch_paths(t)
    for labels in itertools.product(*(ls for _, ls in sites)):
        choice = {p: l for (p, _), l in zip(sites, labels)}
        cut = apply_replacement(t, choice)
        if ok_check(cut):
            return True, cut
    return False, None
