"""The subtyping simulation game, on terms and on counted automata.

``sim_children`` plays one round of the game on plain terms.  The checker
itself works on ``SupRep``: the supertype as a rooted automaton whose
states carry ``(orig, c, h)``.  ``orig`` is the state of the original
supertype automaton, ``c`` counts how often the state was copied into an
input context, and ``h`` how often it sat inside a hole of one.  The
counters never influence the game; they only help to spot contexts that
keep growing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .automaton import FINAL, IN, OUT, Automaton, canonical_key, from_automaton, key_automaton, to_automaton
from .contexts import ctx_decompose, fill
from .controllability import is_controllable
from .syntax import Branch, End, Rec, Select, SessionType, unfold, unfold_once


@dataclass(frozen=True)
class SuccessLeaf:
    pass


@dataclass(frozen=True)
class UnsuccessfulLeaf:
    reason: str


@dataclass(frozen=True)
class Children:
    items: tuple[tuple[str, tuple[SessionType, SessionType]], ...]


def sim_children(sub: SessionType, sup: SessionType):
    """One round of the game on terms.  Edges are ``!l``, ``?l`` or ``unfold``."""
    match sub:
        case End():
            if isinstance(unfold(sup), End):
                return SuccessLeaf()
            return UnsuccessfulLeaf("subtype ended but the supertype did not")
        case Rec():
            return Children((("unfold", (unfold_once(sub), sup)),))
        case Branch(bs):
            s = unfold(sup)
            if not isinstance(s, Branch):
                return UnsuccessfulLeaf("subtype inputs but the supertype does not")
            mine = dict(bs)
            keep = [(l, c) for l, c in s.branches if is_controllable(c)]
            missing = [l for l, _ in keep if l not in mine]
            if missing:
                return UnsuccessfulLeaf(f"supertype input {missing[0]} is not accepted by the subtype")
            return Children(tuple((f"?{l}", (mine[l], c)) for l, c in keep))
        case Select(bs):
            split = ctx_decompose(sup)
            if split is None:
                return UnsuccessfulLeaf("supertype cannot be split into an input context with outputs")
            ctx, fills = split
            labels = {l for l, _ in bs}
            heads = {}
            for k, f in fills.items():
                u = unfold(f)
                if set(u.labels) != labels:
                    return UnsuccessfulLeaf(
                        f"output labels {sorted(labels)} do not match supertype outputs {sorted(u.labels)}"
                    )
                heads[k] = u
            return Children(tuple(
                (f"!{l}", (c, fill(ctx, {k: u.get(l) for k, u in heads.items()}))) for l, c in bs
            ))
    raise TypeError(f"not a session type: {sub!r}")


@dataclass(frozen=True, eq=False)
class SupRep:
    """A counted supertype automaton, states renumbered breadth-first from 0."""

    aut: Automaton
    counters: tuple[tuple[int, int, int], ...]
    _keys: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def initial(cls, s: SessionType) -> "SupRep":
        return cls._compact(to_automaton(s), None)

    @classmethod
    def _compact(cls, aut: Automaton, counters) -> "SupRep":
        order = aut.reachable()
        num = {q: i for i, q in enumerate(order)}
        kinds = tuple(aut.kinds[q] for q in order)
        trans = tuple(tuple((l, num[r]) for l, r in aut.trans[q]) for q in order)
        if counters is None:
            cnt = tuple((q, 0, 0) for q in order)
        else:
            cnt = tuple(counters[q] for q in order)
        return cls(Automaton(kinds, trans, 0), cnt)

    @property
    def root_kind(self) -> str:
        return self.aut.kinds[0]

    def key(self, q: int = 0) -> tuple:
        """Label of state ``q`` for node comparisons.

        Bisimilarity where each state also shows the original supertype
        state it came from.  This is finer than plain bisimilarity, so equal
        keys still mean equal types.
        """
        k = self._keys.get(q)
        if k is None:
            marks = [o for o, _, _ in self.counters]
            k = self._keys[q] = canonical_key(self.aut, q, marks)
        return k

    def type_key(self, q: int = 0) -> tuple:
        k = self._keys.get(("type", q))
        if k is None:
            k = self._keys[("type", q)] = canonical_key(self.aut, q)
        return k

    @cached_property
    def size(self) -> int:
        return len(self.aut.kinds)

    def term(self, q: int = 0) -> SessionType:
        return from_automaton(self.aut, q)

    def controllable(self, q: int) -> bool:
        return _controllable_key(self.type_key(q))

    def label(self, q: int) -> str:
        o, c, h = self.counters[q]
        return f"<{o},{c},{h}>"

    # -- game steps --------------------------------------------------------

    def input_step(self, label: str) -> "SupRep":
        r = self.aut.successor(0, label)
        aut = Automaton(self.aut.kinds, self.aut.trans, r)
        return SupRep._compact(aut, self.counters)

    def skeleton(self) -> tuple[list[int], list[int]] | str:
        """Input states reachable from the root without crossing an output,
        and the output states where that walk stops.  A string explains why
        there is no such split."""
        inner: list[int] = []
        holes: list[int] = []
        seen = {0}
        todo = [0]
        while todo:
            q = todo.pop()
            kind = self.aut.kinds[q]
            if kind == FINAL:
                return "supertype reaches end before any output"
            if kind == OUT:
                holes.append(q)
                continue
            inner.append(q)
            for _, r in reversed(self.aut.trans[q]):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        if not holes:
            return "supertype loops on inputs without ever outputting"
        return sorted(inner), sorted(holes)

    def output_step(self, labels: tuple[str, ...]) -> dict[str, "SupRep"] | str:
        """Anticipate the outputs ``labels`` through the input context.

        The input skeleton is copied with ``c + 1``; every hole is replaced by
        its successor under the chosen label; every surviving old state gets
        ``h + 1``.
        """
        split = self.skeleton()
        if isinstance(split, str):
            return split
        inner, holes = split
        want = set(labels)
        for q in holes:
            have = {l for l, _ in self.aut.trans[q]}
            if have != want:
                return (f"output labels {sorted(want)} do not match supertype "
                        f"outputs {sorted(have)}")
        n = len(self.aut.kinds)
        copy = {q: n + i for i, q in enumerate(inner)}
        old_counters = [(o, c, h + 1) for o, c, h in self.counters]
        new_counters = [(self.counters[q][0], self.counters[q][1] + 1, self.counters[q][2]) for q in inner]
        kinds = self.aut.kinds + tuple(IN for _ in inner)
        out = {}
        for label in labels:
            extra = []
            for q in inner:
                row = []
                for l, r in self.aut.trans[q]:
                    if r in copy:
                        row.append((l, copy[r]))
                    else:
                        row.append((l, self.aut.successor(r, label)))
                extra.append(tuple(row))
            start = copy[0] if 0 in copy else self.aut.successor(0, label)
            aut = Automaton(kinds, self.aut.trans + tuple(extra), start)
            out[label] = SupRep._compact(aut, old_counters + new_counters)
        return out


_CTRL: dict[tuple, bool] = {}


def _controllable_key(key: tuple) -> bool:
    r = _CTRL.get(key)
    if r is None:
        r = _CTRL[key] = is_controllable(from_automaton(key_automaton(key)))
    return r
