"""Finite automaton view of session types and strong bisimilarity.

States are numbered in depth-first pre-order of the syntax tree, so the
numbering matches the usual hand-drawn machines: ``rec t . +{tm: t, ...}``
puts the selection in state 0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .syntax import END, Branch, End, Rec, Select, SessionTypeError, Term, Var, free_vars

OUT, IN, FINAL = "!", "?", "end"


class AutomatonShapeError(SessionTypeError):
    pass


@dataclass(frozen=True)
class Automaton:
    kinds: tuple[str, ...]
    trans: tuple[tuple[tuple[str, int], ...], ...]
    start: int = 0

    @property
    def states(self) -> range:
        return range(len(self.kinds))

    @property
    def final(self) -> frozenset[int]:
        return frozenset(q for q, k in enumerate(self.kinds) if k == FINAL)

    def successor(self, q: int, label: str) -> int | None:
        for l, r in self.trans[q]:
            if l == label:
                return r
        return None

    def edges(self) -> Iterable[tuple[int, str, str, int]]:
        for q, ts in enumerate(self.trans):
            for l, r in ts:
                yield q, self.kinds[q], l, r

    @classmethod
    def from_edges(cls, start: int, edges: Iterable[tuple[int, str, str, int]],
                   final: Iterable[int] = ()) -> "Automaton":
        """Build from ``(src, polarity, label, dst)`` tuples, checking shape."""
        edges = list(edges)
        final = set(final)
        n = max([start, *final, *(e[0] for e in edges), *(e[3] for e in edges)]) + 1
        kinds: list[str | None] = [None] * n
        trans: list[list[tuple[str, int]]] = [[] for _ in range(n)]
        for src, pol, label, dst in edges:
            if pol not in (OUT, IN):
                raise AutomatonShapeError(f"bad polarity {pol!r}")
            if src in final:
                raise AutomatonShapeError(f"final state {src} has outgoing transitions")
            if kinds[src] not in (None, pol):
                raise AutomatonShapeError(f"state {src} mixes ! and ? transitions")
            if any(l == label for l, _ in trans[src]):
                raise AutomatonShapeError(f"state {src} has two {label!r} transitions")
            kinds[src] = pol
            trans[src].append((label, dst))
        for q in final:
            kinds[q] = FINAL
        for q, k in enumerate(kinds):
            if k is None:
                raise AutomatonShapeError(f"state {q} is neither final nor has transitions")
        return cls(tuple(kinds), tuple(tuple(ts) for ts in trans), start)

    def reachable(self, q: int | None = None) -> list[int]:
        q = self.start if q is None else q
        seen = {q}
        order = [q]
        i = 0
        while i < len(order):
            for _, r in self.trans[order[i]]:
                if r not in seen:
                    seen.add(r)
                    order.append(r)
            i += 1
        return order


def to_automaton(t: Term) -> Automaton:
    kinds: list[str] = []
    trans: list[list[tuple[str, int]]] = []

    def build(node: Term, env: dict[str, int]) -> int:
        binders = []
        while isinstance(node, Rec):
            binders.append(node.var)
            node = node.body
        if isinstance(node, Var):
            # a chain of recs ending in an outer variable
            return env[node.name]
        q = len(kinds)
        if binders:
            env = {**env, **{v: q for v in binders}}
        match node:
            case End():
                kinds.append(FINAL)
                trans.append([])
            case Select(bs) | Branch(bs):
                kinds.append(OUT if isinstance(node, Select) else IN)
                trans.append([])
                for label, child in bs:
                    trans[q].append((label, build(child, env)))
            case _:
                raise TypeError(f"cannot build an automaton for {node!r}")
        return q

    start = build(t, {})
    return Automaton(tuple(kinds), tuple(tuple(ts) for ts in trans), start)


def from_automaton(a: Automaton, q: int | None = None) -> Term:
    """Read a term back off the automaton; back edges become ``rec``/variables."""
    on_stack: set[int] = set()

    def build(s: int) -> Term:
        name = f"t{s}"
        if s in on_stack:
            return Var(name)
        if a.kinds[s] == FINAL:
            return END
        on_stack.add(s)
        bs = tuple((l, build(r)) for l, r in a.trans[s])
        on_stack.discard(s)
        node = Select(bs) if a.kinds[s] == OUT else Branch(bs)
        return Rec(name, node) if name in free_vars(node) else node

    return build(a.start if q is None else q)


def refine(a: Automaton, marks=None) -> list[int]:
    """Coarsest bisimulation partition; returns the block index of every state.

    ``marks`` optionally gives every state an extra observable label that
    bisimilar states must share.
    """
    if marks is None:
        block = [{OUT: 0, IN: 1, FINAL: 2}[k] for k in a.kinds]
    else:
        ids: dict = {}
        block = [ids.setdefault((k, m), len(ids)) for k, m in zip(a.kinds, marks)]
    while True:
        sigs: dict[tuple, int] = {}
        new = []
        for q in a.states:
            sig = (block[q], tuple(sorted((l, block[r]) for l, r in a.trans[q])))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == len(set(block)):
            return new
        block = new


def disjoint_union(a: Automaton, b: Automaton) -> tuple[Automaton, int]:
    """Union of two automata; ``b``'s states are shifted by the returned offset."""
    off = len(a.kinds)
    trans = a.trans + tuple(tuple((l, r + off) for l, r in ts) for ts in b.trans)
    return Automaton(a.kinds + b.kinds, trans, a.start), off


def bisimilar_states(a: Automaton, p: int, b: Automaton, q: int) -> bool:
    u, off = disjoint_union(a, b)
    block = refine(u)
    return block[p] == block[q + off]


def bisimilar(t: Term, s: Term) -> bool:
    a, b = to_automaton(t), to_automaton(s)
    return bisimilar_states(a, a.start, b, b.start)


def canonical_key(a: Automaton, q: int | None = None, marks=None) -> tuple:
    """A hashable value equal for two states exactly when they are bisimilar.

    The minimal automaton reachable from ``q`` is numbered breadth-first with
    labels visited in sorted order, which makes the numbering canonical.
    """
    q = a.start if q is None else q
    block = refine(a, marks)
    rep: dict[int, int] = {}
    for s in a.reachable(q):
        rep.setdefault(block[s], s)
    num = {block[q]: 0}
    order = deque([block[q]])
    out = []
    while order:
        b = order.popleft()
        s = rep[b]
        row = []
        for l, r in sorted(a.trans[s]):
            br = block[r]
            if br not in num:
                num[br] = len(num)
                order.append(br)
            row.append((l, num[br]))
        head = a.kinds[s] if marks is None else (a.kinds[s], marks[s])
        out.append((head, tuple(row)))
    return tuple(out)


def key_automaton(key: tuple) -> Automaton:
    """Rebuild the minimal automaton encoded by an unmarked ``canonical_key``."""
    return Automaton(tuple(k for k, _ in key), tuple(row for _, row in key), 0)


def minimize(a: Automaton) -> Automaton:
    return key_automaton(canonical_key(a))


def type_key(t: Term) -> tuple:
    return canonical_key(to_automaton(t))


def can_reach_final(a: Automaton) -> list[bool]:
    """For each state, whether some path leads to a final state."""
    preds: list[list[int]] = [[] for _ in a.states]
    for q, _, _, r in a.edges():
        preds[r].append(q)
    ok = [k == FINAL for k in a.kinds]
    work = [q for q in a.states if ok[q]]
    while work:
        r = work.pop()
        for q in preds[r]:
            if not ok[q]:
                ok[q] = True
                work.append(q)
    return ok
