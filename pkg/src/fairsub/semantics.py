"""Asynchronous semantics of two session types and a fair compliance checker.

A configuration pairs each endpoint with the FIFO queue of messages sent to
it.  Outputs append to the partner's queue, inputs consume the head of the
endpoint's own queue.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .automaton import FINAL, IN, OUT, Automaton, can_reach_final, from_automaton, to_automaton
from .controllability import is_controllable
from .syntax import Branch, End, Select, SessionType, contains_end, pretty, unfold


class IllegalMoveError(Exception):
    def __init__(self, index: int, move: str):
        self.index = index
        self.move = move
        super().__init__(f"move {index} ({move}) is not enabled")


@dataclass(frozen=True)
class Configuration:
    left: SessionType
    left_queue: tuple[str, ...] = ()
    right: SessionType = End()
    right_queue: tuple[str, ...] = ()

    def __str__(self) -> str:
        def side(t, w):
            return f"[{pretty(t)}, {'.'.join(w) or 'eps'}]"

        return f"{side(self.left, self.left_queue)} | {side(self.right, self.right_queue)}"


def initial(t: SessionType, s: SessionType) -> Configuration:
    return Configuration(t, (), s, ())


def moves(c: Configuration) -> list[tuple[str, Configuration]]:
    """Enabled moves as ``(token, successor)`` pairs, left side first."""
    out = []
    lt, rt = unfold(c.left), unfold(c.right)
    match lt:
        case Select(bs):
            for l, k in bs:
                out.append((f"L!{l}", Configuration(k, c.left_queue, c.right, c.right_queue + (l,))))
        case Branch(bs) if c.left_queue:
            head = c.left_queue[0]
            for l, k in bs:
                if l == head:
                    out.append((f"L?{l}", Configuration(k, c.left_queue[1:], c.right, c.right_queue)))
    match rt:
        case Select(bs):
            for l, k in bs:
                out.append((f"R!{l}", Configuration(c.left, c.left_queue + (l,), k, c.right_queue)))
        case Branch(bs) if c.right_queue:
            head = c.right_queue[0]
            for l, k in bs:
                if l == head:
                    out.append((f"R?{l}", Configuration(c.left, c.left_queue, k, c.right_queue[1:])))
    return out


def step(c: Configuration) -> set[Configuration]:
    return {n for _, n in moves(c)}


def is_success(c: Configuration) -> bool:
    return (
        isinstance(unfold(c.left), End)
        and isinstance(unfold(c.right), End)
        and not c.left_queue
        and not c.right_queue
    )


def run_trace(c: Configuration, script) -> Configuration:
    """Replay a list (or comma-separated string) of move tokens."""
    if isinstance(script, str):
        script = [m.strip() for m in script.split(",") if m.strip()]
    for i, move in enumerate(script):
        for token, nxt in moves(c):
            if token == move:
                c = nxt
                break
        else:
            raise IllegalMoveError(i, move)
    return c


@dataclass(frozen=True)
class Compliant:
    states: int = 0


@dataclass(frozen=True)
class NotCompliant:
    config: Configuration | None
    path: tuple[str, ...] = ()
    reason: str = ""


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    states: int = 0


ComplianceVerdict = Compliant | NotCompliant | Inconclusive


@dataclass
class _Graph:
    a: Automaton
    b: Automaton
    nodes: list[tuple] = field(default_factory=list)
    index: dict[tuple, int] = field(default_factory=dict)
    parent: list[tuple[int, str] | None] = field(default_factory=list)
    succ: list[list[int]] = field(default_factory=list)
    frontier: list[bool] = field(default_factory=list)

    def add(self, node: tuple, parent) -> tuple[int, bool]:
        i = self.index.get(node)
        if i is not None:
            return i, False
        i = len(self.nodes)
        self.index[node] = i
        self.nodes.append(node)
        self.parent.append(parent)
        self.succ.append([])
        self.frontier.append(False)
        return i, True

    def path(self, i: int) -> tuple[str, ...]:
        out = []
        while self.parent[i] is not None:
            i, tok = self.parent[i]
            out.extend(reversed(tok.split(",")))
        return tuple(reversed(out))

    def config(self, i: int) -> Configuration:
        p, w1, q, w2 = self.nodes[i]
        return Configuration(from_automaton(self.a, p), w1, from_automaton(self.b, q), w2)


def _normalize(a: Automaton, b: Automaton, node: tuple) -> tuple[tuple, list[str]]:
    """Apply every enabled input until none is left.

    Such an input cannot be disabled by the partner and commutes with all
    other moves, so a configuration can reach success exactly when its
    normal form can, and the same holds for everything reachable from it.
    """
    p, w1, q, w2 = node
    toks = []
    while True:
        if a.kinds[p] == IN and w1 and (r := a.successor(p, w1[0])) is not None:
            toks.append(f"L?{w1[0]}")
            p, w1 = r, w1[1:]
        elif b.kinds[q] == IN and w2 and (r := b.successor(q, w2[0])) is not None:
            toks.append(f"R?{w2[0]}")
            q, w2 = r, w2[1:]
        else:
            return (p, w1, q, w2), toks


def _node_moves(a: Automaton, b: Automaton, node: tuple):
    """Output moves from a normal configuration, each followed by normalisation."""
    p, w1, q, w2 = node
    if a.kinds[p] == OUT:
        for l, r in a.trans[p]:
            nxt, toks = _normalize(a, b, (r, w1, q, w2 + (l,)))
            yield ",".join([f"L!{l}", *toks]), nxt
    if b.kinds[q] == OUT:
        for l, r in b.trans[q]:
            nxt, toks = _normalize(a, b, (p, w1 + (l,), r, w2))
            yield ",".join([f"R!{l}", *toks]), nxt


def check_compliance(t: SessionType, s: SessionType, max_states: int = 100_000,
                     max_queue: int = 16) -> ComplianceVerdict:
    """Decide fair compliance of ``t`` and ``s`` where the reachable graph allows.

    Exploration is breadth-first over pairs of automaton states with queues,
    where enabled inputs are always taken eagerly (see ``_normalize``).  This
    keeps dual-shaped compositions finite even when one side can send
    without bound.  A configuration whose successor would overflow
    ``max_queue`` becomes a frontier node.  Frontier and unexplored nodes count as "might succeed",
    so a refutation is only reported for a cone explored in full.
    """
    if max_states < 1 or max_queue < 1:
        raise ValueError("limits must be positive")
    for side, u in (("left", t), ("right", s)):
        if not contains_end(u):
            return NotCompliant(None, (), f"{side} type has no end")
    for side, u in (("left", t), ("right", s)):
        if not is_controllable(u):
            return NotCompliant(None, (), f"{side} type is not controllable")

    a, b = to_automaton(t), to_automaton(s)
    live_a, live_b = can_reach_final(a), can_reach_final(b)
    g = _Graph(a, b)
    root, _ = g.add((a.start, (), b.start, ()), None)
    todo = deque([root])
    explored = [False]
    limit_hit = False
    while todo:
        i = todo.popleft()
        p, _, q, _ = g.nodes[i]
        if not (live_a[p] and live_b[q]):
            side = "left" if not live_a[p] else "right"
            return NotCompliant(g.config(i), g.path(i), f"{side} type can no longer reach end")
        if len(g.nodes) > max_states:
            limit_hit = True
            break
        explored[i] = True
        for tok, nxt in _node_moves(a, b, g.nodes[i]):
            if max(len(nxt[1]), len(nxt[3])) > max_queue:
                g.frontier[i] = True
                continue
            j, new = g.add(nxt, (i, tok))
            if new:
                explored.append(False)
                todo.append(j)
            g.succ[i].append(j)

    n = len(g.nodes)
    preds: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in g.succ[i]:
            preds[j].append(i)
    good = [False] * n
    work = []
    for i, (p, w1, q, w2) in enumerate(g.nodes):
        success = a.kinds[p] == FINAL and b.kinds[q] == FINAL and not w1 and not w2
        if success or g.frontier[i] or not explored[i]:
            good[i] = True
            work.append(i)
    while work:
        j = work.pop()
        for i in preds[j]:
            if not good[i]:
                good[i] = True
                work.append(i)
    for i in range(n):
        if not good[i]:
            return NotCompliant(g.config(i), g.path(i), "no successful configuration is reachable")
    if limit_hit:
        return Inconclusive(f"state limit {max_states} reached", n)
    if any(g.frontier):
        return Inconclusive(f"queue bound {max_queue} reached", n)
    return Compliant(n)
