"""Queue machines and the session-type encodings built from them.

A queue machine has a finite control and a single FIFO queue.  Each step
pops the head symbol and appends a word chosen by the transition function.
The machine terminates once the queue is empty.

Two encodings turn a machine into a pair of session types:

* ``encode_refinement`` gives the pair whose refinement holds exactly when
  a target state is reachable;
* ``encode_subtyping`` gives the pair whose subtyping holds exactly when the
  machine never terminates.

Both are handy as inputs on which any sound checker must stay careful.
Queue symbols become labels by name, except ``$``, which becomes ``dollar``.
Recursion variables derived from machine states carry a ``q_`` prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .syntax import END, Branch, Rec, Select, SessionType, Var

DOLLAR_LABEL = "dollar"


class AlphabetClashError(ValueError):
    pass


class QueueMachineFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class QueueMachine:
    states: tuple[str, ...]
    sigma: tuple[str, ...]
    gamma: tuple[str, ...]
    dollar: str
    start: str
    delta: dict[tuple[str, str], tuple[str, tuple[str, ...]]]

    def __post_init__(self):
        if self.start not in self.states:
            raise ValueError(f"start state {self.start!r} is not a state")
        if self.dollar not in self.gamma:
            raise ValueError(f"initial symbol {self.dollar!r} is not in the queue alphabet")
        if self.dollar in self.sigma:
            raise ValueError("the initial symbol must not be an input symbol")
        if not set(self.sigma) <= set(self.gamma):
            raise ValueError("the input alphabet must be part of the queue alphabet")
        for p in self.states:
            for a in self.gamma:
                if (p, a) not in self.delta:
                    raise ValueError(f"transition function is undefined on ({p}, {a})")
        for (p, a), (q, word) in self.delta.items():
            if p not in self.states or q not in self.states or a not in self.gamma:
                raise ValueError(f"transition ({p}, {a}) -> {q} mentions unknown names")
            if any(b not in self.gamma for b in word):
                raise ValueError(f"transition ({p}, {a}) writes a symbol outside the alphabet")

    @classmethod
    def simple(cls, delta: dict, states=None, gamma=None, start: str = "s",
               dollar: str = "$") -> "QueueMachine":
        """Build a machine from its transitions alone; the alphabets are inferred.

        Words may be given as strings of one-character symbols or as tuples.
        """
        norm = {k: (q, tuple(w)) for k, (q, w) in delta.items()}
        if states is None:
            states = _ordered([start, *(p for p, _ in norm), *(q for q, _ in norm.values())])
        if gamma is None:
            gamma = _ordered([dollar, *(a for _, a in norm), *(b for _, w in norm.values() for b in w)])
        sigma = tuple(a for a in gamma if a != dollar)
        return cls(tuple(states), sigma, tuple(gamma), dollar, start, norm)


def _ordered(items) -> tuple:
    return tuple(dict.fromkeys(items))


# -- running -----------------------------------------------------------------


@dataclass(frozen=True)
class Terminated:
    at: str
    steps: int


@dataclass(frozen=True)
class Running:
    after: int


@dataclass(frozen=True)
class ProvablyNonTerminating:
    """The run revisited a configuration, so it cycles forever."""

    at: str
    queue: tuple[str, ...]
    steps: int


RunResult = Terminated | Running | ProvablyNonTerminating


def qm_run(m: QueueMachine, max_steps: int, cycle_cap: int = 8) -> RunResult:
    """Run ``m`` from ``(start, $)`` for at most ``max_steps`` steps.

    Configurations whose queue is at most ``cycle_cap`` long are remembered.
    Since the machine is deterministic, meeting one again proves that it
    loops forever.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    state, queue = m.start, (m.dollar,)
    seen = {(state, queue)}
    for step in range(1, max_steps + 1):
        state, word = m.delta[state, queue[0]]
        queue = queue[1:] + word
        if not queue:
            return Terminated(state, step)
        if len(queue) <= cycle_cap:
            if (state, queue) in seen:
                return ProvablyNonTerminating(state, queue, step)
            seen.add((state, queue))
    return Running(max_steps)


# -- encodings -----------------------------------------------------------------


def symbol_label(symbol: str) -> str:
    return DOLLAR_LABEL if symbol == "$" else symbol


def _labels(m: QueueMachine, end_label: str) -> dict[str, str]:
    names = {a: symbol_label(a) for a in m.gamma}
    bad = [a for a, l in names.items() if not re.fullmatch(r"[A-Za-z0-9_]+", l)]
    if bad:
        raise AlphabetClashError(f"symbol {bad[0]!r} cannot be used as a label")
    if len(set(names.values())) != len(names):
        raise AlphabetClashError("two queue symbols map to the same label")
    if end_label in names.values():
        raise AlphabetClashError(f"ending label {end_label!r} is already a queue symbol")
    return names


def _state_var(q: str) -> str:
    return f"q_{q}"


def _drain(names: dict[str, str], end_label: str, var: str = "y") -> SessionType:
    """Consume every queue symbol until the ending label arrives."""
    return Rec(var, Branch(tuple((names[a], Var(var)) for a in names) + ((end_label, END),)))


def producer_consumer(m: QueueMachine, end_label: str = "E") -> SessionType:
    """Send a symbol, read it back, repeat; the ending label leads to end."""
    names = _labels(m, end_label)
    return Rec("t", Select(
        tuple((names[a], Branch(((names[a], Var("t")),))) for a in m.gamma)
        + ((end_label, Branch(((end_label, END),))),)
    ))


def encode_refinement(m: QueueMachine, target: str, end_label: str = "E") -> tuple[SessionType, SessionType]:
    """The pair whose refinement holds iff ``target`` is reachable in ``m``."""
    names = _labels(m, end_label)
    if target not in m.states:
        raise ValueError(f"target {target!r} is not a state")
    final = Select(((end_label, _drain(names, end_label)),))

    def control(q: str, visited: frozenset[str]) -> SessionType:
        if q == target:
            return final
        if q in visited:
            return Var(_state_var(q))
        inner = visited | {q}
        branches = []
        for a in m.gamma:
            nxt, word = m.delta[q, a]
            body = control(nxt, inner)
            for b in reversed(word):
                body = Select(((names[b], body),))
            branches.append((names[a], body))
        return Rec(_state_var(q), Branch(tuple(branches)))

    t = Select(((names[m.dollar], control(m.start, frozenset())),))
    return t, producer_consumer(m, end_label)


def encode_subtyping(m: QueueMachine, end_label: str = "E") -> tuple[SessionType, SessionType]:
    """The pair whose subtyping holds iff ``m`` does not terminate.

    Every selection in the subtype offers all queue symbols plus the ending
    label.  Only one branch follows the machine; the others continue as a
    type that produces symbols freely and then drains the queue.
    """
    names = _labels(m, end_label)
    drain = _drain(names, end_label)
    chaos = Rec("x", Select(tuple((names[a], Var("x")) for a in m.gamma) + ((end_label, drain),)))

    def write(word: tuple[str, ...], nxt: str, visited: frozenset[str]) -> SessionType:
        if not word:
            return control(nxt, visited)
        head = names[word[0]]
        rest = write(word[1:], nxt, visited)
        return Select(tuple(
            (names[a], rest if names[a] == head else chaos) for a in m.gamma
        ) + ((end_label, drain),))

    def control(q: str, visited: frozenset[str]) -> SessionType:
        if q in visited:
            return Var(_state_var(q))
        inner = visited | {q}
        return Rec(_state_var(q), Branch(tuple(
            (names[a], write(m.delta[q, a][1], m.delta[q, a][0], inner)) for a in m.gamma
        )))

    t = control(m.start, frozenset())
    s = Branch(((names[m.dollar], producer_consumer(m, end_label)),))
    return t, s


# -- text format -----------------------------------------------------------------

_HEADERS = ("states", "sigma", "gamma", "start")


def parse_queue_machine(text: str, dollar: str = "$") -> QueueMachine:
    """Read the line format::

        states: s q
        sigma: A
        gamma: $ A
        start: s
        delta: s $ -> q A A
        delta: q A ->

    An empty right-hand side (or ``eps``) writes nothing.  ``#`` starts a comment.
    """
    fields: dict[str, list[str]] = {}
    delta: dict[tuple[str, str], tuple[str, tuple[str, ...]]] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise QueueMachineFormatError(f"expected 'key: value', got {line!r}", n)
        if key == "delta":
            lhs, arrow, rhs = rest.partition("->")
            left, right = lhs.split(), rhs.split()
            if not arrow or len(left) != 2 or not right:
                raise QueueMachineFormatError("expected 'delta: p A -> q B*'", n)
            word = tuple(b for b in right[1:] if b != "eps")
            if (left[0], left[1]) in delta:
                raise QueueMachineFormatError(f"duplicate transition for ({left[0]}, {left[1]})", n)
            delta[left[0], left[1]] = (right[0], word)
        elif key in _HEADERS:
            if key in fields:
                raise QueueMachineFormatError(f"duplicate {key!r} line", n)
            fields[key] = rest.split()
        else:
            raise QueueMachineFormatError(f"unknown key {key!r}", n)
    missing = [k for k in _HEADERS if k not in fields]
    if missing:
        raise QueueMachineFormatError(f"missing {missing[0]!r} line")
    if len(fields["start"]) != 1:
        raise QueueMachineFormatError("'start' takes exactly one state")
    try:
        return QueueMachine(tuple(fields["states"]), tuple(fields["sigma"]), tuple(fields["gamma"]),
                            dollar, fields["start"][0], delta)
    except ValueError as e:
        raise QueueMachineFormatError(str(e)) from None


def load_queue_machine(path: str | Path) -> QueueMachine:
    return parse_queue_machine(Path(path).read_text(encoding="utf-8"))


def format_queue_machine(m: QueueMachine) -> str:
    lines = [
        f"states: {' '.join(m.states)}",
        f"sigma: {' '.join(m.sigma)}",
        f"gamma: {' '.join(m.gamma)}",
        f"start: {m.start}",
    ]
    for p in m.states:
        for a in m.gamma:
            q, word = m.delta[p, a]
            lines.append(f"delta: {p} {a} -> {' '.join((q, *word))}")
    return "\n".join(lines) + "\n"
