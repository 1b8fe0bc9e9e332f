"""Random closed, guarded session types for property checks and experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import END, Branch, Rec, Select, SessionType, Term, Var


@dataclass(frozen=True)
class TypeShape:
    max_depth: int = 5
    labels: tuple[str, ...] = ("a", "b", "c")
    max_width: int = 2
    rec_prob: float = 0.3
    var_prob: float = 0.35
    end_prob: float = 0.15


def random_type(rng: random.Random, shape: TypeShape = TypeShape()) -> SessionType:
    """Draw a type; variables are bound once each and only used under a prefix."""
    counter = iter(range(10**9))

    def gen(depth: int, usable: tuple[str, ...], pending: tuple[str, ...]) -> Term:
        if depth <= 1:
            if usable and rng.random() < 0.7:
                return Var(rng.choice(usable))
            return END
        roll = rng.random()
        if roll < shape.var_prob:
            # with nothing in scope this falls through to a prefix
            if usable:
                return Var(rng.choice(usable))
        elif roll < shape.var_prob + shape.end_prob:
            return END
        if rng.random() < shape.rec_prob:
            v = f"t{next(counter)}"
            return Rec(v, gen(depth - 1, usable, pending + (v,)))
        width = rng.randint(1, min(shape.max_width, len(shape.labels)))
        labels = rng.sample(shape.labels, width)
        now = usable + pending
        kids = tuple((l, gen(depth - 1, now, ())) for l in labels)
        return (Select if rng.random() < 0.5 else Branch)(kids)

    return gen(shape.max_depth, (), ())


def random_types(n: int, seed: int = 0, shape: TypeShape = TypeShape()) -> list[SessionType]:
    rng = random.Random(seed)
    return [random_type(rng, shape) for _ in range(n)]
