"""Check T <= T on many random types; NotSubtype would be a bug.

Prints the verdict mix and the slowest check.
"""

import argparse
import sys
import time
from collections import Counter
from dataclasses import dataclass

from fairsub.algorithm import NotSubtype, Subtype, subtype_check
from fairsub.random_types import TypeShape, random_types
from fairsub.syntax import pretty, size


@dataclass
class Config:
    n: int = 500
    seed: int = 0
    max_depth: int = 6
    timeout: float = 2.0


def main(cfg: Config) -> int:
    types = random_types(cfg.n, cfg.seed, TypeShape(max_depth=cfg.max_depth))
    mix: Counter[str] = Counter()
    worst = (0.0, None)
    bad = []
    for t in types:
        t0 = time.perf_counter()
        v = subtype_check(t, t, timeout=cfg.timeout)
        dt = time.perf_counter() - t0
        worst = max(worst, (dt, t), key=lambda p: p[0])
        name = type(v).__name__
        if isinstance(v, Subtype):
            name += f"/{type(v.evidence).__name__}"
        mix[name] += 1
        if isinstance(v, NotSubtype):
            bad.append(t)
    print(f"{cfg.n} types, mean size {sum(map(size, types)) / cfg.n:.1f}")
    for k, c in mix.most_common():
        print(f"  {k:28} {c}")
    print(f"slowest: {worst[0] * 1000:.1f} ms on {pretty(worst[1])}")
    for t in bad:
        print("REFUTED:", pretty(t))
    return 1 if bad else 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in vars(Config()).items():
        p.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    sys.exit(main(Config(**vars(p.parse_args()))))
