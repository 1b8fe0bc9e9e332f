"""Search for partners that comply with S but not with a subtype T of S.

Runs over the bundled corpus, then over random pairs.  Each partner pool
holds the bundled types, synthesized partners and duals.  Any violation
means the checker accepted a pair it should not have.
"""

import argparse
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from fairsub.algorithm import Subtype, subtype_check
from fairsub.controllability import synthesize_partner
from fairsub.corpus import corpus_types, load_types, partner_pool, soundness_sweep
from fairsub.random_types import TypeShape, random_type
from fairsub.syntax import dual

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class Config:
    corpus: Path = ROOT / "corpus"
    random_pairs: int = 3000
    seed: int = 0
    max_depth: int = 4
    max_states: int = 5000
    max_queue: int = 6


def corpus_pairs(corpus: Path) -> dict:
    out = {}
    for path in sorted(corpus.glob("*.pair")):
        t, s = load_types(path)
        if isinstance(subtype_check(t, s), Subtype):
            out[path.stem] = (t, s)
    return out


def random_pairs(cfg: Config) -> tuple[dict, dict]:
    rng = random.Random(cfg.seed)
    shape = TypeShape(max_depth=cfg.max_depth, labels=("a", "b"))
    pairs, partners = {}, {}
    for i in range(cfg.random_pairs):
        t, s = random_type(rng, shape), random_type(rng, shape)
        v = subtype_check(t, s, timeout=0.5)
        if not isinstance(v, Subtype) or t == s:
            continue
        pairs[f"random{i}"] = (t, s)
        partners[f"dual(random{i})"] = dual(s)
        p = synthesize_partner(s)
        if p is not None:
            partners[f"partner(random{i})"] = p
    return pairs, partners


def main(cfg: Config) -> int:
    pool = partner_pool(corpus_types(cfg.corpus))
    limits = dict(max_states=cfg.max_states, max_queue=cfg.max_queue)
    pairs = corpus_pairs(cfg.corpus)
    rep = soundness_sweep(pairs, pool, **limits)
    print(f"corpus: {len(pairs)} subtype pairs, {len(pool)} partners, "
          f"{rep.checked} compliant, {rep.skipped} inconclusive, {len(rep.violations)} violations")
    rpairs, rpartners = random_pairs(cfg)
    rep2 = soundness_sweep(rpairs, {**pool, **rpartners}, **limits)
    print(f"random: {len(rpairs)} subtype pairs out of {cfg.random_pairs}, "
          f"{rep2.checked} compliant, {rep2.skipped} inconclusive, {len(rep2.violations)} violations")
    for v in rep.violations + rep2.violations:
        print("VIOLATION:", v)
    return 1 if rep.violations or rep2.violations else 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--corpus", type=Path, default=Config.corpus)
    for f, v in vars(Config()).items():
        if f != "corpus":
            p.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    sys.exit(main(Config(**vars(p.parse_args()))))
