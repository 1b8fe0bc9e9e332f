"""Tree growth of the subtyping encoding as the path bound rises.

Each bundled queue machine is run, encoded, and checked at increasing
bounds.  The drain machine shows the blow-up: every extra level of the
bound multiplies the tree, which is why it is not in the timed corpus.
"""

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from fairsub.algorithm import Checker, default_bound
from fairsub.corpus import tree_sizes, verdict_name
from fairsub.qm import encode_subtyping, load_queue_machine, qm_run

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class Config:
    machines: Path = ROOT / "corpus" / "machines"
    max_bound: int = 12
    budget: float = 10.0


def main(cfg: Config) -> int:
    for path in sorted(cfg.machines.glob("*.qm")):
        m = load_queue_machine(path)
        t, s = encode_subtyping(m)
        print(f"{path.stem}: run {qm_run(m, 1000)}, default bound {default_bound(s)}")
        print(f"  {'bound':>5} {'verdict':>12} {'nodes':>8} {'ms':>9}")
        for bound in range(2, cfg.max_bound + 1, 2):
            t0 = time.perf_counter()
            v = Checker(bound, timeout=cfg.budget).check(t, s)
            dt = time.perf_counter() - t0
            nodes = tree_sizes(v)[0]
            print(f"  {bound:>5} {verdict_name(v):>12} {nodes:>8} {dt * 1000:>9.1f}")
            if dt > cfg.budget:
                break
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--machines", type=Path, default=Config.machines)
    p.add_argument("--max-bound", type=int, default=Config.max_bound)
    p.add_argument("--budget", type=float, default=Config.budget)
    sys.exit(main(Config(**vars(p.parse_args()))))
