"""Run the bundled corpus and print the verdict table.

    python scripts/run_corpus.py --jobs 4 --json out.json
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from fairsub.corpus import DEFAULT_BUDGET, run_corpus

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class Config:
    corpus: Path = ROOT / "corpus"
    budget: float = DEFAULT_BUDGET
    jobs: int = 1
    json_out: Path | None = None


def main(cfg: Config) -> int:
    report = run_corpus(cfg.corpus, cfg.budget, jobs=cfg.jobs)
    print(report.table())
    s = report.summary()
    print(f"\n{len(report.rows)} pairs, " + ", ".join(f"{k} {v}" for k, v in s.items()))
    slowest = max(report.rows, key=lambda r: r.seconds, default=None)
    if slowest is not None:
        print(f"slowest: {slowest.name} {slowest.seconds * 1000:.1f} ms (budget {cfg.budget * 1000:.0f} ms)")
    if cfg.json_out:
        cfg.json_out.write_text(report.to_json())
    return 0 if report.ok else 1


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--corpus", type=Path, default=Config.corpus)
    p.add_argument("--budget", type=float, default=Config.budget, help="seconds per check")
    p.add_argument("--jobs", type=int, default=Config.jobs)
    p.add_argument("--json", dest="json_out", type=Path)
    sys.exit(main(Config(**vars(p.parse_args()))))
