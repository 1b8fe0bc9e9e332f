"""Write DOT files for the running example; also PDFs when Graphviz is installed.

Output: one state machine per type, plus the simulation tree and the
witness tree of the spacecraft pair.
"""

import argparse
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from fairsub.algorithm import Subtype, WitnessTrees, subtype_check
from fairsub.dot import cfsm_dot, simulation_tree_dot, witness_dot
from fairsub.parser import parse_file

ROOT = Path(__file__).resolve().parent.parent
TYPES = ROOT / "corpus" / "types"


@dataclass
class Config:
    out: Path = ROOT / "figures"
    pdf: bool = True


def main(cfg: Config) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in ("ground", "spacecraft", "ground_eager", "spacecraft_old"):
        files[f"machine_{name}.dot"] = cfsm_dot(parse_file(TYPES / f"{name}.st"), name)
    v = subtype_check(parse_file(TYPES / "spacecraft.st"), parse_file(TYPES / "spacecraft_old.st"))
    assert isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees)
    files["spacecraft_tree.dot"] = simulation_tree_dot(v.tree)
    for i, w in enumerate(v.evidence.trees):
        files[f"spacecraft_witness{i}.dot"] = witness_dot(v.tree, w)
    dot = shutil.which("dot") if cfg.pdf else None
    for fname, text in files.items():
        path = cfg.out / fname
        path.write_text(text, encoding="utf-8")
        if dot:
            subprocess.run([dot, "-Tpdf", str(path), "-o", str(path.with_suffix(".pdf"))], check=True)
        print(path)
    if cfg.pdf and not dot:
        print("graphviz not found; wrote DOT only", file=sys.stderr)
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--no-pdf", dest="pdf", action="store_false")
    sys.exit(main(Config(**vars(p.parse_args()))))
