"""Golden-verdict corpus runner.

A ``.pair`` file names a subtype file, a supertype file and the expected
verdict, one ``key = value`` per line::

    sub = types/spacecraft.st
    sup = types/spacecraft_old.st
    expect = subtype

Paths are relative to the ``.pair`` file.  An optional ``bound = N`` line
overrides the default path bound.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .algorithm import (
    Checker,
    NotSubtype,
    Subtype,
    SubtypeVerdict,
    WitnessTrees,
    default_bound,
    extract_candidates,
)
from .controllability import synthesize_partner
from .parser import parse_file
from .semantics import Compliant, NotCompliant, check_compliance
from .syntax import SessionType

VERDICTS = ("subtype", "not-subtype", "unknown")
DEFAULT_BUDGET = 1.0


class PairFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PairSpec:
    path: Path
    sub: Path
    sup: Path
    expect: str | None
    bound: int | None = None


def load_pair(path: str | Path) -> PairSpec:
    path = Path(path)
    fields: dict[str, str] = {}
    for n, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise PairFormatError(f"{path}:{n}: expected 'key = value'")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"sub", "sup", "expect", "bound"}
    if unknown:
        raise PairFormatError(f"{path}: unknown key {sorted(unknown)[0]!r}")
    for key in ("sub", "sup"):
        if key not in fields:
            raise PairFormatError(f"{path}: missing {key!r}")
    expect = fields.get("expect")
    if expect is not None and expect not in VERDICTS:
        raise PairFormatError(f"{path}: expect must be one of {', '.join(VERDICTS)}")
    bound = fields.get("bound")
    try:
        bound = None if bound is None else int(bound)
    except ValueError:
        raise PairFormatError(f"{path}: bound must be an integer") from None
    if bound is not None and bound < 1:
        raise PairFormatError(f"{path}: bound must be positive")
    base = path.parent
    return PairSpec(path, base / fields["sub"], base / fields["sup"], expect, bound)


def verdict_name(v: SubtypeVerdict) -> str:
    if isinstance(v, Subtype):
        return "subtype"
    if isinstance(v, NotSubtype):
        return "not-subtype"
    return "unknown"


@dataclass
class CheckReport:
    name: str
    verdict: str | None
    expect: str | None
    seconds: float
    bound: int | None = None
    nodes: int = 0
    pruned: int = 0
    candidates: int = 0
    error: str | None = None
    over_budget: bool = False

    @property
    def matches(self) -> bool:
        return self.error is None and (self.expect is None or self.verdict == self.expect)


def tree_sizes(v: SubtypeVerdict) -> tuple[int, int, int]:
    """Nodes built, nodes pruned, and candidate subtrees of the verdict's tree."""
    tree = v.tree
    if tree is None:
        return 0, 0, 0
    pruned = sum(n.tag == "R" for n in tree.nodes)
    if isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees):
        cands = len(v.evidence.trees)
    elif pruned or isinstance(v, Subtype):
        cands = len(extract_candidates(tree))
    else:
        cands = 0
    return len(tree.nodes), pruned, cands


def run_pair(path: str | Path, budget: float = DEFAULT_BUDGET, bound: int | None = None) -> CheckReport:
    """Check one ``.pair`` file; errors land in the report instead of propagating."""
    path = Path(path)
    name = path.name
    t0 = time.perf_counter()
    try:
        spec = load_pair(path)
        t, s = parse_file(spec.sub), parse_file(spec.sup)
    except (OSError, ValueError) as e:
        return CheckReport(name, None, None, time.perf_counter() - t0, error=str(e))
    used = bound if bound is not None else spec.bound
    if used is None:
        used = default_bound(s)
    v = Checker(used, timeout=budget).check(t, s)
    dt = time.perf_counter() - t0
    nodes, pruned, cands = tree_sizes(v)
    return CheckReport(name, verdict_name(v), spec.expect, dt, used, nodes, pruned, cands,
                       over_budget=dt > budget)


def _run_one(args):
    return run_pair(*args)


@dataclass
class RunReport:
    rows: list[CheckReport] = field(default_factory=list)
    budget: float = DEFAULT_BUDGET

    @property
    def ok(self) -> bool:
        return all(r.matches and not r.over_budget for r in self.rows)

    @property
    def over_budget(self) -> list[CheckReport]:
        return [r for r in self.rows if r.over_budget]

    def summary(self) -> dict[str, int]:
        out = {v: 0 for v in VERDICTS}
        out["error"] = 0
        for r in self.rows:
            out[r.verdict or "error"] += 1
        return out

    def table(self, timings: bool = True) -> str:
        head = ["pair", "expect", "verdict", "ok", "nodes", "pruned", "cands", "bound"]
        if timings:
            head.append("ms")
        rows = [head]
        for r in self.rows:
            row = [r.name, r.expect or "-", r.verdict or "error", "yes" if r.matches else "NO",
                   str(r.nodes), str(r.pruned), str(r.candidates), str(r.bound or "-")]
            if timings:
                row.append(f"{r.seconds * 1000:.1f}" + ("!" if r.over_budget else ""))
            rows.append(row)
        widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
        for r in self.rows:
            if r.error:
                lines.append(f"{r.name}: {r.error}")
        return "\n".join(lines)

    def to_json(self, timings: bool = True) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if not timings:
                d.pop("seconds")
            rows.append(d)
        return json.dumps({"budget": self.budget, "rows": rows}, indent=2, sort_keys=True)


def run_corpus(directory: str | Path, budget: float = DEFAULT_BUDGET, bound: int | None = None,
               jobs: int = 1) -> RunReport:
    """Run every ``.pair`` file under ``directory``, rows sorted by file name."""
    paths = sorted(Path(directory).rglob("*.pair"), key=lambda p: (p.name, str(p)))
    work = [(p, budget, bound) for p in paths]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, work))
    else:
        rows = [_run_one(w) for w in work]
    return RunReport(rows, budget)


# -- soundness sweep -----------------------------------------------------------


def load_types(path: str | Path) -> tuple[SessionType, SessionType]:
    spec = load_pair(path)
    return parse_file(spec.sub), parse_file(spec.sup)


def corpus_types(directory: str | Path) -> dict[str, SessionType]:
    """Every ``.st`` file below ``directory``, keyed by stem."""
    return {p.stem: parse_file(p) for p in sorted(Path(directory).rglob("*.st"))}


def partner_pool(types: dict[str, SessionType]) -> dict[str, SessionType]:
    """The given types plus a synthesized partner for each controllable one."""
    pool = dict(types)
    for name, t in types.items():
        p = synthesize_partner(t)
        if p is not None:
            pool[f"partner({name})"] = p
    return pool


@dataclass(frozen=True)
class Violation:
    pair: str
    partner: str


@dataclass
class SoundnessReport:
    checked: int = 0
    skipped: int = 0
    violations: list[Violation] = field(default_factory=list)


def soundness_sweep(pairs, partners: dict[str, SessionType], max_states: int = 20_000,
                    max_queue: int = 8) -> SoundnessReport:
    """Look for a partner that complies with S but breaks a subtype T of S.

    ``pairs`` maps a name to ``(T, S)`` with ``T`` already judged a subtype.
    Partner combinations whose exploration is inconclusive are skipped.
    """
    out = SoundnessReport()
    for name, (t, s) in pairs.items():
        for rname, r in partners.items():
            if not isinstance(check_compliance(s, r, max_states, max_queue), Compliant):
                continue
            v = check_compliance(t, r, max_states, max_queue)
            if isinstance(v, NotCompliant):
                out.violations.append(Violation(name, rname))
            elif isinstance(v, Compliant):
                out.checked += 1
            else:
                out.skipped += 1
    return out
