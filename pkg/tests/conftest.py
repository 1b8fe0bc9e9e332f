import re
from pathlib import Path

import pytest
from hypothesis import strategies as st

from fairsub.parser import parse
from fairsub.syntax import END, Branch, Rec, Select, Var

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

GROUND = "rec t . &{ tm: t, over: rec u . +{ tc: u, done: end } }"
SPACECRAFT = "rec t . +{ tm: t, over: rec u . &{ tc: u, done: end } }"
GROUND_EAGER = "rec t . +{ tc: t, done: rec u . &{ tm: u, over: end } }"
SPACECRAFT_OLD = ("rec t . &{ tc: +{ tm: t, over: rec u . &{ tc: u, done: end } }, "
                  "done: rec v . +{ tm: v, over: end } }")
UNCONTROLLABLE = "rec t . &{ l1: &{ l2: +{ l4: end, l5: rec u . +{ l6: u } }, l3: t } }"


@pytest.fixture
def tg():
    return parse(GROUND)


@pytest.fixture
def ts():
    return parse(SPACECRAFT)


@pytest.fixture
def tg_eager():
    return parse(GROUND_EAGER)


@pytest.fixture
def ts_old():
    return parse(SPACECRAFT_OLD)


@pytest.fixture
def corpus_dir():
    return CORPUS


LABELS = ("a", "b", "c")


@st.composite
def session_types(draw, max_depth=5):
    """Closed, guarded types; each binder gets a fresh name."""
    fresh = iter(range(10**6))

    def gen(depth, usable, pending):
        choices = ["end"]
        if usable:
            choices.append("var")
        if depth > 1:
            choices += ["sel", "bra", "rec"]
        kind = draw(st.sampled_from(choices))
        if kind == "end":
            return END
        if kind == "var":
            return Var(draw(st.sampled_from(usable)))
        if kind == "rec":
            v = f"t{next(fresh)}"
            return Rec(v, gen(depth - 1, usable, pending + (v,)))
        labels = draw(st.lists(st.sampled_from(LABELS), min_size=1, max_size=2, unique=True))
        now = usable + pending
        kids = tuple((l, gen(depth - 1, now, ())) for l in labels)
        return Select(kids) if kind == "sel" else Branch(kids)

    return gen(max_depth, (), ())


_criteria: dict[int, tuple[str, bool]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if m and (report.when == "call" or report.failed):
        _criteria[int(m[1])] = (m[2].replace("_", " "), report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n, (name, ok) in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {name}")
