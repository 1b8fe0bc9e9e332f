from hypothesis import given

from conftest import session_types
from fairsub.automaton import bisimilar
from fairsub.contexts import (
    ctx_decompose,
    ctx_is_reduction,
    fill,
    holes,
    is_input_context,
    oplus_guarded,
    sel_unfold,
)
from fairsub.parser import parse, parse_context
from fairsub.syntax import END, Hole, Rec, Select, Var, bra, sel, unfold


def test_sel_unfold_only_under_selection():
    t = parse("rec t . &{ l1: t, l2: +{ l3: t } }")
    # the inner copy reuses the binder, so build it directly
    want = Rec("t", bra(l1=Var("t"), l2=sel(l3=t)))
    assert sel_unfold(t) == want


def test_sel_unfold_keeps_selection():
    assert sel_unfold(sel(l=END)) == sel(l=END)


def test_sel_unfold_ground(tg):
    want = parse("rec t . &{ tm: t, over: +{ tc: rec u . +{ tc: u, done: end }, done: end } }")
    assert sel_unfold(tg) == want


def test_oplus_guard():
    body = parse("rec t . +{ a: t }").body
    assert oplus_guarded("t", body)
    assert not oplus_guarded("t", parse("rec t . &{ a: t }").body)


def test_decompose_ground(tg):
    ctx, fills = ctx_decompose(tg)
    assert ctx == parse_context("rec t . &{ tm: t, over: []1 }")
    assert list(fills) == [1]
    assert bisimilar(fills[1], parse("rec u . +{ tc: u, done: end }"))


def test_decompose_selection_is_empty_context():
    assert ctx_decompose(sel(l=END)) == (Hole(1), {1: sel(l=END)})


def test_decompose_absent():
    assert ctx_decompose(parse("rec t . &{ l: t }")) is None
    assert ctx_decompose(parse("&{ a: end, b: +{ c: end } }")) is None
    assert ctx_decompose(END) is None


def test_decompose_refills_to_bisimilar(ts_old):
    ctx, fills = ctx_decompose(ts_old)
    assert is_input_context(ctx)
    assert holes(ctx) == sorted(fills)
    assert bisimilar(fill(ctx, fills), ts_old)


def test_reduction_reflexive():
    a = parse_context("&{ tc: []1, done: []2 }")
    assert ctx_is_reduction(a, a)


def test_reduction_through_unfolding():
    a1 = parse_context("rec t . &{ l1: []1, l2: &{ l3: t } }")
    a2 = parse_context("&{ l3: rec t . &{ l1: []1, l2: &{ l3: t } } }")
    assert ctx_is_reduction(a1, a2)
    assert ctx_is_reduction(a1, unfold(a1))
    assert ctx_is_reduction(a1, Hole(1))


def test_not_a_reduction():
    a = parse_context("&{ tc: []1, done: []2 }")
    assert not ctx_is_reduction(a, Hole(3))
    assert not ctx_is_reduction(Hole(1), a)


@given(session_types())
def test_sel_unfold_is_bisimilar(t):
    assert bisimilar(sel_unfold(t), t)


@given(session_types())
def test_decomposition_fills_back(t):
    split = ctx_decompose(t)
    if split is None:
        return
    ctx, fills = split
    assert is_input_context(ctx)
    assert all(isinstance(unfold(f), Select) for f in fills.values())
    assert bisimilar(fill(ctx, fills), t)
