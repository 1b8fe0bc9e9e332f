import pytest
from hypothesis import given

from conftest import session_types
from fairsub.automaton import bisimilar
from fairsub.parser import parse, parse_context, tokenize
from fairsub.syntax import (
    END,
    Branch,
    DuplicateLabelError,
    End,
    GuardednessError,
    Hole,
    ParseError,
    Rec,
    Select,
    ShadowedVariableError,
    UnboundVariableError,
    Var,
    ast_depth,
    bra,
    check_well_formed,
    contains_end,
    dual,
    free_vars,
    pretty,
    sel,
    subst,
    unfold,
    unfold_once,
)


def test_parse_end():
    assert parse("end") == End()


def test_parse_ground_station(tg):
    assert tg == Rec("t", bra(tm=Var("t"), over=Rec("u", sel(tc=Var("u"), done=END))))


def test_parse_keeps_source_order():
    t = parse("+{ z: end, a: end, m: end }")
    assert t.labels == ("z", "a", "m")


def test_comments_and_whitespace():
    assert parse("# leading\n &{ a :end # trailing\n }") == bra(a=END)


@pytest.mark.parametrize("text, error", [
    ("rec t . t", GuardednessError),
    ("rec t . rec u . t", GuardednessError),
    ("+{ a: x }", UnboundVariableError),
    ("rec t . +{ a: rec t . &{ b: t } }", ShadowedVariableError),
    ("+{ a: end, a: end }", DuplicateLabelError),
    ("+{ }", ParseError),
    ("&{ a end }", ParseError),
    ("end end", ParseError),
    ("+{ a: []1 }", ParseError),
    ("", ParseError),
])
def test_rejects(text, error):
    with pytest.raises(error):
        parse(text)


def test_error_position():
    with pytest.raises(ParseError) as e:
        parse("+{ a: end, b: ?? }")
    assert e.value.pos == 14


def test_hole_syntax():
    a = parse_context("&{ tc: []1, done: []2 }")
    assert a == bra(tc=Hole(1), done=Hole(2))
    assert pretty(a) == "&{ tc: []1, done: []2 }"


def test_tokenize_positions():
    kinds = [k for k, _, _ in tokenize("+{a:end}")]
    assert kinds == ["open", "word", "colon", "word", "close", "eof"]


def test_dual_end():
    assert dual(END) == END


def test_dual_of_spacecraft_is_ground(tg, ts):
    assert dual(ts) == tg


def test_dual_involution_on_old_spacecraft(ts_old):
    assert dual(dual(ts_old)) == ts_old


def test_unfold_end():
    assert unfold(END) == END


def test_unfold_single():
    t = parse("rec t . +{ l1: t }")
    assert unfold(t) == Select((("l1", t),))


def test_unfold_nested_recs():
    t = parse("rec t . rec u . &{ a: t, b: u }")
    inner = Rec("u", Branch((("a", t), ("b", Var("u")))))
    assert unfold(t) == Branch((("a", t), ("b", inner)))


def test_unfold_once_leaves_non_rec():
    assert unfold_once(bra(a=END)) == bra(a=END)


def test_ast_depth():
    assert ast_depth(END) == 1
    assert ast_depth(sel(l=END)) == 2


def test_ast_depth_ground(tg):
    assert ast_depth(tg) == 5


def test_free_vars_and_subst():
    body = sel(a=Var("t"), b=Rec("u", bra(c=Var("u"), d=Var("t"))))
    assert free_vars(body) == {"t"}
    assert free_vars(subst(body, "t", END)) == frozenset()


def test_contains_end(ts):
    assert contains_end(ts)
    assert not contains_end(parse("rec t . +{ a: t }"))


def test_check_well_formed_open_term():
    with pytest.raises(UnboundVariableError):
        check_well_formed(sel(a=Var("t")))
    check_well_formed(sel(a=Var("t")), closed=False)


@given(session_types())
def test_print_parse_round_trip(t):
    assert parse(pretty(t)) == t


@given(session_types())
def test_dual_is_involution(t):
    assert dual(dual(t)) == t


@given(session_types())
def test_unfold_exposes_prefix(t):
    u = unfold(t)
    assert not isinstance(u, Rec)
    assert bisimilar(u, t)


@given(session_types())
def test_generated_types_are_well_formed(t):
    check_well_formed(t)
