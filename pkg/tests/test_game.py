from fairsub.automaton import bisimilar
from fairsub.game import Children, SuccessLeaf, SupRep, UnsuccessfulLeaf, sim_children
from fairsub.parser import parse
from fairsub.syntax import END, unfold_once


def labels(rep: SupRep) -> set[str]:
    return {rep.label(q) for q in range(rep.size)}


def test_end_end_succeeds():
    assert sim_children(END, END) == SuccessLeaf()
    assert isinstance(sim_children(END, parse("&{ a: end }")), UnsuccessfulLeaf)


def test_recursive_subtype_unfolds(tg_eager, tg):
    res = sim_children(tg_eager, tg)
    assert res == Children((("unfold", (unfold_once(tg_eager), tg)),))


def test_output_anticipation_returns_to_ground(tg_eager, tg):
    res = sim_children(unfold_once(tg_eager), tg)
    edge, (sub, sup) = res.items[0]
    assert edge == "!tc"
    assert sub == tg_eager
    assert bisimilar(sup, tg)


def test_uncontrollable_input_branch_dropped():
    res = sim_children(parse("&{ l1: end, l2: end }"), parse("&{ l1: end, l3: rec t . +{ l4: t } }"))
    assert res == Children((("?l1", (END, END)),))


def test_missing_input_fails():
    res = sim_children(parse("&{ l1: end }"), parse("&{ l1: end, l2: end }"))
    assert isinstance(res, UnsuccessfulLeaf)


def test_output_labels_must_match_exactly():
    res = sim_children(parse("+{ l1: &{ l3: end } }"), parse("&{ l3: +{ l1: end, l2: end } }"))
    assert isinstance(res, UnsuccessfulLeaf)
    assert "l2" in res.reason


def test_input_against_output_fails():
    assert isinstance(sim_children(parse("&{ a: end }"), parse("+{ a: end }")), UnsuccessfulLeaf)


def test_counter_rows(ts_old):
    root = SupRep.initial(ts_old)
    assert labels(root) == {f"<{i},0,0>" for i in range(6)}
    once = root.output_step(("tm", "over"))["tm"]
    assert once.label(0) == "<0,1,0>"
    assert labels(once) == {"<0,1,0>"} | {f"<{i},0,1>" for i in range(6)}
    twice = once.output_step(("tm", "over"))["over"]
    assert labels(twice) == {"<0,2,0>", "<0,1,1>", "<2,0,2>", "<3,0,2>", "<5,0,2>"}


def test_counted_automaton_denotes_the_type(ts_old):
    rep = SupRep.initial(ts_old)
    assert bisimilar(rep.term(), ts_old)
    on_terms = dict(sim_children(parse("+{ tm: end, over: end }"), ts_old).items)
    for l, nxt in rep.output_step(("tm", "over")).items():
        assert bisimilar(nxt.term(), on_terms[f"!{l}"][1])


def test_input_step_follows_label(ts_old):
    rep = SupRep.initial(ts_old).input_step("done")
    assert bisimilar(rep.term(), parse("rec v . +{ tm: v, over: end }"))


def test_output_step_mismatch_is_reported(ts_old):
    assert isinstance(SupRep.initial(ts_old).output_step(("tm",)), str)


def test_controllable_states(ts_old):
    rep = SupRep.initial(ts_old)
    assert all(rep.controllable(q) for q in range(rep.size))
    bad = SupRep.initial(parse("&{ a: end, b: rec t . +{ c: t } }"))
    assert not all(bad.controllable(q) for q in range(bad.size))
