from pathlib import Path

import pytest
from hypothesis import given, settings

from conftest import CORPUS, session_types
from fairsub.algorithm import (
    ContextGraph,
    FiniteRelation,
    NotSubtype,
    Subtype,
    Uncontrollable,
    Unknown,
    WitnessTrees,
    build_simulation_tree,
    check_witness,
    classify_witness,
    default_bound,
    discover_context,
    discover_contexts,
    extract_candidates,
    prune,
    subtype_check,
)
from fairsub.automaton import bisimilar
from fairsub.controllability import is_controllable
from fairsub.corpus import load_types
from fairsub.game import Children, SuccessLeaf, SupRep, UnsuccessfulLeaf, sim_children
from fairsub.parser import parse, parse_context
from fairsub.syntax import END, ast_depth

PAIRS = sorted(CORPUS.glob("*.pair"))


def recheck_with(tree):
    def recheck(leaf):
        return isinstance(subtype_check(tree.sub_term(leaf), leaf.sup.term()), Subtype)
    return recheck


def pruned(t, s):
    tree = build_simulation_tree(t, s)
    prune(tree)
    return tree


def replay(t, s, edges):
    """Play the game on plain terms along ``edges``, taking unfold steps freely."""
    for e in edges:
        while True:
            res = sim_children(t, s)
            assert isinstance(res, Children)
            step = dict(res.items)
            if "unfold" in step:
                t, s = step["unfold"]
                continue
            t, s = step[e]
            break
    return t, s


def test_default_bound(ts_old):
    assert default_bound(ts_old) == 2 * ast_depth(ts_old)


def test_spacecraft_tree_has_eleven_nodes(ts, ts_old):
    tree = build_simulation_tree(ts, ts_old)
    assert len(tree.nodes) == 11
    assert [n.depth for n in tree.nodes] == [0, 1, 2, 2, 3, 3, 1, 2, 3, 3, 2]
    assert {n.id: n.kind for n in tree.nodes if n.kind} == {2: "2b", 4: "2c", 8: "2a"}


def test_prune_removes_dotted_region(ts, ts_old):
    tree = pruned(ts, ts_old)
    assert [n.id for n in tree.kept()] == [0, 1, 2, 3, 4, 5]
    assert all(n.tag == "R" for n in tree.nodes[6:])


def test_prune_ground_pair_removes_everything(tg_eager, tg):
    tree = pruned(tg_eager, tg)
    assert tree.kept() == []
    assert extract_candidates(tree) == []


def test_prune_single_success():
    tree = pruned(END, END)
    assert len(tree.nodes) == 1 and tree.root.status == "success"
    assert tree.kept() == []


def test_one_candidate(ts, ts_old):
    tree = pruned(ts, ts_old)
    assert [c.id for c in extract_candidates(tree)] == [1]


def test_two_independent_loops_give_two_candidates():
    tree = pruned(*load_types(CORPUS / "two_accumulations.pair"))
    cands = extract_candidates(tree)
    assert len(cands) == 2
    assert cands[0].edges()[0] != cands[1].edges()[0]


def test_discover_context(ts, ts_old):
    tree = pruned(ts, ts_old)
    (cg,) = discover_context(tree, extract_candidates(tree)[0])
    assert cg.term() == parse_context("&{ tc: []1, done: []2 }")
    assert (cg.J, cg.K) == ({1}, {2})


def test_discover_on_counter_row(ts_old):
    rep = SupRep.initial(ts_old).output_step(("tm", "over"))["tm"].output_step(("tm", "over"))["over"]
    (cg,) = discover_contexts(rep)
    assert cg.term() == parse_context("&{ tc: []1, done: []2 }")
    assert cg.K == {2}


def test_no_context_without_accumulation(tg_eager, tg):
    tree = build_simulation_tree(tg_eager, tg)
    assert all(discover_context(tree, n) == [] for n in tree.nodes)


def test_witness_accepted(ts, ts_old):
    tree = pruned(ts, ts_old)
    cand = extract_candidates(tree)[0]
    (cg,) = discover_context(tree, cand)
    leaves = classify_witness(tree, cand, cg, recheck_with(tree))
    assert [(l.node, l.kind, l.ancestor) for l in leaves] == [(2, "2b", 1), (4, "2c", 3), (5, "2d", None)]


def test_witness_rejected_with_partition_swapped(ts, ts_old):
    tree = pruned(ts, ts_old)
    cand = extract_candidates(tree)[0]
    (cg,) = discover_context(tree, cand)
    swapped = ContextGraph(cg.positions, cg.K, cg.J)
    assert not check_witness(tree, cand, swapped, recheck_with(tree))


def test_dotted_region_is_no_witness(ts, ts_old):
    tree = pruned(ts, ts_old)
    (cg,) = discover_context(tree, extract_candidates(tree)[0])
    assert not check_witness(tree, tree.nodes[6], cg, recheck_with(tree))


def test_partition_must_leave_a_growing_hole(ts, ts_old):
    tree = pruned(ts, ts_old)
    cand = extract_candidates(tree)[0]
    (cg,) = discover_context(tree, cand)
    all_constant = ContextGraph(cg.positions, frozenset(), cg.J | cg.K)
    assert not check_witness(tree, cand, all_constant, recheck_with(tree))


def test_eager_ground_is_finite_relation(tg_eager, tg):
    v = subtype_check(tg_eager, tg)
    assert isinstance(v, Subtype) and isinstance(v.evidence, FiniteRelation)
    assert len(v.evidence.pairs) == 3


def test_spacecraft_subtype_by_witness(ts, ts_old):
    v = subtype_check(ts, ts_old)
    assert isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees)
    (w,) = v.evidence.trees
    assert (w.root, w.J, w.K) == (1, (1,), (2,))


def test_output_covariance_rejected():
    v = subtype_check(parse("+{ l1: &{ l3: end } }"), parse("&{ l3: +{ l1: end, l2: end } }"))
    assert isinstance(v, NotSubtype)
    assert v.path == ()
    assert "l2" in v.reason


def test_reverse_direction_rejected(tg, tg_eager):
    v = subtype_check(tg, tg_eager)
    assert isinstance(v, NotSubtype)
    t, s = replay(tg, tg_eager, v.path)
    while isinstance(res := sim_children(t, s), Children) and "unfold" in dict(res.items):
        t, s = dict(res.items)["unfold"]
    assert isinstance(res, UnsuccessfulLeaf)


def test_uncontrollable_supertype():
    v = subtype_check(parse("rec t . +{ a: t }"), parse("rec t . &{ a: t, b: rec u . +{ c: u } }"))
    assert isinstance(v, Subtype)
    v = subtype_check(END, parse("rec t . +{ a: t }"))
    assert v == Subtype(Uncontrollable())


def test_end_end():
    v = subtype_check(END, END)
    assert isinstance(v, Subtype) and len(v.tree.nodes) == 1


def test_bound_hit_is_unknown(ts, ts_old):
    assert isinstance(subtype_check(ts, ts_old, bound=1), Unknown)


@pytest.mark.parametrize("path", PAIRS, ids=lambda p: p.stem)
def test_nodes_agree_with_replay_on_terms(path: Path):
    sub, sup = load_types(path)
    if not is_controllable(sup):
        return
    tree = build_simulation_tree(sub, sup)
    for n in tree.nodes:
        t, s = replay(sub, sup, n.edges())
        assert bisimilar(t, tree.sub_term(n))
        assert bisimilar(s, n.sup.term())


@pytest.mark.parametrize("path", PAIRS, ids=lambda p: p.stem)
def test_corpus_reflexive(path: Path):
    for t in load_types(path):
        assert isinstance(subtype_check(t, t), Subtype)


def _replay_has_no_failure(t, s, steps: int) -> bool:
    frontier = [(t, s, 0)]
    seen = set()
    while frontier:
        t, s, d = frontier.pop()
        if (t, s, d) in seen or d > steps or not is_controllable(s):
            continue
        seen.add((t, s, d))
        res = sim_children(t, s)
        if isinstance(res, UnsuccessfulLeaf):
            return False
        if isinstance(res, SuccessLeaf):
            continue
        for e, (t2, s2) in res.items:
            frontier.append((t2, s2, d if e == "unfold" else d + 1))
    return True


@pytest.mark.parametrize("path", PAIRS, ids=lambda p: p.stem)
def test_witness_roots_survive_bounded_replay(path: Path):
    sub, sup = load_types(path)
    v = subtype_check(sub, sup)
    if not (isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees)):
        return
    nodes = {n.id: n for n in v.tree.nodes}
    for w in v.evidence.trees:
        root = nodes[w.root]
        depth = max(n.depth for n in root.walk()) - root.depth
        t, s = replay(sub, sup, root.edges())
        assert _replay_has_no_failure(t, s, 3 * depth)


@settings(max_examples=150, deadline=None)
@given(session_types())
def test_never_refutes_reflexivity(t):
    assert not isinstance(subtype_check(t, t, timeout=2.0), NotSubtype)
