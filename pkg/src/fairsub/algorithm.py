"""Simulation trees, candidate subtrees and witness checking.

The checker follows four steps:

S1  build the simulation tree depth first, stopping at leaves, at nodes
    that repeat an ancestor (equal labels, or the grow/shrink shapes of a
    discovered input context) and at paths longer than the bound;
S2  drop the finished regions whose leaves are all successful or loop back
    inside the region;
S3  take the subtrees rooted at the topmost nodes that some leaf points back to;
S4  accept if each of them is a witness tree for some discovered context.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .automaton import FINAL, IN, OUT, Automaton, canonical_key, from_automaton, to_automaton
from .controllability import is_controllable
from .game import SupRep
from .syntax import Branch, Hole, Rec, SessionType, Term, Var, ast_depth, free_vars


class Timeout(Exception):
    pass


# ---------------------------------------------------------------------------
# Input contexts compiled to graphs


@dataclass(frozen=True)
class ContextGraph:
    """An input context as a rooted graph over positions.

    A position is ``("in", ((label, pos), ...))`` or ``("hole", k)``.
    Position 0 is the root.
    """

    positions: tuple
    J: frozenset[int]
    K: frozenset[int]

    @property
    def holes(self) -> frozenset[int]:
        return self.J | self.K

    @classmethod
    def from_term(cls, a: Term, J, K) -> "ContextGraph":
        positions: list = []
        hole_pos: dict[int, int] = {}

        def build(node: Term, env: dict[str, int]) -> int:
            binders = []
            while isinstance(node, Rec):
                binders.append(node.var)
                node = node.body
            if isinstance(node, Var):
                return env[node.name]
            if isinstance(node, Hole):
                if node.index not in hole_pos:
                    hole_pos[node.index] = len(positions)
                    positions.append(("hole", node.index))
                return hole_pos[node.index]
            if not isinstance(node, Branch):
                raise ValueError(f"not an input context: {node!r}")
            p = len(positions)
            positions.append(None)
            env = {**env, **{v: p for v in binders}}
            positions[p] = ("in", tuple((l, build(c, env)) for l, c in node.branches))
            return p

        build(a, {})
        return cls(tuple(positions), frozenset(J), frozenset(K))

    def term(self) -> Term:
        on_stack: set[int] = set()

        def build(p: int) -> Term:
            kind, data = self.positions[p]
            if kind == "hole":
                return Hole(data)
            name = f"x{p}"
            if p in on_stack:
                return Var(name)
            on_stack.add(p)
            node = Branch(tuple((l, build(r)) for l, r in data))
            on_stack.discard(p)
            return Rec(name, node) if name in free_vars(node) else node

        return build(0)

    def reaches_growing(self, p: int) -> bool:
        seen = {p}
        todo = [p]
        while todo:
            kind, data = self.positions[todo.pop()]
            if kind == "hole":
                if data in self.J:
                    return True
                continue
            for _, r in data:
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return False

    def hole_positions(self) -> list[int]:
        return [p for p, (kind, _) in enumerate(self.positions) if kind == "hole"]


def discover_contexts(rep: SupRep) -> list[ContextGraph]:
    """Contexts rooted at every state whose ``c`` counter exceeds 1.

    The descent stops at states with a smaller ``c``; those become holes,
    constant when their ``h`` equals the root's ``c`` and growing otherwise.
    """
    out = []
    for s, (_, c0, _) in enumerate(rep.counters):
        if c0 > 1:
            cg = _context_from(rep, s, c0)
            if cg is not None and cg.J:
                out.append(cg)
    return out


def _context_from(rep: SupRep, s: int, c0: int) -> ContextGraph | None:
    positions: list = []
    pos_of: dict[int, int] = {}
    J, K = set(), set()
    nholes = 0

    def visit(q: int) -> int | None:
        nonlocal nholes
        if q != s and rep.counters[q][1] < c0:
            nholes += 1
            (J if rep.counters[q][2] != c0 else K).add(nholes)
            positions.append(("hole", nholes))
            return len(positions) - 1
        if q in pos_of:
            return pos_of[q]
        if rep.aut.kinds[q] != IN:
            return None
        p = pos_of[q] = len(positions)
        positions.append(None)
        row = []
        for l, r in rep.aut.trans[q]:
            child = visit(r)
            if child is None:
                return None
            row.append((l, child))
        positions[p] = ("in", tuple(row))
        return p

    if visit(s) is None:
        return None
    return ContextGraph(tuple(positions), frozenset(J), frozenset(K))


def match(cg: ContextGraph, rep: SupRep, q: int, pos: int, depth: int) -> dict[int, tuple] | None:
    """Match the state ``q`` against context position ``pos``.

    ``depth`` is the number of further copies of the context to unfold at
    growing holes: 0 reads ``A'[S_i]``, 1 reads ``A'[A[S_j]]`` and 2 reads
    ``A'[A[A[S_j]]]``.  States standing for context positions must have been
    made by an output step (``c >= 1``).  On success returns the filler key
    of every hole reached.
    """
    fills: dict[int, tuple] = {}
    seen: set[tuple[int, int, int]] = set()
    todo = [(q, pos, depth)]
    while todo:
        item = todo.pop()
        if item in seen:
            continue
        seen.add(item)
        q, p, d = item
        kind, data = cg.positions[p]
        if kind == "hole":
            if data in cg.J and d > 0:
                todo.append((q, 0, d - 1))
                continue
            key = rep.key(q)
            if fills.setdefault(data, key) != key:
                return None
            continue
        if rep.aut.kinds[q] != IN or rep.counters[q][1] < 1:
            return None
        row = rep.aut.trans[q]
        if {l for l, _ in row} != {l for l, _ in data}:
            return None
        succ = dict(row)
        for l, r in data:
            todo.append((succ[l], r, d))
    return fills


# ---------------------------------------------------------------------------
# Simulation trees


@dataclass(eq=False)
class SimNode:
    id: int
    sub: int
    sup: SupRep
    depth: int
    parent: "SimNode | None" = None
    edge: str = ""
    children: list["SimNode"] = field(default_factory=list)
    status: str = "open"  # open | success | fail | ancestor | bound
    ancestor: "SimNode | None" = None
    kind: str = ""  # 2a | 2b | 2c for ancestor leaves
    reason: str = ""
    tag: str = "K"  # K keep, R removed by pruning

    def path(self) -> list["SimNode"]:
        out = []
        n: SimNode | None = self
        while n is not None:
            out.append(n)
            n = n.parent
        return out[::-1]

    def edges(self) -> tuple[str, ...]:
        return tuple(n.edge for n in self.path()[1:])

    def walk(self):
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class SimTree:
    root: SimNode
    sub: Automaton
    bound: int
    nodes: list[SimNode]
    _subkeys: dict = field(default_factory=dict, repr=False)

    def subkey(self, q: int) -> tuple:
        k = self._subkeys.get(q)
        if k is None:
            k = self._subkeys[q] = canonical_key(self.sub, q)
        return k

    def label(self, n: SimNode) -> tuple:
        return (self.subkey(n.sub), n.sup.key())

    def kept(self) -> list[SimNode]:
        return [n for n in self.nodes if n.tag == "K"]

    def sub_term(self, n: SimNode) -> SessionType:
        return from_automaton(self.sub, n.sub)


def default_bound(s: SessionType) -> int:
    return 2 * ast_depth(s)


def _grow_shrink(tree: SimTree, n: SimNode, anc: SimNode) -> str | None:
    """Detect the 2b/2c shapes between a node and an ancestor."""
    for cg in discover_contexts(n.sup) + discover_contexts(anc.sup):
        single_n = match(cg, n.sup, 0, 0, 0)
        double_n = match(cg, n.sup, 0, 0, 1)
        if double_n is not None and match(cg, anc.sup, 0, 0, 0) == double_n:
            return "2b"
        if single_n is not None and match(cg, anc.sup, 0, 0, 1) == single_n:
            return "2c"
    return None


class _Refuted(Exception):
    pass


def build_simulation_tree(t: SessionType, s: SessionType, bound: int | None = None,
                          deadline: float | None = None, stop_on_failure: bool = False) -> SimTree:
    """Expand the game from ``(t, s)`` depth-first, numbering nodes in pre-order.

    With ``stop_on_failure`` the expansion ends at the first unsuccessful
    leaf, leaving a partial tree whose last node is that leaf.
    """
    bound = default_bound(s) if bound is None else bound
    sub = to_automaton(t)
    root = SimNode(0, sub.start, SupRep.initial(s), 0)
    tree = SimTree(root, sub, bound, [root])

    def fail(n: SimNode, reason: str) -> None:
        n.status, n.reason = "fail", reason
        if stop_on_failure:
            raise _Refuted()

    def visit(n: SimNode) -> None:
        if deadline is not None and time.monotonic() > deadline:
            raise Timeout()
        kind = sub.kinds[n.sub]
        if kind == FINAL:
            if n.sup.root_kind == FINAL:
                n.status = "success"
            else:
                fail(n, "subtype ended but the supertype did not")
            return
        lab = tree.label(n)
        subkey = lab[0]
        for anc in reversed(n.path()[:-1]):
            if tree.label(anc) == lab:
                n.status, n.ancestor, n.kind = "ancestor", anc, "2a"
                return
        for anc in reversed(n.path()[:-1]):
            if tree.subkey(anc.sub) == subkey:
                k = _grow_shrink(tree, n, anc)
                if k:
                    n.status, n.ancestor, n.kind = "ancestor", anc, k
                    return
        if n.depth > bound:
            n.status = "bound"
            return
        steps = _expand(sub, n)
        if isinstance(steps, str):
            fail(n, steps)
            return
        if not steps:
            # every branch the supertype offers is uncontrollable
            n.status = "success"
            return
        for edge, q, rep in steps:
            child = SimNode(len(tree.nodes), q, rep, n.depth + 1, n, edge)
            tree.nodes.append(child)
            n.children.append(child)
            visit(child)

    try:
        visit(root)
    except _Refuted:
        pass
    return tree


def _expand(sub: Automaton, n: SimNode):
    kind = sub.kinds[n.sub]
    rep = n.sup
    if kind == IN:
        if rep.root_kind != IN:
            return "subtype inputs but the supertype does not"
        mine = dict(sub.trans[n.sub])
        steps = []
        for l, r in rep.aut.trans[0]:
            if not rep.controllable(r):
                continue
            if l not in mine:
                return f"supertype input {l} is not accepted by the subtype"
            steps.append((f"?{l}", mine[l], rep.input_step(l)))
        return steps
    labels = tuple(l for l, _ in sub.trans[n.sub])
    nxt = rep.output_step(labels)
    if isinstance(nxt, str):
        return nxt
    return [(f"!{l}", r, nxt[l]) for l, r in sub.trans[n.sub]]


def prune(tree: SimTree) -> SimTree:
    """Tag as removed every finished region outside the growing parts.

    A subtree is finished when each leaf is successful or repeats the label
    of an ancestor inside the subtree.  Regions hanging below a node that
    some leaf points back to are kept whole, since they belong to a candidate.
    """
    targets = {id(n.ancestor) for n in tree.nodes if n.ancestor is not None}

    def closes(n: SimNode) -> bool:
        return all(
            leaf.status == "success" or (leaf.kind == "2a" and leaf.ancestor.depth >= n.depth)
            for leaf in n.walk() if leaf.is_leaf
        )

    def mark(n: SimNode, below_target: bool) -> None:
        if not below_target and closes(n):
            for m in n.walk():
                m.tag = "R"
            return
        inner = below_target or id(n) in targets
        for c in n.children:
            mark(c, inner)

    mark(tree.root, False)
    return tree


def extract_candidates(tree: SimTree) -> list[SimNode]:
    """Roots of the candidate subtrees, in pre-order."""
    targets = {id(n.ancestor) for n in tree.kept() if n.ancestor is not None}
    out = []

    def walk(n: SimNode) -> None:
        if n.tag != "K":
            return
        if id(n) in targets:
            out.append(n)
            return
        for c in n.children:
            walk(c)

    walk(tree.root)
    return out


def discover_context(tree: SimTree, candidate: SimNode) -> list[ContextGraph]:
    """Distinct contexts found in the candidate, deepest node first."""
    nodes = sorted(candidate.walk(), key=lambda n: (-n.depth, n.id))
    out, seen = [], set()
    for n in nodes:
        for cg in discover_contexts(n.sup):
            if cg not in seen:
                seen.add(cg)
                out.append(cg)
    return out


# ---------------------------------------------------------------------------
# Witness trees


@dataclass(frozen=True)
class LeafCheck:
    node: int
    kind: str | None
    ancestor: int | None = None


def _node_ok(cg: ContextGraph, tree: SimTree, n: SimNode) -> bool:
    is_output = tree.sub.kinds[n.sub] == OUT
    hole_pos = {p for p in cg.hole_positions() if cg.positions[p][1] in cg.J}
    for p in range(len(cg.positions)):
        growing = cg.reaches_growing(p)
        if not n.is_leaf and not growing:
            continue
        for d in (1, 2):
            if not n.is_leaf and d == 1 and p in hole_pos and not is_output:
                # this is the single-context reading A[S_i]
                continue
            if match(cg, n.sup, 0, p, d) is not None:
                return True
    return False


def classify_leaf(cg: ContextGraph, tree: SimTree, leaf: SimNode, within: SimNode,
                  recheck) -> LeafCheck:
    path = leaf.path()
    ancestors = path[path.index(within):-1]
    lab = tree.label(leaf)
    for a in reversed(ancestors):
        if tree.label(a) == lab:
            return LeafCheck(leaf.id, "2a", a.id)
    subkey = lab[0]
    same_sub = [a for a in reversed(ancestors) if tree.subkey(a.sub) == subkey]
    double = match(cg, leaf.sup, 0, 0, 1)
    if double is not None:
        for a in same_sub:
            if match(cg, a.sup, 0, 0, 0) == double:
                return LeafCheck(leaf.id, "2b", a.id)
    single = match(cg, leaf.sup, 0, 0, 0)
    if single is not None:
        for a in same_sub:
            if match(cg, a.sup, 0, 0, 1) == single:
                if recheck(leaf):
                    return LeafCheck(leaf.id, "2c", a.id)
                return LeafCheck(leaf.id, None)
    for p in range(len(cg.positions)):
        if not cg.reaches_growing(p) and match(cg, leaf.sup, 0, p, 1) is not None:
            return LeafCheck(leaf.id, "2d" if recheck(leaf) else None)
    return LeafCheck(leaf.id, None)


def classify_witness(tree: SimTree, candidate: SimNode, cg: ContextGraph,
                     recheck) -> list[LeafCheck] | None:
    """Leaf kinds of a witness tree, or None when the candidate is not one."""
    if not cg.J or not (cg.K < cg.holes):
        return None
    nodes = [n for n in candidate.walk()]
    for n in nodes:
        if not _node_ok(cg, tree, n):
            return None
    out = []
    for leaf in nodes:
        if leaf.is_leaf:
            res = classify_leaf(cg, tree, leaf, candidate, recheck)
            if res.kind is None:
                return None
            out.append(res)
    return out


def check_witness(tree: SimTree, candidate: SimNode, cg: ContextGraph, recheck) -> bool:
    return classify_witness(tree, candidate, cg, recheck) is not None


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Uncontrollable:
    pass


@dataclass(frozen=True)
class FiniteRelation:
    pairs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Witness:
    root: int
    context: str
    J: tuple[int, ...]
    K: tuple[int, ...]
    leaves: tuple[LeafCheck, ...]


@dataclass(frozen=True)
class WitnessTrees:
    trees: tuple[Witness, ...]


@dataclass
class Subtype:
    evidence: Uncontrollable | FiniteRelation | WitnessTrees
    tree: SimTree | None = field(default=None, repr=False)


@dataclass
class NotSubtype:
    path: tuple[str, ...]
    reason: str = ""
    tree: SimTree | None = field(default=None, repr=False)


@dataclass
class Unknown:
    reason: str
    tree: SimTree | None = field(default=None, repr=False)


SubtypeVerdict = Subtype | NotSubtype | Unknown


class Checker:
    """Runs the four steps, with a memo shared by nested leaf re-checks."""

    def __init__(self, bound: int | None = None, timeout: float | None = None,
                 max_nesting: int = 8):
        self.bound = bound
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.max_nesting = max_nesting
        self.memo: dict[tuple, bool] = {}
        self.active: set[tuple] = set()

    def check(self, t: SessionType, s: SessionType, bound: int | None = None) -> SubtypeVerdict:
        if not is_controllable(s):
            return Subtype(Uncontrollable())
        try:
            tree = build_simulation_tree(t, s, bound if bound is not None else self.bound,
                                         self.deadline, stop_on_failure=True)
        except Timeout:
            return Unknown("time budget exhausted")
        for n in tree.nodes:
            if n.status == "fail":
                return NotSubtype(n.edges(), n.reason, tree)
        for n in tree.nodes:
            if n.status == "bound":
                return Unknown(f"path bound {tree.bound} reached at node {n.id}", tree)
        prune(tree)
        candidates = extract_candidates(tree)
        if not candidates:
            reps = {}
            for n in tree.nodes:
                reps.setdefault(tree.label(n), n)
            pairs = sorted((str(tree.sub_term(n)), str(n.sup.term())) for n in reps.values())
            return Subtype(FiniteRelation(tuple(pairs)), tree)
        found = []
        for cand in candidates:
            w = self._witness(tree, cand)
            if w is None:
                return Unknown(f"candidate rooted at node {cand.id} is not a witness tree", tree)
            found.append(w)
        return Subtype(WitnessTrees(tuple(found)), tree)

    def _witness(self, tree: SimTree, cand: SimNode) -> Witness | None:
        recheck = self._recheck(tree)
        for cg in discover_context(tree, cand):
            try:
                leaves = classify_witness(tree, cand, cg, recheck)
            except Timeout:
                return None
            if leaves is not None:
                return Witness(cand.id, str(cg.term()), tuple(sorted(cg.J)),
                               tuple(sorted(cg.K)), tuple(leaves))
        return None

    def _recheck(self, tree: SimTree):
        def recheck(leaf: SimNode) -> bool:
            key = tree.label(leaf)
            if key in self.memo:
                return self.memo[key]
            if key in self.active or len(self.active) >= self.max_nesting:
                return False
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise Timeout()
            self.active.add(key)
            try:
                res = self.check(tree.sub_term(leaf), leaf.sup.term())
            finally:
                self.active.discard(key)
            ok = isinstance(res, Subtype)
            self.memo[key] = ok
            return ok

        return recheck


def subtype_check(t: SessionType, s: SessionType, bound: int | None = None,
                  timeout: float | None = None) -> SubtypeVerdict:
    return Checker(bound, timeout).check(t, s)
