"""Graphviz output for types, simulation trees and witness trees.

Everything here is deterministic: nodes and edges come out in a fixed order
and no timestamps are written.
"""

from __future__ import annotations

from .algorithm import SimNode, SimTree, Witness
from .automaton import FINAL, Automaton, to_automaton
from .syntax import SessionType


def _q(s: str) -> str:
    # newlines become left-justified DOT line breaks
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\l") + '"'


def _edge_label(a: Automaton, q: int, label: str) -> str:
    return f"{a.kinds[q]}{label}"


def cfsm_dot(t: SessionType, name: str = "T") -> str:
    """The communicating-machine view of ``t``: numbered states, ``!l``/``?l`` edges."""
    a = to_automaton(t)
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", '  node [shape=circle];',
             '  start [shape=point, label=""];']
    for q in range(len(a.kinds)):
        shape = ", shape=doublecircle" if a.kinds[q] == FINAL else ""
        lines.append(f"  s{q} [label={_q(str(q))}{shape}];")
    lines.append(f"  start -> s{a.start};")
    for q, row in enumerate(a.trans):
        for l, r in row:
            lines.append(f"  s{q} -> s{r} [label={_q(_edge_label(a, q, l))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node_box(tree: SimTree, n: SimNode, tag: str) -> list[str]:
    rep = n.sup
    out = [f"  subgraph cluster_{n.id} {{",
           f"    label={_q(f'{n.id}: {n.sub} ({tag})')};",
           "    style=rounded;"]
    for q in range(rep.size):
        shape = "diamond" if q == 0 else ("doublecircle" if rep.aut.kinds[q] == FINAL else "ellipse")
        out.append(f"    n{n.id}_{q} [label={_q(rep.label(q))}, shape={shape}];")
    for q, row in enumerate(rep.aut.trans):
        for l, r in row:
            out.append(f"    n{n.id}_{q} -> n{n.id}_{r} [label={_q(_edge_label(rep.aut, q, l))}];")
    out.append("  }")
    return out


def _tree_dot(tree: SimTree, nodes: list[SimNode], tags: dict[int, str], name: str,
              legend: str | None = None) -> str:
    ids = {n.id for n in nodes}
    lines = [f"digraph {_q(name)} {{", "  compound=true;", "  node [fontsize=10];",
             "  edge [fontsize=10];"]
    for n in nodes:
        lines += _node_box(tree, n, tags.get(n.id, n.tag))
    for n in nodes:
        if n.parent is not None and n.parent.id in ids:
            p = n.parent
            lines.append(f"  n{p.id}_0 -> n{n.id}_0 [ltail=cluster_{p.id}, lhead=cluster_{n.id}, "
                         f"label={_q(n.edge)}];")
    for n in nodes:
        if n.ancestor is not None and n.ancestor.id in ids:
            a = n.ancestor
            lines.append(f"  n{n.id}_0 -> n{a.id}_0 [ltail=cluster_{n.id}, lhead=cluster_{a.id}, "
                         "style=dashed, constraint=false];")
    if legend is not None:
        lines.append(f"  legend [shape=box, label={_q(legend)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def simulation_tree_dot(tree: SimTree, name: str = "simulation") -> str:
    """All nodes; each box is titled ``id: subtype-state (tag)``."""
    return _tree_dot(tree, tree.nodes, {}, name)


def witness_dot(tree: SimTree, witness: Witness, name: str = "witness") -> str:
    """The witness subtree, with leaves tagged by the condition they meet
    and a legend box giving the context and its hole split."""
    root = tree.nodes[witness.root]
    nodes = sorted(root.walk(), key=lambda n: n.id)
    tags = {leaf.node: leaf.kind or "?" for leaf in witness.leaves}
    legend = (f"A = {witness.context}\n"
              f"J = {{{', '.join(map(str, witness.J))}}}\n"
              f"K = {{{', '.join(map(str, witness.K))}}}\n")
    return _tree_dot(tree, nodes, tags, name, legend)
