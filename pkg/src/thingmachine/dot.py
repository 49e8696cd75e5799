"""Graphviz DOT output for static models and behavior graphs.

Output is a pure function of the input: everything is emitted in sorted
order so equal inputs give identical bytes.
"""

from __future__ import annotations

from typing import Iterable

from .events import BehaviorGraph, EdgeKind
from .model import Post, StaticModel


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def render_dot(
    subject: StaticModel | BehaviorGraph,
    *,
    name: str = "",
    highlight: Iterable[str] = (),
    control_imposed: Iterable[tuple[str, str]] = (),
) -> str:
    """One cluster per thimac; solid flows, dashed triggers.

    ``highlight`` names thimacs (or events, for a behavior graph) to fill.
    """
    if isinstance(subject, BehaviorGraph):
        return _render_behavior(subject, name or "behavior", set(highlight), set(control_imposed))
    return _render_model(subject, name or subject.name or "model", set(highlight))


def _render_model(model: StaticModel, name: str, highlight: set[str]) -> str:
    lines = [f"digraph {_q(name)} {{", "    compound=true;", "    node [shape=box, fontsize=10];"]

    def cluster(tid: str, depth: int) -> None:
        pad = "    " * (depth + 1)
        t = model.thimacs[tid]
        lines.append(f"{pad}subgraph {_q('cluster_' + tid)} {{")
        lines.append(f"{pad}    label={_q(t.name)};")
        if tid in highlight:
            lines.append(f'{pad}    style=filled; fillcolor="#ffe08a";')
        for sid in sorted(s for s in t.stages if s in model.stages):
            stage = model.stages[sid]
            shape = "box" if stage.post is Post.INTERIOR else "ellipse"
            lines.append(f"{pad}    {_q(sid)} [label={_q(stage.label)}, shape={shape}];")
        for child in model.children(tid):
            cluster(child, depth + 1)
        lines.append(f"{pad}}}")

    for root in model.children(None):
        cluster(root, 0)
    for f in sorted(model.flows.values(), key=lambda e: e.id):
        lines.append(f"    {_q(f.source)} -> {_q(f.target)} [style=solid];")
    for t in sorted(model.triggers.values(), key=lambda e: e.id):
        lines.append(f"    {_q(t.source)} -> {_q(t.target)} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_EDGE_STYLE = {
    EdgeKind.SEQUENCE: "solid",
    EdgeKind.PARALLEL_SPLIT: "bold",
    EdgeKind.PARALLEL_JOIN: "bold",
    EdgeKind.CHOICE: "dotted",
}


def _render_behavior(graph: BehaviorGraph, name: str, highlight: set[str], imposed: set[tuple[str, str]]) -> str:
    lines = [f"digraph {_q(name)} {{", "    node [shape=box, style=rounded, fontsize=10];"]
    for eid in sorted(graph.events):
        ev = graph.events[eid]
        label = f"{eid}\n{ev.description}" if ev.description else eid
        attrs = [f"label={_q(label)}"]
        if eid in graph.initial:
            attrs.append("peripheries=2")
        if eid in highlight:
            attrs.append('style="rounded,filled"')
            attrs.append('fillcolor="#ffe08a"')
        lines.append(f"    {_q(eid)} [{', '.join(attrs)}];")
    for e in graph.edges:
        style = "dashed" if (e.source, e.target) in imposed else _EDGE_STYLE[e.kind]
        lines.append(f"    {_q(e.source)} -> {_q(e.target)} [label={_q(e.kind.value)}, style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
