"""The arrow through a lattice of space thimacs.

Space is a line of ``n`` thimacs joined transfer-out -> transfer-in.  A
moving arrow arrives at a node's boundary; while it still has movement
energy the node refuses it and it is transferred on to the next node,
losing one unit.  With no energy left, or at the last node, it is
accepted and settles.  So a moving arrow is never inside any node: every
record before settlement is at a boundary post.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dot import render_dot
from .errors import AlreadySettled, EmptyLattice
from .model import Post, Port, StageKind, StaticModel

ZENO_ACTIONS = ("arrive", "bounce", "settle")


@dataclass(frozen=True)
class SpaceLattice:
    model: StaticModel
    nodes: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.nodes)

    def next_node(self, index: int) -> int | None:
        """Index of the node fed by this node's transfer-out, or None at the far end."""
        flows = self.model.out_flows(f"{self.nodes[index]}.transfer.out")
        if not flows:
            return None
        return self.nodes.index(self.model.stages[flows[0].target].owner)


def build_lattice(n: int) -> SpaceLattice:
    if n < 1:
        raise EmptyLattice("a lattice needs at least one space thimac")
    model = StaticModel(f"lattice{n}")
    nodes = []
    for i in range(n):
        tid = model.add_thimac(f"S{i}")
        t_in = model.add_stage(tid, StageKind.TRANSFER, Port.IN)
        recv = model.add_stage(tid, StageKind.RECEIVE)
        model.add_stage(tid, StageKind.TRANSFER, Port.OUT)
        model.add_flow(t_in, recv)
        nodes.append(tid)
    for a, b in zip(nodes, nodes[1:]):
        model.add_flow(f"{a}.transfer.out", f"{b}.transfer.in")
    return SpaceLattice(model, tuple(nodes))


@dataclass(frozen=True)
class ZenoRecord:
    node: int
    action: str
    energy_after: int

    @property
    def post(self) -> Post:
        return Post.INTERIOR if self.action == "settle" else Post.BOUNDARY

    def to_json(self) -> str:
        return json.dumps({"node": self.node, "action": self.action, "energy_after": self.energy_after},
                          separators=(",", ":"))


@dataclass
class ArrowSim:
    lattice: SpaceLattice
    energy: int
    node: int = 0
    settled: bool = False
    records: list[ZenoRecord] = field(default_factory=list)


@dataclass(frozen=True)
class BounceTrace:
    records: tuple[ZenoRecord, ...]
    settle_node: int
    residual: int

    @property
    def bounces(self) -> int:
        return sum(1 for r in self.records if r.action == "bounce")

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


def launch(lattice: SpaceLattice, energy: int) -> ArrowSim:
    if energy < 0:
        raise ValueError("energy must be >= 0")
    return ArrowSim(lattice, energy)


def arrow_step(sim: ArrowSim) -> tuple[ZenoRecord, ...]:
    """Arrive at the current node, then bounce onward or settle."""
    if sim.settled:
        raise AlreadySettled(f"arrow already settled at node {sim.node}")
    arrive = ZenoRecord(sim.node, "arrive", sim.energy)
    onward = sim.lattice.next_node(sim.node)
    if sim.energy > 0 and onward is not None:
        sim.energy -= 1
        out = (arrive, ZenoRecord(sim.node, "bounce", sim.energy))
        sim.node = onward
    else:
        sim.settled = True
        out = (arrive, ZenoRecord(sim.node, "settle", sim.energy))
    sim.records.extend(out)
    return out


def run_until_settled(sim: ArrowSim) -> BounceTrace:
    while not sim.settled:
        arrow_step(sim)
    return BounceTrace(tuple(sim.records), sim.node, sim.energy)


def render_lattice_dot(lattice: SpaceLattice, settle_node: int | None = None) -> str:
    highlight = [lattice.nodes[settle_node]] if settle_node is not None else []
    return render_dot(lattice.model, highlight=highlight)
