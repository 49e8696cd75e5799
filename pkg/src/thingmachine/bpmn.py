"""Import a small BPMN 2.0 subset as a static model plus behavior graph.

Supported: task, startEvent, endEvent, exclusiveGateway, parallelGateway,
sequenceFlow.  Every other element is skipped with an UnsupportedElement
diagnostic.  Diagram-interchange geometry is ignored.

Mapping:

* task -> thimac with transfer in -> receive -> process -> release -> transfer out
* gateway -> a router thimac with the same chain (the process stage routes)
* startEvent -> thimac with create -> release -> transfer out
* endEvent -> thimac with transfer in -> receive -> release (the thing leaves)
* sequenceFlow -> transfer out -> transfer in between the two thimacs
* one behavior event per task and per gateway; ordering edges are choice
  edges out of exclusive gateways, parallel_split out of parallel splits,
  parallel_join into parallel joins and sequence otherwise.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import BpmnError, DegenerateGateway, MalformedXml, MissingStartEvent
from .events import BehaviorGraph, EdgeKind, OrderingEdge, build_behavior, define_event
from .model import RESERVED, Port, StageKind, StaticModel

NODE_KINDS = ("task", "startEvent", "endEvent", "exclusiveGateway", "parallelGateway")
GATEWAYS = ("exclusiveGateway", "parallelGateway")


@dataclass(frozen=True)
class BpmnNode:
    id: str
    kind: str
    name: str = ""


@dataclass(frozen=True)
class BpmnFlow:
    id: str
    source: str
    target: str


@dataclass
class BpmnGraph:
    nodes: dict[str, BpmnNode] = field(default_factory=dict)
    flows: list[BpmnFlow] = field(default_factory=list)
    defaults: dict[str, str] = field(default_factory=dict)  # gateway id -> default flow id
    process_id: str = ""

    def of_kind(self, kind: str) -> list[BpmnNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def outgoing(self, node: str) -> list[BpmnFlow]:
        return [f for f in self.flows if f.source == node]

    def incoming(self, node: str) -> list[BpmnFlow]:
        return [f for f in self.flows if f.target == node]


@dataclass(frozen=True)
class BpmnDiagnostic:
    code: str
    message: str
    element: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


def parse_bpmn(text: str | bytes) -> tuple[BpmnGraph, list[BpmnDiagnostic]]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(f"not well-formed XML: {exc}") from None
    diags: list[BpmnDiagnostic] = []
    processes = [el for el in root.iter() if _local(el.tag) == "process"]
    if _local(root.tag) == "process":
        processes = [root]
    if not processes:
        raise MissingStartEvent("document has no process element")
    for extra in processes[1:]:
        diags.append(BpmnDiagnostic("UnsupportedElement", "only the first process is imported", extra.get("id", "")))
    if _local(root.tag) == "definitions":
        for child in root:
            tag = _local(child.tag)
            if tag != "process" and tag != "BPMNDiagram":
                diags.append(BpmnDiagnostic("UnsupportedElement", f"skipped <{tag}>", child.get("id", tag)))
    proc = processes[0]
    graph = BpmnGraph(process_id=proc.get("id", ""))
    raw_flows = []
    for el in proc:
        tag = _local(el.tag)
        eid = el.get("id")
        if tag in NODE_KINDS:
            if not eid:
                diags.append(BpmnDiagnostic("MissingId", f"<{tag}> without an id was skipped"))
                continue
            graph.nodes[eid] = BpmnNode(eid, tag, (el.get("name") or "").strip())
            if tag in GATEWAYS and el.get("default"):
                graph.defaults[eid] = el.get("default")
        elif tag == "sequenceFlow":
            raw_flows.append((eid or "", el.get("sourceRef", ""), el.get("targetRef", "")))
        else:
            diags.append(BpmnDiagnostic("UnsupportedElement", f"skipped <{tag}>", eid or tag))
    for fid, src, dst in raw_flows:
        if src not in graph.nodes or dst not in graph.nodes:
            diags.append(BpmnDiagnostic("DanglingFlow", f"flow {fid} references a missing node", fid))
            continue
        graph.flows.append(BpmnFlow(fid, src, dst))
    starts = graph.of_kind("startEvent")
    if not starts:
        raise MissingStartEvent(f"process {graph.process_id!r} has no startEvent")
    if len(starts) > 1:
        raise BpmnError(f"process {graph.process_id!r} has {len(starts)} startEvents; exactly one is supported")
    return graph, diags


def thimac_name(node: BpmnNode) -> str:
    """CamelCase identifier from a BPMN display name, falling back to the id."""
    words = re.findall(r"[A-Za-z0-9]+", node.name)
    name = "".join(w[0].upper() + w[1:] for w in words)
    if not name or name[0].isdigit():
        name = re.sub(r"\W", "_", node.id)
        if not name or name[0].isdigit():
            name = "n_" + name
    if name in RESERVED:
        name += "_"
    return name


def map_bpmn(graph: BpmnGraph) -> tuple[StaticModel, BehaviorGraph]:
    for g in graph.nodes.values():
        if g.kind in GATEWAYS and len(graph.outgoing(g.id)) < 2 and len(graph.incoming(g.id)) < 2:
            raise DegenerateGateway(f"gateway {g.id} neither splits nor merges")

    model = StaticModel(graph.process_id)
    names: dict[str, str] = {}
    for node in sorted(graph.nodes.values(), key=lambda n: n.id):
        name = thimac_name(node)
        if name in model.thimacs:
            name = f"{name}_{re.sub(r'[^A-Za-z0-9_]', '_', node.id)}"
        names[node.id] = model.add_thimac(name)

    chain_kinds = {
        "task": ["transfer_in", "receive", "process", "release", "transfer_out"],
        "exclusiveGateway": ["transfer_in", "receive", "process", "release", "transfer_out"],
        "parallelGateway": ["transfer_in", "receive", "process", "release", "transfer_out"],
        "startEvent": ["create", "release", "transfer_out"],
        "endEvent": ["transfer_in", "receive", "release"],
    }
    for node in graph.nodes.values():
        tid = names[node.id]
        chain = []
        for item in chain_kinds[node.kind]:
            if item.startswith("transfer_"):
                chain.append(model.add_stage(tid, StageKind.TRANSFER, Port(item.split("_")[1])))
            else:
                chain.append(model.add_stage(tid, StageKind(item)))
        for a, b in zip(chain, chain[1:]):
            model.add_flow(a, b)
    for f in graph.flows:
        model.add_flow(
            model.stage_of(names[f.source], StageKind.TRANSFER, Port.OUT),
            model.stage_of(names[f.target], StageKind.TRANSFER, Port.IN),
        )

    gated = [n for n in graph.nodes.values() if n.kind == "task" or n.kind in GATEWAYS]
    events = [
        define_event(model, names[n.id], model.thimacs[names[n.id]].stages, n.name or n.id)
        for n in sorted(gated, key=lambda n: names[n.id])
    ]
    gated_ids = {n.id for n in gated}
    edges = []
    for f in graph.flows:
        if f.source not in gated_ids or f.target not in gated_ids:
            continue
        src, dst = graph.nodes[f.source], graph.nodes[f.target]
        if src.kind == "exclusiveGateway" and len(graph.outgoing(src.id)) >= 2:
            kind = EdgeKind.CHOICE
        elif src.kind == "parallelGateway" and len(graph.outgoing(src.id)) >= 2:
            kind = EdgeKind.PARALLEL_SPLIT
        elif dst.kind == "parallelGateway" and len(graph.incoming(dst.id)) >= 2:
            kind = EdgeKind.PARALLEL_JOIN
        else:
            kind = EdgeKind.SEQUENCE
        edges.append(OrderingEdge(names[f.source], names[f.target], kind))
    start = graph.of_kind("startEvent")[0]
    initial = [names[f.target] for f in graph.outgoing(start.id) if f.target in gated_ids]
    defaults = {}
    flows_by_id = {f.id: f for f in graph.flows}
    for gw, fid in graph.defaults.items():
        f = flows_by_id.get(fid)
        if f is not None and f.target in gated_ids and graph.nodes[gw].kind == "exclusiveGateway":
            defaults[names[gw]] = names[f.target]
    return model, build_behavior(events, edges, initial, defaults)


def import_bpmn(text: str | bytes) -> tuple[StaticModel, BehaviorGraph, list[BpmnDiagnostic]]:
    graph, diags = parse_bpmn(text)
    model, behavior = map_bpmn(graph)
    return model, behavior, diags
