"""Events and behavior graphs: the dynamic level over a static model.

An event is a region of the static model (a set of stages) given an
identity in time.  A behavior graph orders events with typed edges; the
simulation engine uses those edges to gate which regions a case may
enter.  Time is ordering only: there are no durations or clocks here.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import DuplicateEvent, EmptyRegion, UnknownEndpoint, UnreachableEvent
from .model import StaticModel, Subdiagram, ValidationReport, Violation, extract_region


class EdgeKind(str, Enum):
    SEQUENCE = "sequence"
    PARALLEL_SPLIT = "parallel_split"
    PARALLEL_JOIN = "parallel_join"
    CHOICE = "choice"


@dataclass(frozen=True)
class Event:
    id: str
    region: Subdiagram
    description: str = ""


@dataclass(frozen=True)
class OrderingEdge:
    source: str
    target: str
    kind: EdgeKind = EdgeKind.SEQUENCE

    def sort_key(self) -> tuple[str, str, str]:
        return (self.source, self.target, self.kind.value)


@dataclass(frozen=True)
class BehaviorGraph:
    events: dict[str, Event]
    edges: tuple[OrderingEdge, ...] = ()
    initial: tuple[str, ...] = ()
    defaults: dict[str, str] = field(default_factory=dict)
    _stage_index: dict[str, str] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for eid in sorted(self.events):
            for sid in self.events[eid].region.stages:
                self._stage_index.setdefault(sid, eid)

    def event_of(self, stage: str) -> str | None:
        """The event whose region holds ``stage``; None when the stage is ungated."""
        return self._stage_index.get(stage)

    def in_edges(self, eid: str) -> list[OrderingEdge]:
        return [e for e in self.edges if e.target == eid]

    def out_edges(self, eid: str) -> list[OrderingEdge]:
        return [e for e in self.edges if e.source == eid]

    def successors(self, eid: str) -> list[str]:
        return [e.target for e in self.out_edges(eid)]

    def choice_targets(self, eid: str) -> list[str]:
        return [e.target for e in self.out_edges(eid) if e.kind is EdgeKind.CHOICE]

    def default_choice(self, eid: str) -> str | None:
        """The branch taken when nothing in the payload says otherwise."""
        targets = self.choice_targets(eid)
        if not targets:
            return None
        return self.defaults.get(eid, targets[0])

    def with_edges(self, edges: Iterable[OrderingEdge]) -> BehaviorGraph:
        return build_behavior(self.events.values(), edges, self.initial, self.defaults)


def define_event(model: StaticModel, event_id: str, stage_ids: Iterable[str], description: str = "") -> Event:
    ids = list(stage_ids)
    if not ids:
        raise EmptyRegion(f"event {event_id!r} has no stages")
    return Event(event_id, extract_region(model, ids), description)


def reachable(events: Iterable[str], edges: Iterable[OrderingEdge], initial: Iterable[str]) -> set[str]:
    succ: dict[str, list[str]] = {e: [] for e in events}
    for e in edges:
        succ.setdefault(e.source, []).append(e.target)
    seen = set(initial)
    todo = deque(seen)
    while todo:
        for nxt in succ.get(todo.popleft(), ()):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def build_behavior(
    events: Iterable[Event],
    edges: Iterable[OrderingEdge],
    initial: Iterable[str],
    defaults: dict[str, str] | None = None,
) -> BehaviorGraph:
    """Assemble and check a behavior graph.

    ``defaults`` maps an event with choice out-edges to the branch taken
    unless a case's payload overrides it.  Raises DuplicateEvent,
    UnknownEndpoint (edge, initial or default naming an unknown event or
    non-choice branch) and UnreachableEvent.
    """
    table: dict[str, Event] = {}
    for ev in events:
        if ev.id in table:
            raise DuplicateEvent(f"event {ev.id!r} defined twice")
        table[ev.id] = ev
    edges = tuple(sorted(set(edges), key=OrderingEdge.sort_key))
    initial = tuple(sorted(set(initial)))
    for e in edges:
        for end in (e.source, e.target):
            if end not in table:
                raise UnknownEndpoint(f"edge {e.source} -> {e.target} names unknown event {end!r}")
    for i in initial:
        if i not in table:
            raise UnknownEndpoint(f"initial event {i!r} is not defined")
    defaults = dict(sorted((defaults or {}).items()))
    for src, dst in defaults.items():
        if not any(e.source == src and e.target == dst and e.kind is EdgeKind.CHOICE for e in edges):
            raise UnknownEndpoint(f"default {src} -> {dst} is not a choice edge")
    missing = sorted(table.keys() - reachable(table, edges, initial))
    if missing:
        raise UnreachableEvent(f"not reachable from an initial event: {', '.join(missing)}")
    return BehaviorGraph(table, edges, initial, defaults)


def _static_reach(model: StaticModel) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {}
    for e in list(model.flows.values()) + list(model.triggers.values()):
        succ.setdefault(e.source, set()).add(e.target)
    return succ


def _connected(succ: dict[str, set[str]], a: frozenset[str], b: frozenset[str]) -> bool:
    seen = set(a)
    todo = deque(a)
    while todo:
        cur = todo.popleft()
        for nxt in succ.get(cur, ()):
            if nxt in b:
                return True
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def validate_behavior(model: StaticModel, graph: BehaviorGraph) -> ValidationReport:
    """Region containment (errors) and control-imposed ordering (warnings).

    A sequence edge whose regions are not joined by any static flow or
    trigger path is legal but reported as ControlImposed: the ordering
    comes from the controller, not from things moving.
    """
    out: list[Violation] = []
    for eid in sorted(graph.events):
        region = graph.events[eid].region
        foreign = sorted(region.stages - model.stages.keys())
        foreign += sorted(f.id for f in region.flows if f.id not in model.flows)
        foreign += sorted(t.id for t in region.triggers if t.id not in model.triggers)
        if foreign:
            out.append(Violation("RegionForeign", f"not in the model: {', '.join(foreign)}", eid))
        elif region != extract_region(model, region.stages):
            out.append(Violation("RegionForeign", "region edges differ from the model's induced edges", eid))
    if any(v.code == "RegionForeign" for v in out):
        return ValidationReport(out)
    succ = _static_reach(model)
    for e in graph.edges:
        if e.kind is not EdgeKind.SEQUENCE:
            continue
        a, b = graph.events[e.source].region.stages, graph.events[e.target].region.stages
        if not _connected(succ, a, b):
            out.append(
                Violation(
                    "ControlImposed",
                    "no static flow or trigger path joins these regions",
                    f"{e.source}->{e.target}",
                    severity="warning",
                )
            )
    return ValidationReport(out)
