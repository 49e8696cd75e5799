"""Static (timeless) thinging-machine models.

A :class:`StaticModel` holds thimacs, their stages, and the two kinds of
edge between stages: flows (things moving) and triggers (one machine
initiating a flow in another).  The model stores no clocks, counters or
token state; all dynamics live in :mod:`thingmachine.engine`.

Identifiers are stable strings derived from names: a thimac nested as
``Order { Form { } }`` has id ``Order.Form``, its create stage has id
``Order.Form.create``, and transfer ports are ``Order.transfer.in`` /
``Order.transfer.out``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import (
    DuplicateEdge,
    DuplicateName,
    DuplicateStageKind,
    IllegalFlow,
    InvalidName,
    SameThimacTrigger,
    UnknownParent,
    UnknownStage,
    UnknownThimac,
)


class StageKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"


class ReceivePost(str, Enum):
    """The two halves of a receive stage; a view, not extra kinds."""

    ARRIVE = "arrive"
    ACCEPT = "accept"


class Post(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


class Port(str, Enum):
    IN = "in"
    OUT = "out"


RESERVED = frozenset(k.value for k in StageKind) | {"thimac", "flow", "trigger"}
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def post_of(kind: StageKind, view: ReceivePost = ReceivePost.ACCEPT) -> Post:
    """Interior for create/process/accept, boundary for release/transfer/arrive."""
    if kind in (StageKind.CREATE, StageKind.PROCESS):
        return Post.INTERIOR
    if kind is StageKind.RECEIVE:
        return Post.INTERIOR if view is ReceivePost.ACCEPT else Post.BOUNDARY
    return Post.BOUNDARY


def stage_id(thimac_id: str, kind: StageKind, port: Port | None = None) -> str:
    if kind is StageKind.TRANSFER:
        return f"{thimac_id}.transfer.{port.value}"
    return f"{thimac_id}.{kind.value}"


@dataclass(frozen=True)
class Stage:
    id: str
    owner: str
    kind: StageKind
    port: Port | None = None

    @property
    def post(self) -> Post:
        return post_of(self.kind)

    @property
    def subposts(self) -> tuple[ReceivePost, ...]:
        return (ReceivePost.ARRIVE, ReceivePost.ACCEPT) if self.kind is StageKind.RECEIVE else ()

    @property
    def label(self) -> str:
        return f"transfer {self.port.value}" if self.port else self.kind.value


@dataclass
class Thimac:
    id: str
    name: str
    parent: str | None = None
    stages: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class FlowEdge:
    source: str
    target: str

    @property
    def id(self) -> str:
        return f"{self.source}->{self.target}"


@dataclass(frozen=True)
class TriggerEdge:
    source: str
    target: str

    @property
    def id(self) -> str:
        return f"{self.source}=>{self.target}"


# (from kind, to kind, same thimac) -> (required from port, required to port).
# Anything absent is illegal.
FLOW_RULES: dict[tuple[StageKind, StageKind, bool], tuple[Port | None, Port | None]] = {
    (StageKind.CREATE, StageKind.PROCESS, True): (None, None),
    (StageKind.CREATE, StageKind.RELEASE, True): (None, None),
    (StageKind.RECEIVE, StageKind.PROCESS, True): (None, None),
    (StageKind.RECEIVE, StageKind.RELEASE, True): (None, None),
    (StageKind.PROCESS, StageKind.RELEASE, True): (None, None),
    (StageKind.PROCESS, StageKind.CREATE, True): (None, None),
    (StageKind.TRANSFER, StageKind.RECEIVE, True): (Port.IN, None),
    (StageKind.RELEASE, StageKind.TRANSFER, True): (None, Port.OUT),
    (StageKind.TRANSFER, StageKind.TRANSFER, False): (Port.OUT, Port.IN),
}


def flow_violation(src: Stage, dst: Stage) -> str | None:
    """Why a flow from ``src`` to ``dst`` is illegal, or None when it is legal."""
    same = src.owner == dst.owner
    where = "same thimac" if same else "cross thimac"
    rule = FLOW_RULES.get((src.kind, dst.kind, same))
    if rule is None:
        return f"no legality row for {src.kind.value} -> {dst.kind.value} ({where})"
    want_src, want_dst = rule
    if want_src is not None and src.port is not want_src:
        return f"{src.kind.value} -> {dst.kind.value} ({where}) must leave the {want_src.value} port"
    if want_dst is not None and dst.port is not want_dst:
        return f"{src.kind.value} -> {dst.kind.value} ({where}) must enter the {want_dst.value} port"
    return None


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ref: str = ""
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity} {self.code} [{self.ref}]: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


@dataclass(frozen=True)
class Subdiagram:
    """Induced sub-model over a set of stages."""

    stages: frozenset[str] = frozenset()
    flows: frozenset[FlowEdge] = frozenset()
    triggers: frozenset[TriggerEdge] = frozenset()

    def __bool__(self) -> bool:
        return bool(self.stages)


class StaticModel:
    """The grand thimac: every thimac, stage, flow and trigger of a system."""

    def __init__(self, name: str = "") -> None:
        self.name = name
        self.thimacs: dict[str, Thimac] = {}
        self.stages: dict[str, Stage] = {}
        self.flows: dict[str, FlowEdge] = {}
        self.triggers: dict[str, TriggerEdge] = {}

    def __repr__(self) -> str:
        return (
            f"StaticModel({self.name!r}, thimacs={len(self.thimacs)}, stages={len(self.stages)}, "
            f"flows={len(self.flows)}, triggers={len(self.triggers)})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticModel):
            return NotImplemented
        return self._structure() == other._structure()

    __hash__ = None  # mutable

    def _structure(self):
        return (
            self.name,
            {t.id: (t.name, t.parent, frozenset(t.stages)) for t in self.thimacs.values()},
            dict(self.stages),
            set(self.flows),
            set(self.triggers),
        )

    def copy(self) -> StaticModel:
        other = StaticModel(self.name)
        for t in self.thimacs.values():
            other.thimacs[t.id] = Thimac(t.id, t.name, t.parent, list(t.stages))
        other.stages = dict(self.stages)
        other.flows = dict(self.flows)
        other.triggers = dict(self.triggers)
        return other

    # -- construction -------------------------------------------------

    def add_thimac(self, name: str, parent: str | None = None) -> str:
        if not _NAME_RE.match(name) or name in RESERVED:
            raise InvalidName(f"{name!r} is not a usable thimac name")
        if parent is not None and parent not in self.thimacs:
            raise UnknownParent(f"parent thimac {parent!r} does not exist")
        tid = f"{parent}.{name}" if parent else name
        if tid in self.thimacs:
            where = f"inside {parent!r}" if parent else "at top level"
            raise DuplicateName(f"thimac {name!r} already exists {where}")
        self.thimacs[tid] = Thimac(tid, name, parent)
        return tid

    def add_stage(self, thimac: str, kind: StageKind | str, port: Port | str | None = None) -> str:
        kind = StageKind(kind)
        port = Port(port) if port is not None else None
        if thimac not in self.thimacs:
            raise UnknownThimac(f"thimac {thimac!r} does not exist")
        if kind is StageKind.TRANSFER and port is None:
            raise ValueError("transfer stages need a port (in or out)")
        if kind is not StageKind.TRANSFER:
            port = None
        sid = stage_id(thimac, kind, port)
        if sid in self.stages:
            what = f"transfer {port.value} port" if port else f"{kind.value} stage"
            raise DuplicateStageKind(f"thimac {thimac!r} already has a {what}")
        self.stages[sid] = Stage(sid, thimac, kind, port)
        self.thimacs[thimac].stages.append(sid)
        return sid

    def _stage(self, sid: str) -> Stage:
        try:
            return self.stages[sid]
        except KeyError:
            raise UnknownStage(f"stage {sid!r} does not exist") from None

    def add_flow(self, source: str, target: str) -> str:
        src, dst = self._stage(source), self._stage(target)
        problem = flow_violation(src, dst)
        if problem:
            raise IllegalFlow(problem)
        edge = FlowEdge(source, target)
        if edge.id in self.flows:
            raise DuplicateEdge(f"flow {edge.id} already exists")
        self.flows[edge.id] = edge
        return edge.id

    def add_trigger(self, source: str, target: str) -> str:
        src, dst = self._stage(source), self._stage(target)
        if src.owner == dst.owner:
            raise SameThimacTrigger(f"trigger {source} => {target} stays inside {src.owner!r}")
        edge = TriggerEdge(source, target)
        if edge.id in self.triggers:
            raise DuplicateEdge(f"trigger {edge.id} already exists")
        self.triggers[edge.id] = edge
        return edge.id

    # -- queries ------------------------------------------------------

    def stage_of(self, thimac: str, kind: StageKind | str, port: Port | str | None = None) -> str:
        kind = StageKind(kind)
        sid = stage_id(thimac, kind, Port(port) if port else None)
        self._stage(sid)
        return sid

    def children(self, thimac: str | None) -> list[str]:
        return sorted(t.id for t in self.thimacs.values() if t.parent == thimac)

    def out_flows(self, sid: str) -> list[FlowEdge]:
        return sorted((f for f in self.flows.values() if f.source == sid), key=lambda f: f.target)

    def out_triggers(self, sid: str) -> list[TriggerEdge]:
        return sorted((t for t in self.triggers.values() if t.source == sid), key=lambda t: t.target)


def validate_static(model: StaticModel) -> ValidationReport:
    """Check every structural rule; never mutates the model."""
    out: list[Violation] = []
    for tid in sorted(model.thimacs):
        t = model.thimacs[tid]
        if t.parent is not None and t.parent not in model.thimacs:
            out.append(Violation("UnknownParent", f"parent {t.parent!r} does not exist", tid))
        seen, cur = {tid}, t.parent
        while cur is not None and cur in model.thimacs:
            if cur in seen:
                out.append(Violation("NestingCycle", "parent links form a cycle", tid))
                break
            seen.add(cur)
            cur = model.thimacs[cur].parent
        for sid in t.stages:
            if sid not in model.stages:
                out.append(Violation("UnresolvedStage", f"listed stage {sid!r} does not exist", tid))
    kinds_seen: dict[tuple, str] = {}
    for sid in sorted(model.stages):
        s = model.stages[sid]
        if s.owner not in model.thimacs:
            out.append(Violation("UnknownThimac", f"owner {s.owner!r} does not exist", sid))
        if s.kind is StageKind.TRANSFER and s.port is None:
            out.append(Violation("MissingPort", "transfer stage without a port", sid))
        key = (s.owner, s.kind, s.port)
        if key in kinds_seen:
            out.append(Violation("DuplicateStageKind", f"duplicates {kinds_seen[key]}", sid))
        kinds_seen[key] = sid
    for fid in sorted(model.flows):
        f = model.flows[fid]
        missing = [e for e in (f.source, f.target) if e not in model.stages]
        if missing:
            out.append(Violation("UnresolvedEndpoint", f"unknown endpoint(s) {', '.join(missing)}", fid))
            continue
        problem = flow_violation(model.stages[f.source], model.stages[f.target])
        if problem:
            out.append(Violation("IllegalFlow", problem, fid))
    for tid in sorted(model.triggers):
        t = model.triggers[tid]
        missing = [e for e in (t.source, t.target) if e not in model.stages]
        if missing:
            out.append(Violation("UnresolvedEndpoint", f"unknown endpoint(s) {', '.join(missing)}", tid))
            continue
        if model.stages[t.source].owner == model.stages[t.target].owner:
            out.append(Violation("SameThimacTrigger", "trigger must cross thimacs", tid))
    return ValidationReport(out)


def extract_region(model: StaticModel, stage_ids: Iterable[str]) -> Subdiagram:
    ids = frozenset(stage_ids)
    unknown = sorted(ids - model.stages.keys())
    if unknown:
        raise UnknownStage(f"unknown stage(s): {', '.join(unknown)}")
    return Subdiagram(
        ids,
        frozenset(f for f in model.flows.values() if f.source in ids and f.target in ids),
        frozenset(t for t in model.triggers.values() if t.source in ids and t.target in ids),
    )
