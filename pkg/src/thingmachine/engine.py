"""Deterministic token simulation over a static model and behavior graphs.

Things rest only at interior (state) posts: create, process, and the
accept half of receive.  Each post holds a FIFO queue.  A step picks one
enabled occurrence with a seeded generator and runs it to completion: the
thing leaves its post, crosses every progression post on the way
(release, transfer, arrive), and comes to rest at the next state post or
leaves the system when the flow ends at a progression post.  One
:class:`TraceRecord` is written per generic action crossed.

Behavior graphs gate movement per case:

* a thing may enter an event's region only when that event is enabled
  for its case (every incoming edge satisfied), or is already under way,
  or is a parallel join the thing is arriving at;
* leaving a region completes its event;
* an exclusive choice follows ``payload["choices"][event]`` when given,
  otherwise the graph's default branch;
* leaving a parallel split forks the thing: the mover takes one branch
  and a copy (id ``<parent>.<n>``) waits at the split post for each other
  branch; copies are absorbed back at the join once it is enabled.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Callable, Iterable

from .errors import InvalidModel, NotACreateStage, UnknownStage
from .events import BehaviorGraph, EdgeKind
from .model import Post, StageKind, StaticModel, validate_static
from .reconfig import Case, Configuration, Controller

STATE_ACTIONS = frozenset({"create", "process", "accept", "settle"})
ACTIONS = ("create", "process", "release", "transfer", "arrive", "accept", "trigger", "bounce", "settle")

Processor = Callable[[dict], None]


def mode_of(action: str) -> str:
    return "State" if action in STATE_ACTIONS else "Progression"


@dataclass(frozen=True)
class TraceRecord:
    step: int
    thing: str
    thimac: str
    stage: str
    action: str
    config: str | None = None
    mode: str = ""

    def __post_init__(self) -> None:
        if not self.mode:
            object.__setattr__(self, "mode", mode_of(self.action))

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "thing": self.thing,
            "thimac": self.thimac,
            "stage": self.stage,
            "action": self.action,
            "mode": self.mode,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    status: str = "quiescent"  # or "budget_exhausted"
    steps: int = 0

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


@dataclass
class Thing:
    id: str
    case: str
    payload: dict
    location: str
    born_step: int
    parent: str | None = None
    branch: str | None = None
    forks: int = 0
    family: str = ""

    def __post_init__(self) -> None:
        if not self.family:
            self.family = self.id


@dataclass(frozen=True)
class Injection:
    step: int
    stage: str
    payload: dict = field(default_factory=dict)


def load_injections(text: str) -> list[Injection]:
    """Read a JSON list of ``{"step", "stage", "payload"}`` objects (or 3-element lists)."""
    data = json.loads(text, parse_float=Decimal)
    out = []
    for item in data:
        if isinstance(item, dict):
            out.append(Injection(int(item.get("step", 0)), item["stage"], item.get("payload", {})))
        else:
            step, stage, payload = item
            out.append(Injection(int(step), stage, payload))
    return out


@dataclass(frozen=True)
class Occurrence:
    thing: str
    path: tuple[str, ...]
    departs: bool


def _event_status(graph: BehaviorGraph, done: set[str], choices: dict[str, str]) -> tuple[set[str], set[str]]:
    """(enabled, dead) events of one case, by dead-path elimination."""
    dead: set[str] = set()

    def edge_state(e) -> str:
        if e.source in dead:
            return "dead"
        if e.source not in done:
            return "pending"
        if e.kind is EdgeKind.CHOICE and choices.get(e.source) != e.target:
            return "dead"
        return "live"

    changed = True
    while changed:
        changed = False
        for eid in graph.events:
            if eid in done or eid in dead or eid in graph.initial:
                continue
            states = [edge_state(e) for e in graph.in_edges(eid)]
            if states and all(s == "dead" for s in states):
                dead.add(eid)
                changed = True
    enabled = set()
    for eid in graph.events:
        if eid in done or eid in dead:
            continue
        states = [edge_state(e) for e in graph.in_edges(eid)]
        if "pending" in states:
            continue
        if eid in graph.initial or "live" in states:
            enabled.add(eid)
    return enabled, dead


class Simulation:
    """Mutable simulation state: queues, live things, step counter and RNG."""

    def __init__(
        self,
        model: StaticModel,
        controller: Controller,
        seed: int = 0,
        processors: dict[str, Processor] | None = None,
    ) -> None:
        self.model = model
        self.controller = controller
        self.seed = seed
        self.rng = random.Random(seed)
        self.processors = dict(processors or {})
        self.queues: dict[str, list[str]] = {}
        self.things: dict[str, Thing] = {}
        self.step_index = 0
        self.log: list[TraceRecord] = []
        self._counter = 0
        self._paths: dict[str, list[tuple[tuple[str, ...], bool]]] = {}

    def snapshot(self) -> tuple:
        return (
            self.step_index,
            {k: list(v) for k, v in self.queues.items() if v},
            {k: (t.case, t.location, t.branch) for k, t in self.things.items()},
            list(self.log),
            self.rng.getstate(),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Simulation):
            return NotImplemented
        return self.model == other.model and self.snapshot() == other.snapshot()

    __hash__ = None

    @property
    def active_config(self) -> str | None:
        return self.controller.active

    # -- helpers ---------------------------------------------------------

    def _graph(self, case: Case) -> BehaviorGraph:
        return self.controller.behavior(case.config)

    def _case(self, thing: Thing) -> Case:
        return self.controller.in_flight[thing.case]

    def _emit(self, out: list[TraceRecord], thing: Thing, stage: str, action: str) -> None:
        case = self.controller.in_flight.get(thing.case)
        st = self.model.stages[stage]
        # a trigger is a signal sent from wherever the thing is, so it takes that post's mode
        mode = ("State" if st.post is Post.INTERIOR else "Progression") if action == "trigger" else mode_of(action)
        rec = TraceRecord(self.step_index, thing.id, st.owner, stage, action, case.config if case else None, mode)
        out.append(rec)
        self.log.append(rec)

    def _new_id(self) -> str:
        self._counter += 1
        return f"t{self._counter}"

    def paths_from(self, stage: str) -> list[tuple[tuple[str, ...], bool]]:
        """Every micro-run from a state post: (stages entered, departs?)."""
        if stage in self._paths:
            return self._paths[stage]
        found: list[tuple[tuple[str, ...], bool]] = []

        def walk(cur: str, acc: tuple[str, ...], seen: frozenset[str]) -> None:
            flows = self.model.out_flows(cur)
            if not flows:
                if acc and self.model.stages[cur].kind in (StageKind.RELEASE, StageKind.TRANSFER):
                    found.append((acc, True))
                return
            for f in flows:
                nxt = f.target
                if nxt in seen:
                    continue
                kind = self.model.stages[nxt].kind
                if kind in (StageKind.RELEASE, StageKind.TRANSFER):
                    walk(nxt, acc + (nxt,), seen | {nxt})
                else:
                    found.append((acc + (nxt,), False))

        walk(stage, (), frozenset({stage}))
        self._paths[stage] = found
        return found

    # -- injection and triggers ------------------------------------------

    def inject_thing(self, stage: str, payload: dict | None = None) -> str:
        """Birth a root thing at a create stage; it opens a case pinned to the active config."""
        if stage not in self.model.stages:
            raise UnknownStage(f"stage {stage!r} does not exist")
        if self.model.stages[stage].kind is not StageKind.CREATE:
            raise NotACreateStage(f"{stage!r} is a {self.model.stages[stage].kind.value} stage")
        tid = self._new_id()
        self.controller.open_case(tid)
        thing = Thing(tid, tid, copy.deepcopy(payload or {}), stage, self.step_index)
        self._place(thing, stage)
        out: list[TraceRecord] = []
        self._emit(out, thing, stage, "create")
        self._fire_triggers(out, thing, stage, set())
        self._refresh_cases()
        return tid

    def _place(self, thing: Thing, stage: str, index: int | None = None) -> None:
        thing.location = stage
        self.things[thing.id] = thing
        q = self.queues.setdefault(stage, [])
        q.insert(len(q) if index is None else index, thing.id)

    def _fire_triggers(self, out: list[TraceRecord], thing: Thing, stage: str, fired: set[str]) -> None:
        for trig in self.model.out_triggers(stage):
            if trig.id in fired:
                continue
            fired.add(trig.id)
            self._emit(out, thing, stage, "trigger")
            target = self.model.stages[trig.target]
            if target.kind is StageKind.CREATE:
                born = Thing(self._new_id(), thing.case, copy.deepcopy(thing.payload), target.id, self.step_index)
                self._place(born, target.id)
                self._emit(out, born, target.id, "create")
                self._fire_triggers(out, born, target.id, fired)

    # -- scheduling ------------------------------------------------------

    def occurrences(self) -> list[Occurrence]:
        """Enabled occurrences in a fixed order (queue order within sorted stages)."""
        out = []
        for stage in sorted(self.queues):
            heads: set[str] = set()
            for tid in self.queues[stage]:
                thing = self.things[tid]
                if thing.case in heads:
                    continue
                heads.add(thing.case)
                for path, departs in self.paths_from(stage):
                    if self._admissible(thing, path, departs):
                        out.append(Occurrence(tid, path, departs))
        return out

    def _chosen(self, thing: Thing, graph: BehaviorGraph, event: str) -> str | None:
        wanted = thing.payload.get("choices", {}).get(event) if isinstance(thing.payload.get("choices"), dict) else None
        if wanted in graph.choice_targets(event):
            return wanted
        return graph.default_choice(event)

    def _admissible(self, thing: Thing, path: tuple[str, ...], departs: bool) -> bool:
        case = self._case(thing)
        graph = self._graph(case)
        here = graph.event_of(thing.location)
        dest = None if departs else graph.event_of(path[-1])
        leaving = here is not None and (departs or dest != here)
        entered = []
        for sid in path:
            ev = graph.event_of(sid)
            if ev is not None and ev != here and ev not in entered:
                entered.append(ev)

        if here is not None and not leaving:
            joins = [e for e in graph.in_edges(here) if e.kind is EdgeKind.PARALLEL_JOIN]
            if not joins:
                return True
            enabled, _ = _event_status(graph, case.done, case.choices)
            return here in enabled

        done = set(case.done)
        choices = dict(case.choices)
        if leaving:
            done.add(here)
            choice_targets = graph.choice_targets(here)
            if choice_targets:
                picked = self._chosen(thing, graph, here)
                if any(ev in choice_targets and ev != picked for ev in entered):
                    return False
                choices[here] = picked
            split_targets = [e.target for e in graph.out_edges(here) if e.kind is EdgeKind.PARALLEL_SPLIT]
            if thing.branch is not None and split_targets and thing.branch not in entered:
                return False
        enabled, dead = _event_status(graph, done, choices)
        for ev in entered:
            if ev in done or ev in dead:
                return False
            if ev in enabled or ev in case.resting:
                continue
            if here is not None and any(
                e.source == here and e.kind is EdgeKind.PARALLEL_JOIN for e in graph.in_edges(ev)
            ):
                continue
            return False
        return True

    def step(self) -> list[TraceRecord]:
        """Execute one seeded choice among the enabled occurrences; [] when quiescent."""
        options = self.occurrences()
        if not options:
            return []
        occ = options[self.rng.randrange(len(options))]
        out = self._execute(occ)
        self._absorb_joins()
        self._refresh_cases()
        self.step_index += 1
        return out

    def _execute(self, occ: Occurrence) -> list[TraceRecord]:
        thing = self.things[occ.thing]
        case = self._case(thing)
        graph = self._graph(case)
        origin = thing.location
        here = graph.event_of(origin)
        dest = None if occ.departs else graph.event_of(occ.path[-1])
        out: list[TraceRecord] = []

        queue = self.queues[origin]
        index = queue.index(thing.id)
        queue.pop(index)

        if here is not None and (occ.departs or dest != here):
            case.done.add(here)
            if graph.choice_targets(here):
                case.choices[here] = self._chosen(thing, graph, here)
            splits = [e.target for e in graph.out_edges(here) if e.kind is EdgeKind.PARALLEL_SPLIT]
            if splits and thing.branch is None:
                reachable = {graph.event_of(p[-1]) for p, d in self.paths_from(origin) if not d}
                for offset, other in enumerate(t for t in splits if t != dest and t in reachable):
                    thing.forks += 1
                    twin = Thing(
                        f"{thing.id}.{thing.forks}",
                        thing.case,
                        copy.deepcopy(thing.payload),
                        origin,
                        self.step_index,
                        parent=thing.id,
                        branch=other,
                        family=thing.family,
                    )
                    self._place(twin, origin, index + offset)
            thing.branch = None

        fired: set[str] = set()
        for sid in occ.path:
            kind = self.model.stages[sid].kind
            if kind is StageKind.RECEIVE:
                self._emit(out, thing, sid, "arrive")
                self._emit(out, thing, sid, "accept")
            else:
                self._emit(out, thing, sid, kind.value)
            if kind is StageKind.PROCESS and sid in self.processors:
                self.processors[sid](thing.payload)
            self._fire_triggers(out, thing, sid, fired)

        if occ.departs:
            del self.things[thing.id]
        else:
            self._place(thing, occ.path[-1])
        return out

    def _absorb_joins(self) -> None:
        """Merge fork copies back into their family once a join event is enabled."""
        for case in list(self.controller.in_flight.values()):
            graph = self._graph(case)
            enabled, _ = _event_status(graph, case.done, case.choices)
            families: dict[tuple[str, str], list[Thing]] = {}
            for thing in self.things.values():
                if thing.case != case.id:
                    continue
                ev = graph.event_of(thing.location)
                if ev is None or ev not in enabled:
                    continue
                if not any(e.kind is EdgeKind.PARALLEL_JOIN for e in graph.in_edges(ev)):
                    continue
                families.setdefault((ev, thing.family), []).append(thing)
            for members in families.values():
                if len(members) < 2:
                    continue
                members.sort(key=lambda t: (t.id.count("."), t.id))
                for extra in members[1:]:
                    self.queues[extra.location].remove(extra.id)
                    del self.things[extra.id]

    def _refresh_cases(self) -> None:
        live: dict[str, set[str]] = {}
        for thing in self.things.values():
            case = self.controller.in_flight.get(thing.case)
            if case is None:
                continue
            ev = self._graph(case).event_of(thing.location)
            live.setdefault(thing.case, set())
            if ev is not None:
                live[thing.case].add(ev)
        for cid in list(self.controller.in_flight):
            if cid in live:
                self.controller.in_flight[cid].resting = live[cid]
            else:
                self.controller.close_case(cid)

    # -- invariants --------------------------------------------------------

    def resting_violations(self) -> list[str]:
        """Live things not at an interior post (always empty between steps)."""
        bad = []
        for tid in sorted(self.things):
            stage = self.model.stages[self.things[tid].location]
            if stage.post is not Post.INTERIOR:
                bad.append(tid)
        return bad

    def run(self, max_steps: int, injections: Iterable[Injection] = ()) -> Trace:
        if max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        pending = sorted(injections, key=lambda i: i.step)
        start = len(self.log)
        steps = 0
        status = "quiescent"
        while True:
            while pending and pending[0].step <= self.step_index:
                inj = pending.pop(0)
                self.inject_thing(inj.stage, inj.payload)
            if steps >= max_steps:
                if pending or self.occurrences():
                    status = "budget_exhausted"
                break
            if self.step():
                steps += 1
                continue
            if pending:
                self.step_index = pending[0].step
                continue
            break
        return Trace(self.log[start:], status, steps)


def init_sim(
    model: StaticModel,
    behavior: BehaviorGraph,
    seed: int = 0,
    processors: dict[str, Processor] | None = None,
    config_id: str = "main",
) -> Simulation:
    """A simulation over one behavior graph, registered as configuration ``config_id``."""
    report = validate_static(model)
    if not report.ok:
        raise InvalidModel("; ".join(str(v) for v in report.errors))
    controller = Controller(model)
    controller.register_config(Configuration(config_id, behavior))
    return Simulation(model, controller, seed, processors)


def inject_thing(sim: Simulation, stage: str, payload: dict | None = None) -> str:
    return sim.inject_thing(stage, payload)


def step(sim: Simulation) -> list[TraceRecord]:
    return sim.step()


def run(sim: Simulation, max_steps: int, injections: Iterable[Injection] = ()) -> Trace:
    return sim.run(max_steps, injections)
