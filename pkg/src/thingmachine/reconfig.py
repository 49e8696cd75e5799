"""Event-level reconfiguration.

Several behavior graphs (configurations) share one static model.  A
:class:`Controller` decides which one new cases start under; each case is
pinned to the configuration that was active when its root thing was
injected, which is what lets old and new configurations run side by side.
Nothing here ever writes to the static model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import DuplicateConfig, ReconfigError, RegionForeign, UnknownConfig
from .events import BehaviorGraph, validate_behavior
from .model import StaticModel
from .serialize import dumps


@dataclass(frozen=True)
class Configuration:
    id: str
    behavior: BehaviorGraph
    description: str = ""


@dataclass
class Case:
    """One end-to-end process instance and its progress through the events."""

    id: str
    config: str
    done: set[str] = field(default_factory=set)
    choices: dict[str, str] = field(default_factory=dict)
    resting: set[str] = field(default_factory=set)


class SwitchPolicy(str, Enum):
    DRAIN_OLD = "drain"
    IMMEDIATE = "immediate"


@dataclass
class SwitchReport:
    policy: SwitchPolicy
    source: str | None
    target: str
    coexisting: dict[str, int]
    repinned: list[str] = field(default_factory=list)
    stranded: list[str] = field(default_factory=list)

    @property
    def stranded_count(self) -> int:
        return len(self.stranded)

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.value,
            "from": self.source,
            "to": self.target,
            "coexisting": dict(self.coexisting),
            "repinned": sorted(self.repinned),
            "stranded": sorted(self.stranded),
            "stranded_count": self.stranded_count,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


class Controller:
    def __init__(self, model: StaticModel) -> None:
        self.model = model
        self.configs: dict[str, Configuration] = {}
        self.active: str | None = None
        self.in_flight: dict[str, Case] = {}

    def register_config(self, config: Configuration) -> None:
        if config.id in self.configs:
            raise DuplicateConfig(f"configuration {config.id!r} is already registered")
        report = validate_behavior(self.model, config.behavior)
        if not report.ok:
            raise RegionForeign("; ".join(str(v) for v in report.errors))
        self.configs[config.id] = config
        if self.active is None:
            self.active = config.id

    def activate(self, config_id: str) -> None:
        if config_id not in self.configs:
            raise UnknownConfig(f"no configuration {config_id!r}")
        self.active = config_id

    def behavior(self, config_id: str) -> BehaviorGraph:
        return self.configs[config_id].behavior

    def open_case(self, case_id: str) -> Case:
        if self.active is None:
            raise ReconfigError("no configuration is active")
        case = Case(case_id, self.active)
        self.in_flight[case_id] = case
        return case

    def close_case(self, case_id: str) -> None:
        self.in_flight.pop(case_id, None)

    def coexisting(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for case in self.in_flight.values():
            counts[case.config] = counts.get(case.config, 0) + 1
        return dict(sorted(counts.items()))

    def switch(self, target: str, policy: SwitchPolicy | str = SwitchPolicy.DRAIN_OLD) -> SwitchReport:
        """Make ``target`` active.

        DRAIN_OLD leaves in-flight cases on their pinned configuration.
        IMMEDIATE repins every in-flight case whose resting events all exist
        in the target graph; the rest stay pinned and are reported stranded.
        """
        policy = SwitchPolicy(policy)
        if target not in self.configs:
            raise UnknownConfig(f"no configuration {target!r}")
        source = self.active
        self.active = target
        repinned, stranded = [], []
        if policy is SwitchPolicy.IMMEDIATE:
            target_events = self.configs[target].behavior.events
            for cid in sorted(self.in_flight):
                case = self.in_flight[cid]
                if case.config == target:
                    continue
                if case.resting <= target_events.keys():
                    case.config = target
                    case.done &= target_events.keys()
                    case.choices = {k: v for k, v in case.choices.items() if k in target_events}
                    repinned.append(cid)
                else:
                    stranded.append(cid)
        coexisting = self.coexisting()
        coexisting.setdefault(target, 0)
        return SwitchReport(policy, source, target, dict(sorted(coexisting.items())), repinned, stranded)
