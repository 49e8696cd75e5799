"""Canonical JSON for static models and behavior graphs.

Canonical means: sorted keys, sorted thimac/stage/edge lists, compact
separators.  Two structurally equal models always serialize to the same
bytes, so a digest of the text is a model fingerprint.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import SchemaVersionMismatch, SerializationError
from .events import BehaviorGraph, EdgeKind, Event, OrderingEdge, build_behavior, define_event
from .model import FlowEdge, Port, Stage, StageKind, StaticModel, Thimac, TriggerEdge, stage_id

SCHEMA_VERSION = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def model_to_dict(model: StaticModel) -> dict[str, Any]:
    thimacs = []
    for tid in sorted(model.thimacs):
        t = model.thimacs[tid]
        stages = []
        for sid in sorted(t.stages):
            s = model.stages.get(sid)
            if s is None:
                stages.append({"id": sid})
                continue
            entry = {"id": s.id, "kind": s.kind.value}
            if s.port is not None:
                entry["port"] = s.port.value
            stages.append(entry)
        thimacs.append({"id": t.id, "name": t.name, "parent": t.parent, "stages": stages})
    data: dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "thimacs": thimacs,
        "flows": [{"from": f.source, "to": f.target} for f in sorted(model.flows.values(), key=lambda f: f.id)],
        "triggers": [
            {"from": t.source, "to": t.target} for t in sorted(model.triggers.values(), key=lambda t: t.id)
        ],
    }
    if model.name:
        data["name"] = model.name
    return data


def behavior_to_dict(graph: BehaviorGraph) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "events": [
            {"id": ev.id, "description": ev.description, "stages": sorted(ev.region.stages)}
            for ev in (graph.events[k] for k in sorted(graph.events))
        ],
        "edges": [{"from": e.source, "to": e.target, "kind": e.kind.value} for e in graph.edges],
        "initial": list(graph.initial),
        "defaults": dict(graph.defaults),
    }


def serialize_json(model: StaticModel, behavior: BehaviorGraph | None = None) -> str:
    data = model_to_dict(model)
    if behavior is not None:
        data["behavior"] = behavior_to_dict(behavior)
    return dumps(data)


def serialize_behavior(graph: BehaviorGraph) -> str:
    return dumps(behavior_to_dict(graph))


def model_digest(model: StaticModel) -> str:
    return hashlib.sha256(serialize_json(model).encode("utf-8")).hexdigest()


def _load(text: str | bytes | dict) -> dict[str, Any]:
    if isinstance(text, dict):
        data = text
    else:
        try:
            data = json.loads(text)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise SerializationError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SerializationError("top-level JSON value must be an object")
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"expected version {SCHEMA_VERSION}, got {version!r}")
    return data


def model_from_dict(data: dict[str, Any]) -> StaticModel:
    """Rebuild a model without legality checks; run validate_static afterwards."""
    data = _load(data)
    model = StaticModel(data.get("name", ""))
    try:
        for t in data["thimacs"]:
            thimac = Thimac(t["id"], t["name"], t.get("parent"))
            for s in t["stages"]:
                if "kind" not in s:
                    thimac.stages.append(s["id"])
                    continue
                kind = StageKind(s["kind"])
                port = Port(s["port"]) if s.get("port") else None
                sid = s["id"]
                portless = kind is StageKind.TRANSFER and port is None
                if not portless and sid != stage_id(thimac.id, kind, port):
                    raise SerializationError(f"stage id {sid!r} does not match its thimac and kind")
                model.stages[sid] = Stage(sid, thimac.id, kind, port)
                thimac.stages.append(sid)
            model.thimacs[thimac.id] = thimac
        for f in data["flows"]:
            edge = FlowEdge(f["from"], f["to"])
            model.flows[edge.id] = edge
        for t in data["triggers"]:
            edge = TriggerEdge(t["from"], t["to"])
            model.triggers[edge.id] = edge
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SerializationError):
            raise
        raise SerializationError(f"model JSON does not match the schema: {exc!r}") from None
    return model


def deserialize_json(text: str | bytes) -> StaticModel:
    return model_from_dict(_load(text))


def behavior_from_dict(data: dict[str, Any], model: StaticModel) -> BehaviorGraph:
    data = _load(data)
    try:
        events: list[Event] = [
            define_event(model, e["id"], e["stages"], e.get("description", "")) for e in data["events"]
        ]
        edges = [OrderingEdge(e["from"], e["to"], EdgeKind(e.get("kind", "sequence"))) for e in data["edges"]]
        initial = list(data["initial"])
        defaults = dict(data.get("defaults", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"behavior JSON does not match the schema: {exc!r}") from None
    return build_behavior(events, edges, initial, defaults)


def deserialize_behavior(text: str | bytes, model: StaticModel) -> BehaviorGraph:
    """Accepts either a bare behavior document or a model bundle carrying one."""
    data = _load(text)
    if "behavior" in data:
        data = data["behavior"]
    return behavior_from_dict(data, model)


def load_bundle(text: str | bytes) -> tuple[StaticModel, BehaviorGraph | None]:
    data = _load(text)
    model = model_from_dict(data)
    behavior = behavior_from_dict(data["behavior"], model) if "behavior" in data else None
    return model, behavior
