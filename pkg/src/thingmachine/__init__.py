"""Thinging-machine modeling: static structure, behavior, simulation."""

from .bpmn import import_bpmn, map_bpmn, parse_bpmn
from .dot import render_dot
from .dsl import parse_model, print_model
from .engine import Simulation, Trace, TraceRecord, init_sim, inject_thing, run, step
from .errors import TMError
from .events import BehaviorGraph, EdgeKind, Event, OrderingEdge, build_behavior, define_event, validate_behavior
from .model import Port, Post, StageKind, StaticModel, extract_region, validate_static
from .reconfig import Configuration, Controller, SwitchPolicy, SwitchReport
from .serialize import deserialize_json, serialize_json
from .zeno import arrow_step, build_lattice, launch, run_until_settled

__version__ = "0.1.0"

__all__ = [
    "BehaviorGraph", "Configuration", "Controller", "EdgeKind", "Event", "OrderingEdge", "Port", "Post",
    "Simulation", "StageKind", "StaticModel", "SwitchPolicy", "SwitchReport", "TMError", "Trace",
    "TraceRecord", "arrow_step", "build_behavior", "build_lattice", "define_event", "deserialize_json",
    "extract_region", "import_bpmn", "init_sim", "inject_thing", "launch", "map_bpmn", "parse_bpmn",
    "parse_model", "print_model", "render_dot", "run", "run_until_settled", "serialize_json", "step",
    "validate_behavior", "validate_static",
]
