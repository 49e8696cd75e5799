"""Command-line entry point.

Exit status: 0 success, 1 the input was read fine but has findings,
2 usage or parse error.  Machine-readable output goes to the path given
by the relevant flag; a human summary goes to standard output.  Set
``TM_COLOR=0`` to keep ANSI color out of summaries.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bpmn import import_bpmn
from .dot import render_dot
from .dsl import parse_model
from .engine import Simulation, load_injections
from .errors import TMError
from .events import BehaviorGraph, build_behavior, validate_behavior
from .model import StaticModel, validate_static
from .ordercase import START_STAGE, build_order_case, order_case_processors, sample_payload
from .reconfig import Configuration, Controller, SwitchPolicy
from .serialize import deserialize_behavior, dumps, load_bundle, model_digest, serialize_json
from .zeno import build_lattice, launch, render_lattice_dot, run_until_settled

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2


def _version() -> str:
    from . import __version__

    return __version__


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would call sys.exit itself
        raise UsageError(f"{self.prog}: error: {message}")


def _color(text: str, code: str) -> str:
    if os.environ.get("TM_COLOR", "1") == "0" or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_model(path: str) -> tuple[StaticModel, BehaviorGraph | None, list[str], bool]:
    """(model, bundled behavior, findings, had syntax errors)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if path.endswith(".json"):
        try:
            model, behavior = load_bundle(text)
        except TMError as exc:
            raise UsageError(f"{path}: {exc.message}") from None
        findings = [str(v) for v in validate_static(model)]
        return model, behavior, findings, False
    model, diags = parse_model(text, path)
    model.name = model.name or Path(path).stem
    return model, None, [str(d) for d in diags], any(d.is_syntax for d in diags)


def cmd_validate(args) -> int:
    model, behavior, findings, syntax = _load_model(args.model)
    if behavior is not None:
        findings += [str(v) for v in validate_behavior(model, behavior)]
    for line in findings:
        print(line)
    n = len(findings)
    if args.report:
        _write(args.report, dumps({"model": args.model, "violations": findings}) + "\n")
    if syntax:
        print(_color(f"{n} violations (parse errors)", "31"))
        return EXIT_USAGE
    print(_color(f"{n} violations", "32" if n == 0 else "33"))
    return EXIT_OK if n == 0 else EXIT_FINDINGS


def cmd_render(args) -> int:
    model, behavior, findings, syntax = _load_model(args.model)
    if syntax:
        for line in findings:
            print(line, file=sys.stderr)
        return EXIT_USAGE
    subject = behavior if (args.behavior_graph and behavior is not None) else model
    text = render_dot(subject)
    _write(args.dot, text)
    if args.dot not in (None, "-"):
        print(f"wrote {args.dot}: {len(model.thimacs)} thimacs, {len(model.flows)} flows, {len(model.triggers)} triggers")
    return EXIT_OK if not findings else EXIT_FINDINGS


def cmd_simulate(args) -> int:
    model, bundled, findings, syntax = _load_model(args.model)
    if syntax or findings:
        for line in findings:
            print(line, file=sys.stderr)
        return EXIT_USAGE if syntax else EXIT_FINDINGS
    try:
        if args.behavior:
            behavior = deserialize_behavior(Path(args.behavior).read_text(encoding="utf-8"), model)
        else:
            behavior = bundled or build_behavior([], [], [])
        injections = load_injections(Path(args.inject).read_text(encoding="utf-8")) if args.inject else []
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    except (TMError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad behavior or injection file: {exc}") from None
    controller = Controller(model)
    try:
        controller.register_config(Configuration(args.config, behavior))
    except TMError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_FINDINGS
    sim = Simulation(model, controller, args.seed)
    try:
        trace = sim.run(args.max_steps, injections)
    except TMError as exc:
        raise UsageError(f"injection failed: {exc.message}") from None
    if args.trace:
        _write(args.trace, trace.to_jsonl())
    print(
        f"simulated {trace.steps} steps, {len(trace)} records, status {trace.status}, "
        f"{len(sim.things)} live things, seed {args.seed}"
    )
    return EXIT_OK


def cmd_import_bpmn(args) -> int:
    try:
        text = Path(args.file).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    try:
        model, behavior, diags = import_bpmn(text)
    except TMError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    for d in diags:
        print(d)
    _write(args.out, serialize_json(model, behavior) + "\n")
    if args.dot:
        _write(args.dot, render_dot(model))
    print(
        f"imported {len(model.thimacs)} thimacs, {len(model.flows)} flows, "
        f"{len(behavior.events)} events, {len(diags)} diagnostics"
    )
    return EXIT_OK


def cmd_reconfig_demo(args) -> int:
    model, e20, e21 = build_order_case()
    before = model_digest(model)
    controller = Controller(model)
    controller.register_config(e20)
    controller.register_config(e21)
    controller.activate("E20")
    sim = Simulation(model, controller, args.seed, order_case_processors())
    sim.inject_thing(START_STAGE, sample_payload())
    sim.run(args.switch_after)
    report = controller.switch("E21", args.policy)
    sim.inject_thing(START_STAGE, sample_payload())
    sim.run(args.max_steps)
    after = model_digest(model)
    records = sim.log
    labels = [r.config for r in records]
    first_e21 = labels.index("E21") if "E21" in labels else len(labels)
    interleaved = "E20" in labels[first_e21:]
    if args.trace:
        _write(args.trace, "".join(r.to_json() + "\n" for r in records))
    if args.report:
        _write(args.report, report.to_json() + "\n")
    print(f"switch {report.source} -> {report.target} policy={report.policy.value}")
    print(f"coexisting={dumps(report.coexisting)} repinned={len(report.repinned)} stranded={report.stranded_count}")
    print(f"records={len(records)} interleaved={'yes' if interleaved else 'no'}")
    same = before == after
    print(_color(f"static model unchanged: {'yes' if same else 'NO'} ({after[:12]})", "32" if same else "31"))
    return EXIT_OK if same else EXIT_FINDINGS


def cmd_zeno(args) -> int:
    try:
        lattice = build_lattice(args.nodes)
        trace = run_until_settled(launch(lattice, args.energy))
    except (TMError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.trace:
        _write(args.trace, trace.to_jsonl())
    if args.dot:
        _write(args.dot, render_lattice_dot(lattice, trace.settle_node))
    for r in trace.records[:-1]:
        print(f"{r.action} node={r.node} energy={r.energy_after}")
    print(f"settle node={trace.settle_node} residual={trace.residual}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tm", description="Thinging-machine model workbench")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("validate", help="check a .tm or .json model")
    v.add_argument("model")
    v.add_argument("--report", help="write the findings as JSON")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="emit a Graphviz DOT diagram")
    r.add_argument("model")
    r.add_argument("--dot", help="output path (default: stdout)")
    r.add_argument("--behavior-graph", action="store_true", help="render the bundled behavior graph instead")
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("simulate", help="run the token simulation")
    s.add_argument("model")
    s.add_argument("--behavior", help="behavior graph JSON (or a model bundle carrying one)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--inject", help="injection script JSON")
    s.add_argument("--trace", help="write the trace as JSON Lines")
    s.add_argument("--max-steps", type=int, default=10_000)
    s.add_argument("--config", default="main", help="configuration id recorded in the trace")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("import-bpmn", help="map BPMN XML to a model + behavior bundle")
    b.add_argument("file")
    b.add_argument("--out", help="bundle JSON path (default: stdout)")
    b.add_argument("--dot", help="also write the static model as DOT")
    b.set_defaults(func=cmd_import_bpmn)

    c = sub.add_parser("reconfig-demo", help="switch the order case from E20 to E21 mid-flight")
    c.add_argument("--policy", choices=[p.value for p in SwitchPolicy], default="drain")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--switch-after", type=int, default=12, help="steps of the first case before switching")
    c.add_argument("--max-steps", type=int, default=10_000)
    c.add_argument("--trace")
    c.add_argument("--report")
    c.set_defaults(func=cmd_reconfig_demo)

    z = sub.add_parser("zeno", help="shoot an arrow through a space lattice")
    z.add_argument("--nodes", type=int, required=True)
    z.add_argument("--energy", type=int, required=True)
    z.add_argument("--trace")
    z.add_argument("--dot")
    z.set_defaults(func=cmd_zeno)
    return p


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_cli())
