from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thingmachine.dsl import parse_model
from thingmachine.errors import DuplicateEvent, EmptyRegion, UnknownEndpoint, UnknownStage, UnreachableEvent
from thingmachine.events import EdgeKind, OrderingEdge, build_behavior, define_event, reachable, validate_behavior

SEQ = EdgeKind.SEQUENCE

TEXT = """
thimac Credit { transfer; receive; process; release;
    flow transfer.in -> receive; flow receive -> process; flow process -> release; flow release -> transfer.out; }
thimac Billing { transfer in; receive; process; flow transfer -> receive; flow receive -> process; }
thimac Shipping { transfer in; receive; process; flow transfer -> receive; flow receive -> process; }
flow Credit.transfer.out -> Billing.transfer.in;
flow Credit.transfer.out -> Shipping.transfer.in;
"""


@pytest.fixture
def model():
    m, diags = parse_model(TEXT)
    assert diags == []
    return m


def events_for(model, *names):
    return [define_event(model, n, model.thimacs[n].stages) for n in names]


class TestDefineEvent:
    def test_thimac_region(self, model):
        ev = define_event(model, "E_bill", model.thimacs["Billing"].stages)
        assert ev.region.stages == set(model.thimacs["Billing"].stages)
        assert len(ev.region.flows) == 2

    def test_whole_model(self, model):
        ev = define_event(model, "E_all", model.stages)
        assert len(ev.region.flows) == len(model.flows)

    def test_empty_region(self, model):
        with pytest.raises(EmptyRegion):
            define_event(model, "E1", [])

    def test_unknown_stage(self, model):
        with pytest.raises(UnknownStage):
            define_event(model, "E1", ["Ghost.create"])


class TestBuildBehavior:
    def test_chain(self, model):
        g = build_behavior(
            events_for(model, "Credit", "Billing", "Shipping"),
            [OrderingEdge("Credit", "Billing", SEQ), OrderingEdge("Billing", "Shipping", SEQ)],
            ["Credit"],
        )
        assert g.successors("Credit") == ["Billing"]
        assert g.event_of("Billing.process") == "Billing"

    def test_parallel_block(self, model):
        g = build_behavior(
            events_for(model, "Credit", "Billing", "Shipping"),
            [OrderingEdge("Credit", "Billing", EdgeKind.PARALLEL_SPLIT),
             OrderingEdge("Credit", "Shipping", EdgeKind.PARALLEL_SPLIT)],
            ["Credit"],
        )
        assert sorted(g.successors("Credit")) == ["Billing", "Shipping"]

    def test_unknown_endpoint(self, model):
        with pytest.raises(UnknownEndpoint):
            build_behavior(events_for(model, "Credit"), [OrderingEdge("Credit", "E9", SEQ)], ["Credit"])

    def test_unreachable(self, model):
        with pytest.raises(UnreachableEvent):
            build_behavior(events_for(model, "Credit", "Billing"), [], ["Credit"])

    def test_duplicate_event(self, model):
        with pytest.raises(DuplicateEvent):
            build_behavior(events_for(model, "Credit", "Credit"), [], ["Credit"])

    def test_default_must_be_a_choice_edge(self, model):
        with pytest.raises(UnknownEndpoint):
            build_behavior(
                events_for(model, "Credit", "Billing"),
                [OrderingEdge("Credit", "Billing", SEQ)],
                ["Credit"],
                defaults={"Credit": "Billing"},
            )

    def test_edge_order_is_canonical(self, model):
        edges = [OrderingEdge("Credit", "Shipping", SEQ), OrderingEdge("Credit", "Billing", SEQ)]
        a = build_behavior(events_for(model, "Credit", "Billing", "Shipping"), edges, ["Credit"])
        b = build_behavior(events_for(model, "Credit", "Billing", "Shipping"), edges[::-1], ["Credit"])
        assert a == b


class TestValidateBehavior:
    def test_order_case_clean(self, order_case):
        model, e20, _ = order_case
        assert len(validate_behavior(model, e20.behavior)) == 0

    def test_region_foreign(self, model):
        other, _ = parse_model("thimac Elsewhere { create; process; flow create -> process; }")
        g = build_behavior([define_event(other, "X", other.stages)], [], ["X"])
        assert validate_behavior(model, g).codes() == ["RegionForeign"]

    def test_control_imposed_is_a_warning(self, model):
        g = build_behavior(
            events_for(model, "Credit", "Billing", "Shipping"),
            [OrderingEdge("Credit", "Billing", SEQ), OrderingEdge("Billing", "Shipping", SEQ)],
            ["Credit"],
        )
        report = validate_behavior(model, g)
        assert report.codes() == ["ControlImposed"]
        assert report.ok and report.warnings[0].ref == "Billing->Shipping"

    def test_flow_backed_sequence_is_not_flagged(self, model):
        g = build_behavior(events_for(model, "Credit", "Billing"), [OrderingEdge("Credit", "Billing", SEQ)], ["Credit"])
        assert len(validate_behavior(model, g)) == 0

    def test_region_containment_on_order_case(self, order_case):
        model, e20, e21 = order_case
        for graph in (e20.behavior, e21.behavior):
            for ev in graph.events.values():
                assert ev.region.stages <= model.stages.keys()


class TestOrderCaseConfigurations:
    def test_same_event_sets(self, order_case):
        _, e20, e21 = order_case
        assert e20.behavior.events == e21.behavior.events
        assert len(e20.behavior.events) == 12

    def test_difference_is_the_imposed_sequence(self, order_case):
        model, e20, e21 = order_case
        extra = set(e21.behavior.edges) - set(e20.behavior.edges)
        assert extra == {OrderingEdge("Billing", "Shipping", SEQ)}
        assert set(e20.behavior.edges) <= set(e21.behavior.edges)
        assert validate_behavior(model, e21.behavior).codes() == ["ControlImposed"]
        assert validate_behavior(model, e21.behavior).ok


def brute_force_reachable(nodes, edges, initial):
    """Every node on some simple path starting at an initial node."""
    adj = {(e.source, e.target) for e in edges}
    found = set(initial)
    for length in range(2, len(nodes) + 1):
        for path in itertools.permutations(nodes, length):
            if path[0] in initial and all((a, b) in adj for a, b in zip(path, path[1:])):
                found.add(path[-1])
    return found


@given(
    st.integers(1, 6).flatmap(
        lambda n: st.tuples(
            st.just([f"E{i}" for i in range(n)]),
            st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10),
            st.sets(st.integers(0, n - 1), max_size=2),
        )
    )
)
@settings(max_examples=150, deadline=None)
def test_reachability_matches_path_enumeration(case):
    nodes, pairs, init = case
    edges = [OrderingEdge(nodes[a], nodes[b], SEQ) for a, b in pairs]
    initial = {nodes[i] for i in init}
    assert reachable(nodes, edges, initial) == brute_force_reachable(nodes, edges, initial)
