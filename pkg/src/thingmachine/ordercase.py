"""The product-order handling case and its two billing/shipping configurations.

``E20`` is the imported behavior: billing and shipping are activated
together after the parallel split.  ``E21`` keeps every event and edge of
``E20`` and adds one control-imposed sequence edge, Billing -> Shipping,
so billing always finishes first.  Both share one static model.
"""

from __future__ import annotations

from importlib import resources

from .bpmn import import_bpmn
from .events import EdgeKind, OrderingEdge
from .model import StaticModel
from .money import billing_total
from .reconfig import Configuration

BILLING = "Billing"
SHIPPING = "Shipping"
START_STAGE = "OrderReceived.create"


def read_data(name: str) -> str:
    return resources.files("thingmachine.data").joinpath(name).read_text(encoding="utf-8")


def order_case_bpmn() -> str:
    return read_data("order_case.bpmn")


def order_case_tm() -> str:
    return read_data("order_case.tm")


def build_order_case() -> tuple[StaticModel, Configuration, Configuration]:
    model, behavior, _ = import_bpmn(order_case_bpmn())
    e20 = Configuration("E20", behavior, "billing and shipping simultaneously activated")
    e21_graph = behavior.with_edges(list(behavior.edges) + [OrderingEdge(BILLING, SHIPPING, EdgeKind.SEQUENCE)])
    e21 = Configuration("E21", e21_graph, "billing occurs before shipping and bookkeeping")
    return model, e20, e21


def compute_bill(payload: dict) -> None:
    """Processor for Billing.process: items plus shipping into ``payload['total']``."""
    if "items" in payload:
        payload["total"] = billing_total(payload["items"], payload.get("shipping", 0))


def order_case_processors() -> dict:
    return {f"{BILLING}.process": compute_bill}


def sample_payload() -> dict:
    return {"items": [30, 20], "shipping": 10}
