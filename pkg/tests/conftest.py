from __future__ import annotations

from pathlib import Path

import pytest

from thingmachine.ordercase import build_order_case

CORPUS = sorted((Path(__file__).parent / "fixtures" / "corpus").glob("*.tm"))

CRITERIA = {
    1: "flow legality exhaustiveness (50 combinations, 9 legal)",
    2: "static model unchanged under reconfiguration",
    3: "E21 billing-before-shipping, E20 both orders",
    4: "DrainOld coexistence with interleaved configs",
    5: "zeno closed form over 544 runs",
    6: "byte-identical traces across repeated runs",
    7: "DSL round-trip fixpoint on corpus",
    8: "BPMN import isomorphic to DSL fixture",
    9: "billing_total matches naive decimal oracle",
}
_outcomes: dict[int, str] = {}


@pytest.fixture
def order_case():
    return build_order_case()


@pytest.fixture(params=CORPUS, ids=lambda p: p.stem)
def corpus_file(request) -> Path:
    return request.param


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    if report.when == "call" or report.failed:
        previous = _outcomes.get(number, "PASS")
        _outcomes[number] = "FAIL" if report.failed or previous == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        outcome = _outcomes.get(number, "NOT RUN")
        terminalreporter.write_line(f"criterion {number}: {outcome} - {title}")
