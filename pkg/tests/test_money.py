from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thingmachine.errors import InvalidAmount, NegativeAmount
from thingmachine.money import billing_total, to_money


@pytest.mark.parametrize(
    "items, shipping, expected",
    [([30, 20], 10, "60"), ([], 0, "0"), ([5], 2.5, "7.5"), (["0.10", "0.20"], "0.30", "0.60")],
)
def test_examples(items, shipping, expected):
    assert billing_total(items, shipping) == Decimal(expected)


def test_result_has_two_places():
    assert str(billing_total([0.1, 0.2], 0)) == "0.30"


def test_float_input_has_no_binary_drift():
    assert billing_total([0.1] * 10, 0.7) == Decimal("1.70")


@pytest.mark.parametrize("bad", [-1, "-0.01", Decimal("-5")])
def test_negative(bad):
    with pytest.raises(NegativeAmount):
        billing_total([bad], 0)
    with pytest.raises(NegativeAmount):
        billing_total([], bad)


@pytest.mark.parametrize("bad", ["abc", "1.001", float("nan"), float("inf"), True, None])
def test_not_an_amount(bad):
    with pytest.raises(InvalidAmount):
        to_money(bad)


cents = st.integers(0, 10**9).map(lambda c: Decimal(c) / 100)


@given(st.lists(cents, max_size=30), cents)
@settings(max_examples=300)
def test_total_equals_integer_cent_sum(items, shipping):
    expected_cents = sum(int(x * 100) for x in items) + int(shipping * 100)
    assert billing_total(items, shipping) * 100 == expected_cents


@given(st.lists(cents, max_size=10), cents)
def test_order_independent(items, shipping):
    assert billing_total(items, shipping) == billing_total(list(reversed(items)), shipping)
