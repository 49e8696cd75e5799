"""Exact two-decimal money arithmetic."""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from typing import Iterable, Union

from .errors import InvalidAmount, NegativeAmount

Money = Decimal
Amount = Union[Decimal, int, float, str]

CENT = Decimal("0.01")


def to_money(value: Amount) -> Decimal:
    """Convert to a Decimal with at most two fractional digits.

    Floats go through ``str`` so ``2.5`` becomes ``Decimal('2.5')``, not its
    binary expansion.  More than two fractional digits is rejected rather
    than rounded.
    """
    if isinstance(value, bool):
        raise InvalidAmount(f"{value!r} is not an amount")
    try:
        d = Decimal(str(value)) if isinstance(value, float) else Decimal(value)
    except (InvalidOperation, TypeError, ValueError):
        raise InvalidAmount(f"{value!r} is not an amount") from None
    if not d.is_finite():
        raise InvalidAmount(f"{value!r} is not finite")
    if d.quantize(CENT) != d:
        raise InvalidAmount(f"{value!r} has more than two fractional digits")
    if d < 0:
        raise NegativeAmount(f"{value!r} is negative")
    return d


def billing_total(item_costs: Iterable[Amount], shipping_costs: Amount) -> Decimal:
    """Total cost of the ordered items plus shipping."""
    total = sum((to_money(c) for c in item_costs), Decimal(0)) + to_money(shipping_costs)
    return total.quantize(CENT)
