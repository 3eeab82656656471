"""Fixed-point decimal helpers.

All times, durations and fluent values in the package are decimals
quantized to three fractional digits (0.001 granularity), which keeps
plan validation free of float drift.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation

#: Quantum shared by every timestamp/duration in the system.
Q3 = Decimal("0.001")

#: Minimal separation between interfering events at distinct times.
EPSILON = Decimal("0.001")


def q3(value) -> Decimal:
    """Coerce *value* (str, int, float, Decimal) to a 3-digit fixed-point Decimal."""
    if isinstance(value, Decimal):
        d = value
    elif isinstance(value, float):
        d = Decimal(repr(value))
    else:
        d = Decimal(str(value))
    return d.quantize(Q3)


def parse_decimal(text: str) -> Decimal:
    """Parse a decimal literal, raising ValueError on malformed input."""
    try:
        return q3(Decimal(text))
    except InvalidOperation as exc:
        raise ValueError(f"malformed number: {text!r}") from exc


def fmt(value: Decimal) -> str:
    """Render a fixed-point decimal with trailing zeros trimmed but at
    least one fractional digit: 62.000 -> "62.0", 10.001 -> "10.001"."""
    value = q3(value)
    text = format(value, "f")
    if "." not in text:
        return text + ".0"
    text = text.rstrip("0")
    if text.endswith("."):
        text += "0"
    return text
