"""Exact time units.

Every time quantity is an integer number of femtoseconds. Documents carry
nanoseconds (chords, taps) or picoseconds (slew); conversion is exact and
refuses values that would need sub-femtosecond precision.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

FS_PER_PS = 1_000
FS_PER_NS = 1_000_000

_PS_QUANTUM = Decimal("0.001")


def _to_fs(value: Decimal | int | str, scale: int) -> int:
    amount = Decimal(value) * scale
    if amount != amount.to_integral_value():
        raise ValueError(f"{value} needs sub-femtosecond precision")
    return int(amount)


def ns_to_fs(value: Decimal | int | str) -> int:
    return _to_fs(value, FS_PER_NS)


def ps_to_fs(value: Decimal | int | str) -> int:
    return _to_fs(value, FS_PER_PS)


def _plain(value: Decimal) -> Decimal:
    # normalize() alone turns 6180 into 6.18E+3
    if value == value.to_integral_value():
        return value.quantize(Decimal(1))
    return value.normalize()


def fs_to_ns(fs: int) -> Decimal:
    return _plain(Decimal(fs).scaleb(-6))


def fs_to_ps(fs: int) -> Decimal:
    return _plain(Decimal(fs).scaleb(-3))


def ns_number(fs: int) -> float | int:
    """JSON-friendly ns value; float repr is shortest round-trip, so it re-reads exactly."""
    value = fs_to_ns(fs)
    if value == value.to_integral_value():
        return int(value)
    return float(value)


def ps_number(fs: int) -> float | int:
    value = fs_to_ps(fs)
    if value == value.to_integral_value():
        return int(value)
    return float(value)


def round_fs(value: Fraction | int) -> int:
    # Fraction.__round__ rounds half to even.
    return round(Fraction(value))


def render_ps(value: Fraction | int) -> str:
    """Presentation-only picosecond rendering, half-even to the femtosecond."""
    ps = Decimal(round_fs(value)).scaleb(-3).quantize(_PS_QUANTUM, rounding=ROUND_HALF_EVEN)
    return f"{ps} ps"


def rational_document(value: Fraction | int) -> dict[str, int]:
    exact = Fraction(value)
    return {
        "num_fs": exact.numerator,
        "den": exact.denominator,
        "fs": round_fs(exact),
    }
