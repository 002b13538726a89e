"""
Utility: Exact-when-possible number handling for index arithmetic.
Rational inputs are compared exactly with fractions.Fraction; anything else
falls back to floats with a guard band around equality.
"""
import math
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction]

GUARD = 1e-12
_MAX_DENOMINATOR = 10 ** 6


def as_exact(value: Number) -> Number:
    """
    Return a Fraction when `value` is (the float image of) a small rational, else a float.
    1/3 typed as 0.333... comes back as Fraction(1, 3); log(4)/log(3) stays a float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {value!r}")
    candidate = Fraction(x).limit_denominator(_MAX_DENOMINATOR)
    if abs(float(candidate) - x) <= 1e-15 * max(1.0, abs(x)):
        return candidate
    return x


def is_exact(value: Number) -> bool:
    return isinstance(value, Fraction)


def compare(a: Number, b: Number, guard: float = GUARD) -> int:
    """Three-way comparison; inexact operands within `guard` compare equal."""
    if is_exact(a) and is_exact(b):
        return (a > b) - (a < b)
    diff = float(a) - float(b)
    if abs(diff) <= guard:
        return 0
    return 1 if diff > 0 else -1


def floor_exact(value: Number, guard: float = GUARD) -> int:
    """Floor that snaps inexact values lying within `guard` of an integer onto it."""
    if is_exact(value):
        return math.floor(value)
    nearest = round(float(value))
    if abs(float(value) - nearest) <= guard:
        return int(nearest)
    return math.floor(float(value))


def ceil_exact(value: Number, guard: float = GUARD) -> int:
    if is_exact(value):
        return math.ceil(value)
    nearest = round(float(value))
    if abs(float(value) - nearest) <= guard:
        return int(nearest)
    return math.ceil(float(value))


def is_integer(value: Number, guard: float = GUARD) -> bool:
    if is_exact(value):
        return value.denominator == 1
    return abs(float(value) - round(float(value))) <= guard


def to_float(value: Number) -> float:
    return float(value)
