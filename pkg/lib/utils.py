"""
Utility Functions

Exact-rational helpers shared across the project: parsing, formatting,
float rendering with a declared precision, and canonical hashing.
"""

import hashlib
import json
from fractions import Fraction
from typing import Any, Iterable, Union

from .errors import InputError

Number = Union[int, Fraction]

FLOAT_DIGITS = 12


def to_fraction(value: Any) -> Fraction:
    """
    Convert a user-supplied value to an exact rational.

    Accepts ints, Fractions and strings of the form "p", "p/q" or a decimal
    literal such as "0.25". Floats are rejected unless they are integral,
    since their binary expansion is rarely what the user meant.

    Args:
        value: The value to convert

    Returns:
        The exact rational value

    Raises:
        InputError: If the value cannot be read as a rational
    """
    if isinstance(value, bool):
        raise InputError(f"Not a rational number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value.is_integer():
            return Fraction(int(value))
        raise InputError(f"Refusing inexact float {value!r}; write it as a string such as \"p/q\"")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"Not a rational number: {value!r}")
    raise InputError(f"Not a rational number: {value!r}")


def format_rational(value: Number) -> str:
    """Render an exact rational as "p" or "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def render_float(value: Number, digits: int = FLOAT_DIGITS) -> float:
    """Round a rational to `digits` significant digits for display columns."""
    return float(f"{float(value):.{digits}g}")


def canonical_hash(payload: Any) -> str:
    """
    Hash a JSON-serialisable payload independently of key order.

    Args:
        payload: Any JSON-serialisable structure

    Returns:
        Hex-encoded SHA-256 digest
    """
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sorted_ids(ids: Iterable[int]) -> tuple:
    """Canonical (sorted, de-duplicated) tuple of node ids."""
    return tuple(sorted(set(ids)))
