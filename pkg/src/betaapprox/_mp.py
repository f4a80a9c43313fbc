"""Thin helpers around gmpy2 working precision and decimal rendering."""

import math

import gmpy2
from gmpy2 import mpfr


def workprec(bits: int):
    """Context manager setting the thread-local MPFR precision to ``bits``."""
    return gmpy2.context(gmpy2.get_context(), precision=int(bits))


def decimal_digits(bits: int) -> int:
    return int(math.ceil(bits * math.log10(2))) + 1


def to_decimal(value, bits: int) -> str:
    """Render an mpfr with enough significant digits for ``bits`` of precision."""
    return format(mpfr(value, bits), f".{decimal_digits(bits)}g")


def to_mpfr(value, bits: int) -> mpfr:
    """Convert str/int/float/Fraction/mpfr to an mpfr of the given precision.

    Floats convert exactly; decimal strings round once at ``bits``.
    """
    if isinstance(value, str):
        value = value.strip()
    try:
        return mpfr(value, int(bits))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"not a real number: {value!r}") from exc
