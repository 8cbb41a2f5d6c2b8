"""Exact rational scalars.

All arithmetic in the package runs over :class:`fractions.Fraction`, which
keeps values reduced with a positive denominator and never overflows. This
module adds the canonical ``p/q`` text form used in every report, plus a
few helpers with the error behaviour the rest of the package relies on.
"""

from __future__ import annotations

import re
from fractions import Fraction

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class DivisionByZero(ZeroDivisionError):
    pass


def Q(value, den=1) -> Fraction:
    """Coerce ``value`` (int, Fraction or ``p/q`` string) to a Fraction."""
    if isinstance(value, str):
        return parse(value)
    if den == 1:
        return Fraction(value)
    return Fraction(value, den)


def add(a: Fraction, b: Fraction) -> Fraction:
    return a + b


def sub(a: Fraction, b: Fraction) -> Fraction:
    return a - b


def mul(a: Fraction, b: Fraction) -> Fraction:
    return a * b


def neg(a: Fraction) -> Fraction:
    return -a


def div(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise DivisionByZero(f"division of {render(Fraction(a))} by zero")
    return Fraction(a) / b


def is_zero(a: Fraction) -> bool:
    return a == 0


def compare(a: Fraction, b: Fraction) -> int:
    """Three-way comparison: -1, 0 or 1."""
    return (a > b) - (a < b)


def render(x: Fraction) -> str:
    """Canonical text form: ``"3"``, ``"-5/2"``; denominator omitted when 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


_RAT_RE = re.compile(r"^([-−]?)(\d+)(?:/(\d+))?$")


def parse(text: str) -> Fraction:
    """Inverse of :func:`render`. Accepts ASCII ``-`` or U+2212 as the sign."""
    m = _RAT_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    sign, num, den = m.groups()
    den_i = int(den) if den is not None else 1
    if den_i == 0:
        raise DivisionByZero(f"zero denominator in {text!r}")
    value = Fraction(int(num), den_i)
    return -value if sign else value
