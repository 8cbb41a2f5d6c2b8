from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from idd import scalars
from idd.scalars import DivisionByZero, Q, parse, render

rationals = st.fractions(max_denominator=10**6).filter(lambda x: abs(x.numerator) < 10**12)


@pytest.mark.parametrize("value, text", [
    (Fraction(3), "3"), (Fraction(-5, 2), "-5/2"), (Fraction(0), "0"), (Fraction(6, 4), "3/2"),
    (Fraction(1, 720), "1/720"),
])
def test_render_canonical(value, text):
    assert render(value) == text


def test_parse_accepts_unicode_minus():
    assert parse("−7/3") == Fraction(-7, 3)


@pytest.mark.parametrize("bad", ["", "1/", "a", "1.5", "--2", "3/-4"])
def test_parse_rejects_garbage(bad):
    with pytest.raises(ValueError):
        parse(bad)


def test_zero_denominator():
    with pytest.raises(DivisionByZero):
        parse("1/0")
    with pytest.raises(DivisionByZero):
        scalars.div(Fraction(1), Fraction(0))


def test_Q_coercions():
    assert Q(3, 6) == Fraction(1, 2)
    assert Q("4/8") == Fraction(1, 2)
    assert Q(Fraction(2, 3)) == Fraction(2, 3)


@given(rationals)
def test_render_parse_round_trip(x):
    assert parse(render(x)) == x


@given(rationals, rationals, rationals)
def test_field_axioms(a, b, c):
    add, mul = scalars.add, scalars.mul
    assert add(a, b) == add(b, a)
    assert mul(a, b) == mul(b, a)
    assert add(add(a, b), c) == add(a, add(b, c))
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert add(a, scalars.neg(a)) == 0
    assert scalars.sub(a, b) == add(a, scalars.neg(b))
    if b != 0:
        assert mul(scalars.div(a, b), b) == a


@given(rationals, rationals)
def test_compare_is_total(a, b):
    assert scalars.compare(a, b) == -scalars.compare(b, a)
    assert (scalars.compare(a, b) == 0) == (a == b)
