from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from idd.algebra import (
    AlgebraSpec, Element, OutOfWindow, SpecParseError, build_table, is_multiplicative_basis,
    is_strong_multiplicative, multiply, op_coeff, opposite_table, parse_spec,
)

specs = st.builds(
    lambda k, extra, m1, m2, inf: AlgebraSpec(k, k + extra, m1, m2, inf),
    st.integers(0, 3), st.integers(0, 7), st.integers(-3, 3), st.integers(-3, 3), st.booleans(),
)


@pytest.mark.parametrize("i, m, c", [
    (5, 0, Fraction(1)), (5, 1, Fraction(5)), (5, 2, Fraction(20)), (2, 3, Fraction(0)),
    (0, 1, Fraction(0)), (3, -1, Fraction(1, 4)), (3, -2, Fraction(1, 20)), (0, -3, Fraction(1, 6)),
])
def test_op_coeff(i, m, c):
    assert op_coeff(i, m) == c


def test_table_K0_3_1_0_by_hand():
    # e_i e_j = i e_(i+j-1) for 1 <= i and i + j <= 4
    dump = build_table(parse_spec("K0:3:1,0")).dump()
    assert dump == [
        {"i": 1, "j": 0, "coeff": "1", "target": 0}, {"i": 1, "j": 1, "coeff": "1", "target": 1},
        {"i": 1, "j": 2, "coeff": "1", "target": 2}, {"i": 1, "j": 3, "coeff": "1", "target": 3},
        {"i": 2, "j": 0, "coeff": "2", "target": 1}, {"i": 2, "j": 1, "coeff": "2", "target": 2},
        {"i": 2, "j": 2, "coeff": "2", "target": 3}, {"i": 3, "j": 0, "coeff": "3", "target": 2},
        {"i": 3, "j": 1, "coeff": "3", "target": 3},
    ]


def test_table_rank_two_fractions():
    t = build_table(parse_spec("K0:6:-1,-1"))
    assert t.coeff(1, 2) == Fraction(1, 6)
    assert t.target(1, 2) == 5
    assert t.coeff(3, 2) == 0  # lands on e_7


def test_trivial_table_is_empty():
    assert build_table(parse_spec("K0:3:9,0")).dump() == []


def test_window_products_raise():
    t = build_table(parse_spec("K0:inf@5:0,0"))
    assert t.basis_product(2, 3) == (5, Fraction(1))
    with pytest.raises(OutOfWindow):
        t.basis_product(3, 3)
    with pytest.raises(OutOfWindow):
        multiply(t, Element.basis(4), Element.basis(2))


@pytest.mark.parametrize("text, pos", [("BADSPEC", 0), ("K0:", 3), ("K1:4:1", 6), ("K3:2:0,0", 3), ("K0:inf:1,0", 3)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(SpecParseError) as exc:
        parse_spec(text)
    assert exc.value.pos == pos


def test_parse_examples():
    assert parse_spec("K0:8:1,0") == AlgebraSpec(0, 8, 1, 0)
    s = parse_spec("K1:inf@40:-1,-1")
    assert (s.k, s.n, s.m1, s.m2, s.infinite) == (1, 40, -1, -1, True)
    assert s.rank == 2 and s.level == -2


@given(specs)
def test_spec_round_trip(spec):
    assert parse_spec(str(spec)) == spec


@given(specs)
def test_opposite_is_transpose(spec):
    assert opposite_table(build_table(spec)) == build_table(spec.opposite())


def _elements(spec):
    coeffs = st.fractions(max_denominator=20).filter(lambda x: abs(x) < 50)
    return st.dictionaries(st.sampled_from(list(spec.indices)), coeffs, max_size=4).map(Element)


@given(st.data())
def test_bilinearity(data):
    spec = data.draw(specs.filter(lambda s: not s.infinite))
    t = build_table(spec)
    x, y, z = (data.draw(_elements(spec)) for _ in range(3))
    a = data.draw(st.fractions(max_denominator=10))
    assert multiply(t, x + y, z) == multiply(t, x, z) + multiply(t, y, z)
    assert multiply(t, z, x + y) == multiply(t, z, x) + multiply(t, z, y)
    assert multiply(t, a * x, y) == a * multiply(t, x, y) == multiply(t, x, a * y)


def test_commutative_when_orders_agree():
    t = build_table(parse_spec("K0:7:2,2"))
    assert all(t.entries.get((j, i)) == c for (i, j), c in t.entries.items())


def test_multiplicative_bases():
    assert is_multiplicative_basis(build_table(parse_spec("K1:9:2,-1")))
    assert is_strong_multiplicative(build_table(parse_spec("K2:inf@12:1,-1")))
    assert not is_strong_multiplicative(build_table(parse_spec("K2:inf@12:2,2")))  # e_2 e_2 lands on e_0


def test_element_arithmetic():
    x = Element({1: 2, 3: Fraction(1, 2)})
    assert (x - x).is_zero()
    assert x.to_dense(AlgebraSpec(1, 3, 0, 0)) == [2, 0, Fraction(1, 2)]
    assert Element.from_dense([0, 5], 2) == Element.basis(3, 5)
    assert repr(Element()) == "0"
