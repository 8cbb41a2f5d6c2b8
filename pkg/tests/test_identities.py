from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from idd.algebra import AlgebraSpec, build_table, parse_spec
from idd.identities import (
    StarTable, StarUndefined, check_conservative, check_generalized_associative, check_left_commutative,
    conservative_terms, star_factorial_form,
)


def _setup(text):
    t = build_table(parse_spec(text))
    return t, StarTable(t.spec)


def test_star_values_by_hand():
    s = StarTable(parse_spec("K0:inf@20:1,0"))
    # e_2 * e_3 = 2 * 3 / 4 e_4
    assert s.product(2, 3) == (4, Fraction(3, 2))
    assert s.star_coeff(0, 3) == 0
    s2 = StarTable(parse_spec("K1:inf@20:-1,0"))
    # e_1 * e_1 = (1/2)(1/2) / (1/4) e_3
    assert s2.product(1, 1) == (3, Fraction(1, 1))


@given(st.integers(0, 3), st.integers(-3, 4), st.integers(0, 30), st.integers(0, 30))
def test_star_always_defined_on_the_basis(k, m, i, j):
    # A nonzero numerator forces i, j >= m, so the target i + j - m is >= max(i, j) >= k.
    assume(i >= k and j >= k)
    StarTable(AlgebraSpec(k, 40, m, 0, infinite=True)).star_coeff(i, j)


@given(st.integers(0, 12), st.integers(0, 12), st.integers(-3, 3))
def test_star_closed_form_matches_factorial_form(i, j, m):
    s = StarTable(AlgebraSpec(0, 40, m, 0, infinite=True))
    try:
        closed = s.star_coeff(i, j)
    except StarUndefined:
        return
    r = i + j - m
    assume(r >= 0 and r - m >= 0)
    assert closed == star_factorial_form(i, j, m)


def test_star_requires_m2_zero():
    with pytest.raises(ValueError):
        StarTable(parse_spec("K0:inf@20:0,-1"))
    t = build_table(parse_spec("K0:inf@20:0,-1"))
    with pytest.raises(ValueError):
        check_conservative(t, StarTable(parse_spec("K0:inf@20:0,0")))


def test_frozen_counts_K0_m1():
    t, s = _setup("K0:inf@20:1,0")
    lc, ga, cons = check_left_commutative(t), check_generalized_associative(t, s), check_conservative(t, s)
    assert (lc.passed, ga.passed, cons.passed) == (True, True, True)
    assert (lc.checked, ga.checked, cons.checked) == (2250, 2421, 16356)
    assert cons.to_json()["pass"] is True


def test_left_commutativity_fails_for_symmetric_derivatives():
    r = check_left_commutative(build_table(parse_spec("K0:inf@20:1,1")))
    assert not r.passed
    assert r.witness == {"triple": [1, 2, 1], "lhs": "2*e_0", "rhs": "0"}


def test_conservative_terms_cancel_on_a_quadruple():
    t, s = _setup("K0:inf@20:2,0")
    terms = conservative_terms(t, s, 3, 4, 2, 5)
    assert len(terms) == 12
    total = {}
    for _, sign, (r, c) in terms:
        if c:
            total[r] = total.get(r, 0) + sign * c
    assert not any(total.values())
    # every nonzero term lands on e_(a+b+x+y-3m)
    assert {r for _, _, (r, c) in terms if c} <= {3 + 4 + 2 + 5 - 6}


def test_broken_star_is_detected():
    t, s = _setup("K0:inf@20:1,0")

    class Doubled(StarTable):
        def star_coeff(self, i, j):
            return 2 * super().star_coeff(i, j)

    bad = Doubled(t.spec)
    assert not check_generalized_associative(t, bad).passed
    assert not check_conservative(t, bad).passed


def test_exclusions_are_counted():
    t, s = _setup("K1:inf@20:3,0")
    r = check_conservative(t, s)
    assert r.passed
    assert r.excluded_unsafe > 0 and r.excluded_undefined_star == 0
    assert r.checked + r.excluded_unsafe == 20 ** 4
