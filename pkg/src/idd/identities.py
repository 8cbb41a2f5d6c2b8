"""Left-commutativity, generalized associativity and the conservative identity.

For ``IDD(K^k_inf, m, 0)`` the additional multiplication is

    e_i * e_j = op(i, m) op(j, m) / op(i+j-m, m) e_(i+j-m),

equivalently ``(i+j-2m)!/(i+j-m)! * i!/(i-m)! * j!/(j-m)!`` with the
convention ``1/(negative)! = 0``.  All checks run on a truncation window;
tuples needing a product outside it are excluded and counted, never
treated as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable

from idd.algebra import AlgebraSpec, OutOfWindow, StructureTable, op_coeff
from idd.scalars import render


class StarUndefined(ArithmeticError):
    pass


class StarTable:
    """The additional multiplication attached to ``IDD(K^k, m, 0)``."""

    def __init__(self, spec: AlgebraSpec):
        if spec.m2 != 0:
            raise ValueError(f"star product needs m2 = 0, got {spec}")
        self.spec = spec
        self.m = spec.m1

    def target(self, i: int, j: int) -> int:
        return i + j - self.m

    def star_coeff(self, i: int, j: int) -> Fraction:
        """Coefficient of ``e_(i+j-m)`` in ``e_i * e_j``; raises :class:`StarUndefined`."""
        m = self.m
        num = op_coeff(i, m) * op_coeff(j, m)
        if num == 0:
            return Fraction(0)
        r = i + j - m
        if r < self.spec.k:
            raise StarUndefined(f"e_{i} * e_{j} lands below e_{self.spec.k}")
        den = op_coeff(r, m)
        if den == 0:
            raise StarUndefined(f"op_coeff({r}, {m}) vanishes")
        return num / den

    def product(self, i: int, j: int) -> tuple[int, Fraction]:
        """``(target, coeff)``; the target may lie above the window."""
        return i + j - self.m, self.star_coeff(i, j)


def _ff(a: int, b: int) -> Fraction:
    """``a! / b!`` with ``1/(negative)! = 0``; ``a`` is never negative here."""
    if b < 0:
        return Fraction(0)
    return Fraction(factorial(a), factorial(b))


def star_factorial_form(i: int, j: int, m: int) -> Fraction:
    """The factorial-ratio expression for the star coefficient, evaluated directly."""
    r = i + j - m
    if r < 0 or r - m < 0:
        raise StarUndefined("factorial of a negative index")
    return Fraction(factorial(r - m), factorial(r)) * _ff(i, i - m) * _ff(j, j - m)


@dataclass
class IdentityReport:
    spec: AlgebraSpec
    identity: str
    checked: int = 0
    excluded_unsafe: int = 0
    excluded_undefined_star: int = 0
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.witness is None

    def to_json(self) -> dict:
        out = {
            "spec": str(self.spec),
            "identity": self.identity,
            "checked": self.checked,
            "excluded_unsafe": self.excluded_unsafe,
            "excluded_undefined_star": self.excluded_undefined_star,
            "pass": self.passed,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


# Scalar evaluation: every monomial of a basis word is c * e_r; we track (r, c)
# with c == 0 meaning the zero vector.

Mono = tuple[int, Fraction]
ZERO: Mono = (0, Fraction(0))


def _mul(t: StructureTable, u: Mono, v: Mono) -> Mono:
    if u[1] == 0 or v[1] == 0:
        return ZERO
    p = t.basis_product(u[0], v[0])
    if p is None:
        return ZERO
    return p[0], u[1] * v[1] * p[1]


def _window_ok(t: StructureTable, m: Mono) -> Mono:
    if m[1] != 0 and m[0] > t.spec.n:
        raise OutOfWindow(m[0], m[0])
    return m


def check_left_commutative(t: StructureTable) -> IdentityReport:
    """``e_i (e_j e_x) = e_j (e_i e_x)`` on every safe triple."""
    rep = IdentityReport(t.spec, "left_commutative")
    idx = list(t.spec.indices)
    for i in idx:
        for j in idx:
            for x in idx:
                e = lambda q: (q, Fraction(1))
                try:
                    lhs = _mul(t, e(i), _mul(t, e(j), e(x)))
                    rhs = _mul(t, e(j), _mul(t, e(i), e(x)))
                except OutOfWindow:
                    rep.excluded_unsafe += 1
                    continue
                rep.checked += 1
                if _differs(lhs, rhs) and rep.witness is None:
                    rep.witness = {"triple": [i, j, x], "lhs": _show(lhs), "rhs": _show(rhs)}
    return rep


def check_generalized_associative(t: StructureTable, s: StarTable) -> IdentityReport:
    """``e_i (e_j e_x) = (e_i * e_j) e_x`` on every safe triple with a defined star."""
    _same_algebra(t, s)
    rep = IdentityReport(t.spec, "generalized_associative")
    idx = list(t.spec.indices)
    for i in idx:
        for j in idx:
            try:
                ab = _window_ok(t, s.product(i, j))
            except StarUndefined:
                rep.excluded_undefined_star += len(idx)
                continue
            except OutOfWindow:
                rep.excluded_unsafe += len(idx)
                continue
            for x in idx:
                ex = (x, Fraction(1))
                try:
                    lhs = _mul(t, (i, Fraction(1)), _mul(t, (j, Fraction(1)), ex))
                    rhs = _mul(t, ab, ex)
                except OutOfWindow:
                    rep.excluded_unsafe += 1
                    continue
                rep.checked += 1
                if _differs(lhs, rhs) and rep.witness is None:
                    rep.witness = {"triple": [i, j, x], "lhs": _show(lhs), "rhs": _show(rhs)}
    return rep


# Terms of the conservative identity, written as functions of the four basis
# monomials plus the star product a*b.  Signs are those of "lhs - rhs = 0".
_TERMS: list[tuple[str, int, Callable]] = [
    ("b(a(xy))", 1, lambda M, a, b, x, y, s: M(b, M(a, M(x, y)))),
    ("b((ax)y)", -1, lambda M, a, b, x, y, s: M(b, M(M(a, x), y))),
    ("b(x(ay))", -1, lambda M, a, b, x, y, s: M(b, M(x, M(a, y)))),
    ("a((bx)y)", -1, lambda M, a, b, x, y, s: M(a, M(M(b, x), y))),
    ("(a(bx))y", 1, lambda M, a, b, x, y, s: M(M(a, M(b, x)), y)),
    ("(bx)(ay)", 1, lambda M, a, b, x, y, s: M(M(b, x), M(a, y))),
    ("a(x(by))", -1, lambda M, a, b, x, y, s: M(a, M(x, M(b, y)))),
    ("(ax)(by)", 1, lambda M, a, b, x, y, s: M(M(a, x), M(b, y))),
    ("x(a(by))", 1, lambda M, a, b, x, y, s: M(x, M(a, M(b, y)))),
    ("(a*b)(xy)", 1, lambda M, a, b, x, y, s: M(s, M(x, y))),
    ("((a*b)x)y", -1, lambda M, a, b, x, y, s: M(M(s, x), y)),
    ("x((a*b)y)", -1, lambda M, a, b, x, y, s: M(x, M(s, y))),
]


def conservative_terms(t: StructureTable, s: StarTable, a: int, b: int, x: int, y: int) -> list[tuple[str, int, Mono]]:
    """Each signed term of the identity on basis vectors; raises on unsafe tuples."""
    ab = _window_ok(t, s.product(a, b))
    M = lambda u, v: _mul(t, u, v)
    one = Fraction(1)
    args = ((a, one), (b, one), (x, one), (y, one), ab)
    return [(name, sign, f(M, *args)) for name, sign, f in _TERMS]


def check_conservative(t: StructureTable, s: StarTable) -> IdentityReport:
    """The four-variable conservative identity on every safe basis quadruple."""
    _same_algebra(t, s)
    spec = t.spec
    rep = IdentityReport(spec, "conservative")
    idx = list(spec.indices)
    d = len(idx)
    m = s.m
    # Every term lands on e_(a+b+x+y-3m); above the window the tuple is unsafe.
    top = spec.n + 3 * m
    for a in idx:
        for b in idx:
            try:
                s.star_coeff(a, b)
            except StarUndefined:
                rep.excluded_undefined_star += d * d
                continue
            for x in idx:
                for y in idx:
                    if a + b + x + y > top:
                        rep.excluded_unsafe += 1
                        continue
                    try:
                        terms = conservative_terms(t, s, a, b, x, y)
                    except OutOfWindow:
                        rep.excluded_unsafe += 1
                        continue
                    rep.checked += 1
                    total: dict[int, Fraction] = {}
                    for _, sign, (r, c) in terms:
                        if c:
                            total[r] = total.get(r, 0) + sign * c
                    if any(total.values()) and rep.witness is None:
                        rep.witness = {
                            "quadruple": [a, b, x, y],
                            "terms": {name: f"{'+' if sign > 0 else '-'}{_show(mono)}" for name, sign, mono in terms},
                        }
    return rep


def _same_algebra(t: StructureTable, s: StarTable) -> None:
    if t.spec.m2 != 0:
        raise ValueError(f"identity needs m2 = 0, got {t.spec}")
    if (t.spec.k, t.spec.m1) != (s.spec.k, s.m):
        raise ValueError("star table built for a different algebra")


def _differs(u: Mono, v: Mono) -> bool:
    if u[1] == 0 and v[1] == 0:
        return False
    return u != v


def _show(u: Mono) -> str:
    return "0" if u[1] == 0 else f"{render(u[1])}*e_{u[0]}"
