"""IDD algebras on contiguous monomial sets.

The algebra ``IDD(K^k_n, m1, m2)`` has basis ``e_k .. e_n`` (``e_i = x^i``)
and product ``e_i * e_j = T^m1(x^i) T^m2(x^j)``, where ``T^m`` is the m-fold
derivative for m > 0, the identity for m = 0 and the |m|-fold integral
(without constant) for m < 0.  The product of two monomials is again a
monomial multiple of ``x^(i+j-l)`` with ``l = m1 + m2``; it is kept when the
target exponent lies in the basis range and dropped otherwise.

Infinite algebras ``K^k_inf`` are handled through a truncation window
``e_k .. e_N``.  A product whose target escapes the window is *not* zero;
it raises :class:`OutOfWindow` so callers can restrict identity checks to
tuples that stay inside.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping

from idd.scalars import render


class SpecParseError(ValueError):
    def __init__(self, text: str, pos: int, reason: str):
        self.text = text
        self.pos = pos
        super().__init__(f"cannot parse spec {text!r} at position {pos}: {reason}")


class OutOfWindow(ArithmeticError):
    """A basis product lands above the truncation bound of a windowed algebra."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"e_{i} * e_{j} leaves the truncation window")


@dataclass(frozen=True, order=True)
class AlgebraSpec:
    """Identifies ``IDD(K^k_n, m1, m2)``.

    ``n`` is the top basis index; for ``infinite=True`` it is the window
    bound ``N`` of a truncated ``K^k_inf``.
    """

    k: int
    n: int
    m1: int
    m2: int
    infinite: bool = False

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if self.n < self.k:
            raise ValueError(f"top index {self.n} below k = {self.k}")

    @property
    def rank(self) -> int:
        return abs(self.m1) + abs(self.m2)

    @property
    def level(self) -> int:
        return self.m1 + self.m2

    @property
    def dim(self) -> int:
        return self.n - self.k + 1

    @property
    def indices(self) -> range:
        return range(self.k, self.n + 1)

    def opposite(self) -> "AlgebraSpec":
        return AlgebraSpec(self.k, self.n, self.m2, self.m1, self.infinite)

    def normalized(self) -> "AlgebraSpec":
        """Itself when m1 >= m2, otherwise the opposite algebra."""
        return self if self.m1 >= self.m2 else self.opposite()

    def with_top(self, n: int) -> "AlgebraSpec":
        return AlgebraSpec(self.k, n, self.m1, self.m2, self.infinite)

    def __str__(self) -> str:
        extent = f"inf@{self.n}" if self.infinite else str(self.n)
        return f"K{self.k}:{extent}:{self.m1},{self.m2}"

    @classmethod
    def parse(cls, text: str) -> "AlgebraSpec":
        return parse_spec(text)


_SPEC_RE = re.compile(r"K(?P<k>\d+):(?P<ext>inf@\d+|\d+):(?P<m1>[-−]?\d+),(?P<m2>[-−]?\d+)")


def _first_mismatch(text: str) -> int:
    # Longest prefix that can still be extended to a valid spec string.
    probes = [
        r"K", r"K\d+", r"K\d+:", r"K\d+:(inf@\d*|\d+)", r"K\d+:(inf@\d+|\d+):",
        r"K\d+:(inf@\d+|\d+):[-−]?\d+", r"K\d+:(inf@\d+|\d+):[-−]?\d+,",
        r"K\d+:(inf@\d+|\d+):[-−]?\d+,[-−]?\d+",
    ]
    best = 0
    for p in probes:
        m = re.match(p, text)
        if m:
            best = max(best, m.end())
    return best


def parse_spec(text: str) -> AlgebraSpec:
    """Parse ``K<k>:<n>:<m1>,<m2>`` or ``K<k>:inf@<N>:<m1>,<m2>``."""
    s = text.strip()
    m = _SPEC_RE.fullmatch(s)
    if m is None:
        raise SpecParseError(text, _first_mismatch(s), "expected K<k>:<n|inf@N>:<m1>,<m2>")
    k = int(m["k"])
    ext = m["ext"]
    infinite = ext.startswith("inf@")
    n = int(ext[4:]) if infinite else int(ext)
    m1 = int(m["m1"].replace("−", "-"))
    m2 = int(m["m2"].replace("−", "-"))
    if n < k:
        raise SpecParseError(text, m.start("ext"), f"top index {n} is below k = {k}")
    return AlgebraSpec(k, n, m1, m2, infinite)


@lru_cache(maxsize=None)
def op_coeff(i: int, m: int) -> Fraction:
    """Scalar c with ``T^m(x^i) = c x^(i-m)``.

    Falling factorial ``i (i-1) ... (i-m+1)`` for m > 0 (zero when i < m),
    ``1 / ((i+1) ... (i+|m|))`` for m < 0, and 1 for m = 0.
    """
    if i < 0:
        raise ValueError("exponent must be non-negative")
    c = 1
    if m >= 0:
        for t in range(m):
            c *= i - t
        return Fraction(c)
    for t in range(1, -m + 1):
        c *= i + t
    return Fraction(1, c)


class Element:
    """Sparse rational vector over the monomial basis (absolute indices)."""

    __slots__ = ("coords",)

    def __init__(self, coords: Mapping[int, Fraction] | Iterable[tuple[int, Fraction]] = ()):
        items = coords.items() if isinstance(coords, Mapping) else coords
        acc: dict[int, Fraction] = {}
        for i, c in items:
            acc[i] = acc.get(i, 0) + Fraction(c)
        self.coords = {i: c for i, c in sorted(acc.items()) if c != 0}

    @classmethod
    def basis(cls, i: int, c=1) -> "Element":
        return cls({i: Fraction(c)})

    @classmethod
    def from_dense(cls, vec: Iterable, k: int) -> "Element":
        return cls((k + q, Fraction(c)) for q, c in enumerate(vec))

    def to_dense(self, spec: AlgebraSpec) -> list[Fraction]:
        out = [Fraction(0)] * spec.dim
        for i, c in self.coords.items():
            out[i - spec.k] = c
        return out

    def is_zero(self) -> bool:
        return not self.coords

    def support(self) -> list[int]:
        return list(self.coords)

    def __iter__(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self.coords.items())

    def __add__(self, other: "Element") -> "Element":
        return Element(list(self.coords.items()) + list(other.coords.items()))

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __neg__(self) -> "Element":
        return Element({i: -c for i, c in self.coords.items()})

    def __rmul__(self, scalar) -> "Element":
        s = Fraction(scalar)
        return Element({i: s * c for i, c in self.coords.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, Element):
            return self.coords == other.coords
        if other == 0:
            return not self.coords
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coords.items()))

    def __repr__(self) -> str:
        if not self.coords:
            return "0"
        return " + ".join(f"{render(c)}*e_{i}" for i, c in self.coords.items())


ZERO_ELEMENT = Element()


class StructureTable:
    """All nonzero basis products of an IDD algebra.

    ``entries[(i, j)] = c`` means ``e_i * e_j = c e_(i+j-l)``. Pairs whose
    product escapes a truncation window are kept in ``out_of_window``.
    """

    def __init__(self, spec: AlgebraSpec, entries: dict[tuple[int, int], Fraction],
                 out_of_window: frozenset[tuple[int, int]] = frozenset()):
        self.spec = spec
        self.entries = entries
        self.out_of_window = out_of_window
        self._l = spec.level

    @property
    def level(self) -> int:
        return self._l

    def target(self, i: int, j: int) -> int:
        return i + j - self._l

    def coeff(self, i: int, j: int) -> Fraction:
        if (i, j) in self.out_of_window:
            raise OutOfWindow(i, j)
        return self.entries.get((i, j), Fraction(0))

    def basis_product(self, i: int, j: int) -> tuple[int, Fraction] | None:
        """``(target, coeff)`` for a nonzero product, ``None`` for zero."""
        c = self.entries.get((i, j))
        if c is not None:
            return i + j - self._l, c
        if (i, j) in self.out_of_window:
            raise OutOfWindow(i, j)
        return None

    def in_window(self, i: int, j: int) -> bool:
        return (i, j) not in self.out_of_window

    def is_trivial(self) -> bool:
        return not self.entries and not self.out_of_window

    def dump(self) -> list[dict]:
        return [{"i": i, "j": j, "coeff": render(c), "target": i + j - self._l}
                for (i, j), c in sorted(self.entries.items())]

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructureTable):
            return NotImplemented
        return (self.spec == other.spec and self.entries == other.entries
                and self.out_of_window == other.out_of_window)

    def __repr__(self) -> str:
        return f"StructureTable({self.spec}, {len(self.entries)} nonzero products)"

    @cached_property
    def left_ops(self) -> dict[int, dict[int, tuple[int, Fraction]]]:
        """``left_ops[i][j] = (target, c)`` for every nonzero ``e_i * e_j``."""
        out: dict[int, dict[int, tuple[int, Fraction]]] = {i: {} for i in self.spec.indices}
        for (i, j), c in self.entries.items():
            out[i][j] = (i + j - self._l, c)
        return out


@lru_cache(maxsize=512)
def build_table(spec: AlgebraSpec) -> StructureTable:
    """Structure constants ``op_coeff(i, m1) * op_coeff(j, m2)`` on the index range."""
    l = spec.level
    entries: dict[tuple[int, int], Fraction] = {}
    oow = set()
    for i in spec.indices:
        a = op_coeff(i, spec.m1)
        if a == 0:
            continue
        for j in spec.indices:
            b = op_coeff(j, spec.m2)
            if b == 0:
                continue
            t = i + j - l
            if t < spec.k:
                continue
            if t > spec.n:
                if spec.infinite:
                    oow.add((i, j))
                continue
            entries[(i, j)] = a * b
    return StructureTable(spec, entries, frozenset(oow))


def opposite_table(t: StructureTable) -> StructureTable:
    """Transpose of ``t``: the product ``x *' y = y * x``."""
    entries = {(j, i): c for (i, j), c in t.entries.items()}
    oow = frozenset((j, i) for (i, j) in t.out_of_window)
    return StructureTable(t.spec.opposite(), entries, oow)


def multiply(t: StructureTable, x: Element, y: Element) -> Element:
    """Bilinear extension of the basis products."""
    acc: dict[int, Fraction] = {}
    for i, a in x:
        for j, b in y:
            p = t.basis_product(i, j)
            if p is None:
                continue
            r, c = p
            acc[r] = acc.get(r, 0) + a * b * c
    return Element(acc)


def check_basis(t: StructureTable, x: Element) -> None:
    lo, hi = t.spec.k, t.spec.n
    for i in x.coords:
        if not lo <= i <= hi:
            raise ValueError(f"index {i} outside basis range e_{lo}..e_{hi}")


def is_multiplicative_basis(t: StructureTable) -> bool:
    """Every in-window basis product lies on a single basis line."""
    for i in t.spec.indices:
        for j in t.spec.indices:
            if not t.in_window(i, j):
                continue
            if len(multiply(t, Element.basis(i), Element.basis(j)).coords) > 1:
                return False
    return True


def is_strong_multiplicative(t: StructureTable) -> bool:
    """Multiplicative, and no in-window basis product vanishes."""
    if not is_multiplicative_basis(t):
        return False
    for i in t.spec.indices:
        for j in t.spec.indices:
            if t.in_window(i, j) and (i, j) not in t.entries:
                return False
    return True


def rank(spec: AlgebraSpec) -> int:
    return spec.rank


def level(spec: AlgebraSpec) -> int:
    return spec.level
