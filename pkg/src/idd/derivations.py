"""Derivations: the kernel of the Leibniz system and the named families.

A derivation ``D`` is stored as a ``d x d`` matrix whose column ``q`` holds
the coordinates of ``D(e_(k+q))``.  As a vector of unknowns it is flattened
column by column, so ``D[p][q]`` (coefficient of ``e_p`` in ``D(e_q)``,
absolute indices) sits at position ``(q-k)*d + (p-k)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable

from idd.algebra import AlgebraSpec, OutOfWindow, StructureTable, build_table
from idd.linalg import Echelon, RatMatrix, Subspace, integer_row, kernel_from_echelon
from idd.scalars import render

DEFAULT_MARGIN = 8

Image = dict[int, Fraction]


class WindowTooSmall(ValueError):
    pass


class LinearMap:
    """Linear endomorphism of the algebra, columns indexed by source basis element."""

    def __init__(self, spec: AlgebraSpec, matrix: RatMatrix | None = None):
        self.spec = spec
        d = spec.dim
        self.matrix = matrix if matrix is not None else RatMatrix(d, d)
        if (self.matrix.rows, self.matrix.cols) != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix")

    @classmethod
    def from_images(cls, spec: AlgebraSpec, images: dict[int, dict[int, object]]) -> "LinearMap":
        """``images[q][p] = c`` sets ``D(e_q) += c e_p``; indices outside the basis are dropped."""
        m = cls(spec)
        lo, hi = spec.k, spec.n
        for q, img in images.items():
            if not lo <= q <= hi:
                continue
            for p, c in img.items():
                if lo <= p <= hi and c:
                    m.matrix[p - lo, q - lo] += Fraction(c)
        return m

    @classmethod
    def from_vector(cls, spec: AlgebraSpec, vec) -> "LinearMap":
        d = spec.dim
        m = cls(spec)
        for idx, c in enumerate(vec):
            if c:
                q, p = divmod(idx, d)
                m.matrix[p, q] = Fraction(c)
        return m

    def to_vector(self) -> list[Fraction]:
        d = self.spec.dim
        return [self.matrix[p, q] for q in range(d) for p in range(d)]

    def entry(self, p: int, q: int) -> Fraction:
        k = self.spec.k
        return self.matrix[p - k, q - k]

    def image(self, q: int) -> Image:
        k = self.spec.k
        col = self.matrix.column(q - k)
        return {k + p: c for p, c in enumerate(col) if c}

    def images(self) -> dict[int, Image]:
        return {q: self.image(q) for q in self.spec.indices}

    def __add__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.spec, self.matrix + other.matrix)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.spec, self.matrix - other.matrix)

    def __rmul__(self, s) -> "LinearMap":
        return LinearMap(self.spec, self.matrix.scale(s))

    def compose(self, other: "LinearMap") -> "LinearMap":
        """``self after other``."""
        return LinearMap(self.spec, self.matrix @ other.matrix)

    def bracket(self, other: "LinearMap") -> "LinearMap":
        return self.compose(other) - other.compose(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearMap) and self.spec == other.spec and self.matrix == other.matrix

    def describe(self) -> str:
        parts = []
        for q in self.spec.indices:
            img = self.image(q)
            if img:
                rhs = " + ".join(f"{render(c)} e_{p}" for p, c in img.items())
                parts.append(f"e_{q} -> {rhs}")
        return "; ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"LinearMap({self.spec}: {self.describe()})"


# --- the Leibniz system ----------------------------------------------------------

def _var(spec: AlgebraSpec, p: int, q: int) -> int:
    return (q - spec.k) * spec.dim + (p - spec.k)


def leibniz_rows(t: StructureTable) -> Iterable[dict[int, Fraction]]:
    """Sparse rows of the Leibniz system, one per ``(i, j, r)`` with a nonzero constraint.

    Coefficient of ``e_r`` in ``D(e_i * e_j) - D(e_i) * e_j - e_i * D(e_j)``.
    """
    spec = t.spec
    if spec.infinite:
        raise ValueError("the Leibniz system is assembled for finite specs only")
    l = t.level
    entries = t.entries
    for i in spec.indices:
        for j in spec.indices:
            prod = entries.get((i, j))
            for r in spec.indices:
                row: dict[int, Fraction] = {}
                if prod is not None:
                    v = _var(spec, r, i + j - l)
                    row[v] = row.get(v, 0) + prod
                p = r - j + l
                c = entries.get((p, j))
                if c is not None:
                    v = _var(spec, p, i)
                    row[v] = row.get(v, 0) - c
                q = r - i + l
                c = entries.get((i, q))
                if c is not None:
                    v = _var(spec, q, j)
                    row[v] = row.get(v, 0) - c
                row = {a: b for a, b in row.items() if b}
                if row:
                    yield row


def leibniz_matrix(t: StructureTable) -> RatMatrix:
    """Dense form of :func:`leibniz_rows` over the ``d^2`` unknowns."""
    rows = list(leibniz_rows(t))
    d2 = t.spec.dim ** 2
    m = RatMatrix(len(rows), d2)
    for r, row in enumerate(rows):
        for c, v in row.items():
            m[r, c] = v
    return m


def derivation_kernel(spec: AlgebraSpec) -> Subspace:
    t = build_table(spec)
    ech = Echelon(spec.dim ** 2)
    for row in leibniz_rows(t):
        ech.add(integer_row(row))
    return kernel_from_echelon(ech)


# --- direct evaluation oracle ----------------------------------------------------

@dataclass
class LeibnizResult:
    ok: bool
    witness: tuple[int, int] | None = None
    checked: int = 0
    excluded: int = 0

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        out = {"ok": self.ok, "checked": self.checked, "excluded": self.excluded}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


def _product_into(t: StructureTable, acc: dict[int, Fraction], i: int, j: int, scale: Fraction) -> None:
    c = t.entries.get((i, j))
    if c is not None:
        r = i + j - t.level
        acc[r] = acc.get(r, 0) + scale * c
    elif (i, j) in t.out_of_window:
        raise OutOfWindow(i, j)


def leibniz_scan(t: StructureTable, image: Callable[[int], Image], pairs=None) -> LeibnizResult:
    """Evaluate ``D(e_i e_j) - D(e_i) e_j - e_i D(e_j)`` pair by pair.

    ``image(q)`` returns ``D(e_q)`` as ``{p: coeff}``.  On a truncation window
    a pair is skipped when any product it needs, or any image it uses, leaves
    the window; skipped pairs are counted in ``excluded``.
    """
    spec = t.spec
    lo, hi = spec.k, spec.n
    cache: dict[int, Image] = {}

    def img(q: int) -> Image | None:
        if q not in cache:
            cache[q] = image(q)
        out = cache[q]
        if any(p > hi for p in out):
            return None
        return out

    checked = excluded = 0
    it = pairs if pairs is not None else ((i, j) for i in spec.indices for j in spec.indices)
    for i, j in it:
        try:
            di, dj = img(i), img(j)
            if di is None or dj is None:
                raise OutOfWindow(i, j)
            lhs: dict[int, Fraction] = {}
            c = t.entries.get((i, j))
            if c is not None:
                dt = img(i + j - t.level)
                if dt is None:
                    raise OutOfWindow(i, j)
                for p, a in dt.items():
                    lhs[p] = lhs.get(p, 0) + a * c
            elif (i, j) in t.out_of_window:
                raise OutOfWindow(i, j)
            rhs: dict[int, Fraction] = {}
            for p, a in di.items():
                if lo <= p:
                    _product_into(t, rhs, p, j, a)
            for p, a in dj.items():
                if lo <= p:
                    _product_into(t, rhs, i, p, a)
        except OutOfWindow:
            excluded += 1
            continue
        checked += 1
        for key in set(lhs) | set(rhs):
            if lhs.get(key, 0) != rhs.get(key, 0):
                return LeibnizResult(False, (i, j), checked, excluded)
    return LeibnizResult(True, None, checked, excluded)


def check_leibniz(t: StructureTable, D: LinearMap) -> LeibnizResult:
    """Brute-force Leibniz check by direct product evaluation, with the first failing pair."""
    cols = D.images()
    return leibniz_scan(t, lambda q: cols.get(q, {}))


# --- named families --------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    key: str
    k: int
    m1: int
    m2: int
    n_min: int
    n_max: int | None
    citation: str
    build: Callable[[int], list[tuple[str, dict[int, dict[int, int]]]]]

    def covers(self, spec: AlgebraSpec) -> bool:
        if (spec.k, spec.m1, spec.m2) != (self.k, self.m1, self.m2) or spec.infinite:
            return False
        return spec.n >= self.n_min and (self.n_max is None or spec.n <= self.n_max)

    @property
    def claimed_dim(self) -> Callable[[int], int]:
        return lambda n: len(self.build(n))


def _diag(f, lo, hi):
    return {i: {i: f(i)} for i in range(lo, hi + 1)}


def _lower(lo, hi, skip=()):
    return {i: {i - 1: i} for i in range(lo, hi + 1) if i not in skip and i - 1 >= 0}


def _m(*triples):
    """``_m((q, p, c), ...)``: ``D(e_q) += c e_p``."""
    out: dict[int, dict[int, int]] = {}
    for q, p, c in triples:
        out.setdefault(q, {})[p] = out.get(q, {}).get(p, 0) + c
    return out


def _single(q, ps, prefix, index_of):
    return [(f"{prefix}_{index_of(p)}", _m((q, p, 1))) for p in ps]


def _k0_1_0(n):
    return [("varphi", _diag(lambda i: i - 1, 0, n)), ("phi", _lower(1, n))]


def _k1_1_0(n):
    return [("varphi", _diag(lambda i: i - 1, 1, n))]


def _k0_0_m1(n):
    return [(f"varphi_{i}", {k: {k + i: i + 1 + k} for k in range(0, n - i + 1)}) for i in range(0, n + 1)]


def _k1_0_m1(n):
    maps = [(f"varphi_{i}", {k: {k + i - 1: i + k} for k in range(1, 1 + n - i + 1)}) for i in range(1, n + 1)]
    maps.append(("phi_1", _m((2, n - 1, 1))))
    maps.append(("phi_2", _m((2, n, 1))))
    return maps


def _k0_2_2_0(n):
    out = []
    for name, q in (("varphi", 0), ("phi", 1), ("psi", 2)):
        out += [(f"{name}_{i}", _m((q, i, 1))) for i in (0, 1)]
    return out


def _k0_2_0(n):
    return [("varphi", _diag(lambda i: i - 2, 0, n)), ("phi", _lower(1, n))]


def _k1_2_2_0(n):
    return [("varphi", _m((1, 1, 1))), ("phi", _m((2, 1, 1)))]


def _k1_2_0(n):
    return [("varphi", _diag(lambda i: i - 2, 1, n))]


def _k0_1_1(n):
    return [("varphi", _diag(lambda i: i - 2, 0, n)), ("phi", _lower(1, n))]


def _k1_1_1(n):
    return [("varphi", _diag(lambda i: i - 2, 1, n)), ("phi", _lower(1, n, skip=(1,)))]


def _k0_1_m1(n):
    return [("varphi", _diag(lambda i: i, 0, n))]


def _k1_2_1_m1(n):
    return [("varphi_2", _m((1, 2, 1))), ("varphi_1", _m((1, 1, 1), (2, 2, 2)))]


def _k1_1_m1(n):
    return [
        ("varphi", _diag(lambda i: i, 1, n)),
        ("phi_1", _m((1, n - 1, n), (2, n, n * n - n + 2))),
        ("phi_2", _m((1, n, 1))),
    ]


def _k0_2_m1_m1(n):
    maps = [(f"varphi_{i}", _m((0, i, 1), (2, 2, 2 if i == 0 else 0))) for i in range(0, 3)]
    maps += [(f"phi_{j}", _m((1, j, 1))) for j in (1, 2)]
    return maps


def _k0_3_m1_m1(n):
    maps = [(f"varphi_{i}", _m((0, i, 1), *([(2, 3, 1)] if i == 1 else []))) for i in range(1, 4)]
    maps += [(f"phi_{j}", _m((1, j, 1), *([(3, 3, 1)] if j == 1 else []))) for j in range(1, 4)]
    return maps


def _k0_4_m1_m1(n):
    return [
        ("varphi_4", _m((0, 4, 1))),
        ("varphi_3", _m((0, 3, 1))),
        ("varphi_2", _m((0, 2, 3), (2, 4, 2))),
        ("varphi_1", _m((0, 1, 2), (2, 3, 2), (3, 4, 1))),
        ("varphi_0", _diag(lambda i: i + 2, 0, 4)),
        ("phi_4", _m((1, 4, 1))),
        ("phi_3", _m((1, 3, 1))),
        ("phi_2", _m((1, 2, 3), (3, 4, 2))),
    ]


def _k0_m1_m1(n):
    return [
        ("varphi", _diag(lambda i: i + 2, 0, n)),
        ("phi_4", _m((0, n - 4, 4 * (n - 1) * (n - 3)), (1, n - 3, (n - 2) * (n + 5)),
                     (2, n - 2, 8 * (n - 1)), (3, n - 1, 6 * (n + 1)), (4, n, 4 * (n + 5)))),
        ("phi_3", _m((0, n - 3, n - 2), (2, n - 1, 2), (3, n, 1))),
        ("phi_2", _m((0, n - 2, n - 1), (2, n, 2))),
        ("phi_1", _m((0, n - 1, 1))),
        ("phi_0", _m((0, n, 1))),
        ("psi_2", _m((1, n - 2, n - 1), (3, n, 1))),
        ("psi_1", _m((1, n - 1, 1))),
        ("psi_0", _m((1, n, 1))),
    ]


def _k1_4_tail(n):
    maps = [(f"varphi_{i}", _m((1, i, 1), *([(4, 4, 2)] if i == 1 else []))) for i in range(1, 5)]
    maps += [(f"phi_{j}", _m((2, j, 1))) for j in range(2, 5)]
    maps += [(f"psi_{j}", _m((3, j, 1))) for j in range(2, 5)]
    return maps


def _k1_5_m1_m1(n):
    return [
        ("varphi_5", _m((1, 5, 1))), ("varphi_4", _m((1, 4, 1))), ("varphi_3", _m((1, 3, 1))),
        ("varphi_2", _m((1, 2, 3), (4, 5, 4))),
        ("varphi_1", _m((1, 1, 1), (4, 4, 2), (5, 5, 1))),
        ("phi_5", _m((2, 5, 1))), ("phi_4", _m((2, 4, 1))), ("phi_3", _m((2, 3, 1))),
        ("phi_2", _m((2, 2, 1), (5, 5, 1))),
        ("psi_5", _m((3, 5, 1))), ("psi_4", _m((3, 4, 1))), ("psi_3", _m((3, 3, 1))),
    ]


def _k1_6_m1_m1(n):
    return [
        ("varphi_6", _m((1, 6, 1))), ("varphi_5", _m((1, 5, 1))), ("varphi_4", _m((1, 4, 1))),
        ("varphi_3", _m((1, 3, 1), (4, 6, 1))),
        ("varphi_2", _m((1, 2, 3), (4, 5, 4), (5, 6, 2))),
        ("varphi_1", _m((1, 1, 1), (3, 3, -1), (4, 4, 2), (5, 5, 1))),
        ("phi_6", _m((2, 6, 1))), ("phi_5", _m((2, 5, 1))), ("phi_4", _m((2, 4, 1))),
        ("phi_3", _m((2, 3, 4), (5, 6, 3))),
        ("phi_2", _m((2, 2, 1), (3, 3, 2), (5, 5, 1), (6, 6, 2))),
        ("psi_6", _m((3, 6, 1))), ("psi_5", _m((3, 5, 1))), ("psi_4", _m((3, 4, 1))),
    ]


def _k1_7_m1_m1(n):
    return [
        ("varphi_7", _m((1, 7, 1))), ("varphi_6", _m((1, 6, 1))), ("varphi_5", _m((1, 5, 1))),
        ("varphi_4", _m((1, 4, 5), (4, 7, 4))),
        ("varphi_3", _m((1, 3, 2), (4, 6, 2), (5, 7, 1))),
        ("varphi_2", _m((1, 2, 6), (3, 4, 5), (4, 5, -8), (5, 6, 4))),
        ("varphi_1", _m((1, 1, 3), (2, 2, 4), (3, 3, 5), (4, 4, 2), (5, 5, 7), (6, 6, 8), (7, 7, 3))),
        ("phi_7", _m((2, 7, 1))), ("phi_6", _m((2, 6, 1))), ("phi_5", _m((2, 5, 1))),
        ("phi_4", _m((2, 4, 5), (5, 7, 3))),
        ("phi_3", _m((2, 3, 8), (3, 4, 15), (5, 6, 6), (6, 7, 12))),
        ("psi_7", _m((3, 7, 1))), ("psi_6", _m((3, 6, 1))), ("psi_5", _m((3, 5, 1))),
    ]


def _k1_m1_m1(n):
    maps = [
        ("varphi", _diag(lambda i: i + 2, 1, n)),
        ("phi_6", _m((1, n - 6, 18 * (n - 2) * (n - 5)), (2, n - 5, 8 * (n - 4) * (n + 3)),
                     (3, n - 4, 3 * (n - 3) * (n + 18)), (4, n - 3, 72 * (n - 2)),
                     (5, n - 2, 60 * n), (6, n - 1, 48 * (n + 3)), (7, n, 36 * (n + 8)))),
        ("phi_5", _m((1, n - 5, 2 * (n - 4)), (3, n - 3, 2 - n), (4, n - 2, 8), (5, n - 1, 4))),
        ("phi_4", _m((1, n - 4, n - 3), (4, n - 1, 4), (5, n, 2))),
        ("phi_3", _m((1, n - 3, n - 2), (4, n, 4))),
        ("phi_2", _m((1, n - 2, 1))),
        ("phi_1", _m((1, n - 1, 1))),
        ("phi_0", _m((1, n, 1))),
        ("psi_4", _m((2, n - 4, 2 * (n - 3)), (3, n - 3, 3 * (n - 2)), (5, n - 1, -6), (6, n, 12))),
        ("psi_3", _m((2, n - 3, n - 2), (5, n, 3))),
    ]
    maps += [(f"psi_{j}", _m((2, n - j, 1))) for j in (2, 1, 0)]
    maps += [(f"pi_{j}", _m((3, n - j, 1))) for j in (2, 1, 0)]
    return maps


def _k0_2_0_m2(n):
    return _k0_2_m1_m1(n)


def _k0_3_0_m2(n):
    return [
        ("varphi_3", _m((0, 3, 1))), ("varphi_2", _m((0, 2, 1))),
        ("varphi_1", _m((0, 1, 3), (2, 3, 4))),
        ("varphi_0", _m((0, 0, 1), (2, 2, 2), (3, 3, 1))),
        ("phi_3", _m((1, 3, 1))), ("phi_2", _m((1, 2, 1))),
        ("phi_1", _m((1, 1, 1), (3, 3, 1))),
    ]


def _k0_0_m2(n):
    return [
        ("varphi", _diag(lambda i: i + 2, 0, n)),
        ("phi_3", _m((0, n - 3, (n - 1) * (n * n - 4)), (1, n - 2, n * n * (n - 1)),
                     (2, n - 1, (n + 2) * (n * n - 3 * n + 4)), (3, n, (n + 1) * (n * n - 2 * n + 4)))),
        ("phi_2", _m((0, n - 2, n * (n - 1)), (2, n, n * n - n + 2))),
        ("phi_1", _m((0, n - 1, 1))),
        ("phi_0", _m((0, n, 1))),
        ("psi_1", _m((1, n - 1, 1))),
        ("psi_0", _m((1, n, 1))),
    ]


def _k1_5_0_m2(n):
    return [
        ("varphi_5", _m((1, 5, 1))), ("varphi_4", _m((1, 4, 1))), ("varphi_3", _m((1, 3, 1))),
        ("varphi_2", _m((1, 2, 2), (4, 5, 3))),
        ("varphi_1", _m((1, 1, 1), (4, 4, 2), (5, 5, 1))),
        ("phi_5", _m((2, 5, 1))), ("phi_4", _m((2, 4, 1))), ("phi_3", _m((2, 3, 1))),
        ("phi_2", _m((2, 2, 1), (5, 5, 1))),
        ("psi_5", _m((3, 5, 1))), ("psi_4", _m((3, 4, 1))), ("psi_3", _m((3, 3, 1))),
    ]


def _k1_6_0_m2(n):
    return [
        ("varphi_6", _m((1, 6, 1))), ("varphi_5", _m((1, 5, 1))), ("varphi_4", _m((1, 4, 1))),
        ("varphi_3", _m((1, 3, 10), (4, 6, 13))),
        ("varphi_2", _m((1, 2, 4), (2, 3, 5), (4, 5, 6), (5, 6, 7))),
        ("varphi_1", _m((1, 1, 1), (3, 3, -1), (4, 4, 2), (5, 5, 1))),
        ("phi_6", _m((2, 6, 1))), ("phi_5", _m((2, 5, 1))), ("phi_4", _m((2, 4, 1))),
        ("phi_3", _m((2, 3, 1))),
        ("phi_2", _m((2, 2, 1), (3, 3, 2), (5, 5, 1), (6, 6, 2))),
        ("psi_6", _m((3, 6, 1))), ("psi_5", _m((3, 5, 1))), ("psi_4", _m((3, 4, 1))),
    ]


def _k1_7_0_m2(n):
    return [
        ("varphi_7", _m((1, 7, 1))), ("varphi_6", _m((1, 6, 1))), ("varphi_5", _m((1, 5, 1))),
        ("varphi_4", _m((1, 4, 5), (4, 7, 6))),
        ("varphi_3", _m((1, 3, 30), (2, 4, 35), (4, 6, 39), (5, 7, 44))),
        ("varphi_2", _m((1, 2, 20), (2, 3, 25), (3, 4, 30), (4, 5, 30), (5, 6, 28), (6, 7, 40))),
        ("varphi_1", _diag(lambda i: i + 2, 1, 7)),
        ("phi_7", _m((2, 7, 1))), ("phi_6", _m((2, 6, 1))), ("phi_5", _m((2, 5, 1))),
        ("psi_7", _m((3, 7, 1))), ("psi_6", _m((3, 6, 1))), ("psi_5", _m((3, 5, 1))),
    ]


def _k1_0_m2(n):
    maps = [
        ("varphi", _diag(lambda i: i + 2, 1, n)),
        ("phi_4", _m((1, n - 4, (n - 3) * (n * n - 4)), (2, n - 3, n * (n - 1) * (n - 2)),
                     (4, n - 1, (n + 2) * (n * n - 5 * n + 12)), (5, n, (n + 1) * (n * n - 4 * n + 12)))),
        ("phi_3", _m((1, n - 3, (n - 1) * (n - 2)), (4, n, n * n - 3 * n + 8))),
        ("phi_2", _m((1, n - 2, 1))),
        ("phi_1", _m((1, n - 1, 1))),
        ("phi_0", _m((1, n, 1))),
    ]
    maps += [(f"psi_{j}", _m((2, n - j, 1))) for j in (2, 1, 0)]
    maps += [(f"pi_{j}", _m((3, n - j, 1))) for j in (2, 1, 0)]
    return maps


FAMILIES: list[Family] = [
    Family("K0:n:1,0", 0, 1, 0, 1, None, "theorem: Der IDD(K^0_n,1,0) = <varphi, phi>, 1 <= n", _k0_1_0),
    Family("K1:n:1,0", 1, 1, 0, 1, None, "theorem: Der IDD(K^1_n,1,0) = <varphi>, 1 <= n", _k1_1_0),
    Family("K0:n:0,-1", 0, 0, -1, 1, None, "theorem: Der IDD(K^0_n,0,-1) = <varphi_i>, 0 <= i <= n", _k0_0_m1),
    Family("K1:n:0,-1", 1, 0, -1, 3, None,
           "theorem: Der IDD(K^1_n,0,-1) = <varphi_i, phi_1, phi_2>, 3 <= n", _k1_0_m1),
    Family("K0:2:2,0", 0, 2, 0, 2, 2, "proposition: Der IDD(K^0_2,2,0), six maps", _k0_2_2_0),
    Family("K0:n:2,0", 0, 2, 0, 3, None, "theorem: Der IDD(K^0_n,2,0) = <varphi, phi>, 3 <= n", _k0_2_0),
    Family("K1:2:2,0", 1, 2, 0, 2, 2, "proposition: Der IDD(K^1_2,2,0) = <varphi, phi>", _k1_2_2_0),
    Family("K1:n:2,0", 1, 2, 0, 3, None, "theorem: Der IDD(K^1_n,2,0) = <varphi>, 3 <= n", _k1_2_0),
    Family("K0:n:1,1", 0, 1, 1, 1, None, "theorem: Der IDD(K^0_n,1,1) = <varphi, phi>, 1 <= n", _k0_1_1),
    Family("K1:n:1,1", 1, 1, 1, 2, None, "theorem: Der IDD(K^1_n,1,1) = <varphi, phi>, 2 <= n", _k1_1_1),
    Family("K0:n:1,-1", 0, 1, -1, 1, None, "theorem: Der IDD(K^0_n,1,-1) = <varphi>, 1 <= n", _k0_1_m1),
    Family("K1:2:1,-1", 1, 1, -1, 2, 2, "proposition: Der IDD(K^1_2,1,-1) = <varphi_1, varphi_2>", _k1_2_1_m1),
    Family("K1:n:1,-1", 1, 1, -1, 3, None,
           "theorem: Der IDD(K^1_n,1,-1) = <varphi, phi_1, phi_2>, 3 <= n", _k1_1_m1),
    Family("K0:2:-1,-1", 0, -1, -1, 2, 2, "proposition: Der IDD(K^0_2,-1,-1), five maps", _k0_2_m1_m1),
    Family("K0:3:-1,-1", 0, -1, -1, 3, 3, "proposition: Der IDD(K^0_3,-1,-1), six maps", _k0_3_m1_m1),
    Family("K0:4:-1,-1", 0, -1, -1, 4, 4, "proposition: Der IDD(K^0_4,-1,-1), eight maps", _k0_4_m1_m1),
    Family("K0:n:-1,-1", 0, -1, -1, 5, None,
           "theorem: Der IDD(K^0_n,-1,-1) = <varphi, phi_i, psi_j>, 5 <= n", _k0_m1_m1),
    Family("K1:4:-1,-1", 1, -1, -1, 4, 4, "proposition: Der IDD(K^1_4,-1,-1), ten maps", _k1_4_tail),
    Family("K1:5:-1,-1", 1, -1, -1, 5, 5, "proposition: Der IDD(K^1_5,-1,-1), twelve maps", _k1_5_m1_m1),
    Family("K1:6:-1,-1", 1, -1, -1, 6, 6, "proposition: Der IDD(K^1_6,-1,-1), fourteen maps", _k1_6_m1_m1),
    Family("K1:7:-1,-1", 1, -1, -1, 7, 7, "proposition: Der IDD(K^1_7,-1,-1), fifteen maps", _k1_7_m1_m1),
    Family("K1:n:-1,-1", 1, -1, -1, 8, None,
           "theorem: Der IDD(K^1_n,-1,-1) = <varphi, phi_i, psi_j, pi_k>, 8 <= n", _k1_m1_m1),
    Family("K0:2:0,-2", 0, 0, -2, 2, 2, "proposition: Der IDD(K^0_2,0,-2), five maps", _k0_2_0_m2),
    Family("K0:3:0,-2", 0, 0, -2, 3, 3, "proposition: Der IDD(K^0_3,0,-2), seven maps", _k0_3_0_m2),
    Family("K0:n:0,-2", 0, 0, -2, 4, None,
           "theorem: Der IDD(K^0_n,0,-2) = <varphi, phi_i, psi_j>, 4 <= n", _k0_0_m2),
    Family("K1:4:0,-2", 1, 0, -2, 4, 4, "proposition: Der IDD(K^1_4,0,-2), ten maps", _k1_4_tail),
    Family("K1:5:0,-2", 1, 0, -2, 5, 5, "proposition: Der IDD(K^1_5,0,-2), twelve maps", _k1_5_0_m2),
    Family("K1:6:0,-2", 1, 0, -2, 6, 6, "proposition: Der IDD(K^1_6,0,-2), fourteen maps", _k1_6_0_m2),
    Family("K1:7:0,-2", 1, 0, -2, 7, 7, "proposition: Der IDD(K^1_7,0,-2), thirteen maps", _k1_7_0_m2),
    Family("K1:n:0,-2", 1, 0, -2, 8, None,
           "theorem: Der IDD(K^1_n,0,-2) = <varphi, phi_i, psi_j, pi_k>, 8 <= n", _k1_0_m2),
]


def find_family(spec: AlgebraSpec) -> Family | None:
    for fam in FAMILIES:
        if fam.covers(spec):
            return fam
    return None


def family_specs(n_max: int) -> list[AlgebraSpec]:
    """Every registered (family, n) instance with ``n <= n_max``."""
    out = []
    for fam in FAMILIES:
        hi = n_max if fam.n_max is None else min(fam.n_max, n_max)
        out += [AlgebraSpec(fam.k, n, fam.m1, fam.m2) for n in range(fam.n_min, hi + 1)]
    return out


@dataclass
class NamedMap:
    name: str
    citation: str
    map: LinearMap


def paper_derivations(spec: AlgebraSpec) -> list[NamedMap]:
    """Named maps for a registered family with ``n`` substituted; empty when unregistered."""
    fam = find_family(spec)
    if fam is None:
        return []
    return [NamedMap(name, fam.citation, LinearMap.from_images(spec, images))
            for name, images in fam.build(spec.n)]


# --- reports ------------------------------------------------------------------------

@dataclass
class DerivationReport:
    spec: AlgebraSpec
    kernel: Subspace
    family: str | None
    paper_basis: list[NamedMap] = field(default_factory=list)
    leibniz: list[LeibnizResult] = field(default_factory=list)
    span_match: bool | None = None
    discrepancies: list[dict] = field(default_factory=list)

    @property
    def kernel_dim(self) -> int:
        return self.kernel.dim

    @property
    def leibniz_ok(self) -> list[bool]:
        return [r.ok for r in self.leibniz]

    @property
    def claimed_dim(self) -> int | None:
        return len(self.paper_basis) if self.family else None

    def kernel_maps(self) -> list[LinearMap]:
        return [LinearMap.from_vector(self.spec, v) for v in self.kernel.basis]

    def to_json(self, include_basis: bool = True) -> dict:
        out = {
            "spec": str(self.spec),
            "kernel_dim": self.kernel_dim,
            "paper_family": self.family,
            "claimed_dim": self.claimed_dim,
            "per_map": [{"name": nm.name, "citation": nm.citation, "leibniz_ok": r.ok,
                         **{k: v for k, v in r.to_json().items() if k != "ok"}}
                        for nm, r in zip(self.paper_basis, self.leibniz)],
            "span_match": self.span_match,
            "discrepancies": self.discrepancies,
        }
        if include_basis:
            out["kernel_basis"] = [[render(c) for c in v] for v in self.kernel.basis]
        return out


def _extra_kernel_vector(kernel: Subspace, claimed: Subspace) -> list[Fraction] | None:
    for v in kernel.basis:
        if not claimed.contains(v):
            return v
    return None


def solve_derivations(spec: AlgebraSpec) -> DerivationReport:
    """Kernel of the Leibniz system, compared with the registered named maps."""
    if spec.infinite:
        raise ValueError("infinite algebras are handled by infinite_family_check")
    t = build_table(spec)
    kernel = derivation_kernel(spec)
    fam = find_family(spec)
    rep = DerivationReport(spec, kernel, fam.key if fam else None)
    if fam is None:
        return rep
    rep.paper_basis = paper_derivations(spec)
    rep.leibniz = [check_leibniz(t, nm.map) for nm in rep.paper_basis]
    for nm, res in zip(rep.paper_basis, rep.leibniz):
        if not res.ok:
            i, j = res.witness
            rep.discrepancies.append({
                "kind": "named_map_fails_leibniz", "map": nm.name, "citation": nm.citation,
                "witness": [i, j], "formula": nm.map.describe(),
            })
    d2 = spec.dim ** 2
    paper_span = Subspace.span([nm.map.to_vector() for nm in rep.paper_basis], d2)
    rep.span_match = all(rep.leibniz_ok) and paper_span == kernel
    if len(rep.paper_basis) != kernel.dim:
        rep.discrepancies.append({"kind": "dimension_mismatch", "claimed": len(rep.paper_basis),
                                  "kernel_dim": kernel.dim, "paper_span_dim": paper_span.dim})
    if paper_span != kernel:
        extra = _extra_kernel_vector(kernel, paper_span)
        if extra is not None:
            D = LinearMap.from_vector(spec, extra)
            rep.discrepancies.append({
                "kind": "derivation_outside_named_span", "map": D.describe(),
                "leibniz_ok": check_leibniz(t, D).ok,
            })
        if paper_span.dim != len(rep.paper_basis):
            rep.discrepancies.append({"kind": "named_maps_dependent", "listed": len(rep.paper_basis),
                                      "span_dim": paper_span.dim})
    return rep


def random_kernel_map(rep: DerivationReport, rng: random.Random) -> LinearMap:
    vec = [Fraction(0)] * (rep.spec.dim ** 2)
    for b in rep.kernel.basis:
        c = rng.randint(-9, 9)
        if c:
            for idx, x in enumerate(b):
                if x:
                    vec[idx] += c * x
    return LinearMap.from_vector(rep.spec, vec)


def random_non_kernel_map(rep: DerivationReport, rng: random.Random) -> LinearMap:
    d2 = rep.spec.dim ** 2
    while True:
        vec = [Fraction(rng.randint(-5, 5)) if rng.random() < 0.3 else Fraction(0) for _ in range(d2)]
        if not rep.kernel.contains(vec):
            return LinearMap.from_vector(rep.spec, vec)


# --- infinite windows -----------------------------------------------------------------

MapFormula = Callable[[int], Image]


@dataclass(frozen=True)
class InfiniteFamily:
    key: str
    k: int
    m1: int
    m2: int
    citation: str
    maps: Callable[[int], list[tuple[str, MapFormula]]]  # window bound -> formulas
    generators_claimed: int | None = None


def _f_diag(f):
    return lambda q: {q: Fraction(f(q))} if f(q) else {}


def _f_lower(skip=()):
    return lambda q: {q - 1: Fraction(q)} if q >= 1 and q not in skip else {}


def _shift_family(offset, coeff, lo_i):
    def build(N):
        return [(f"varphi_{i}", (lambda i: lambda q: {q + i + offset: Fraction(coeff(i, q))})(i))
                for i in range(lo_i, N + 1)]
    return build


INFINITE_FAMILIES: list[InfiniteFamily] = [
    InfiniteFamily("K0:inf:1,0", 0, 1, 0, "corollary: Der IDD(K^0_inf,1,0) = <varphi, phi>",
                   lambda N: [("varphi", _f_diag(lambda i: i - 1)), ("phi", _f_lower())]),
    InfiniteFamily("K0:inf:0,-1", 0, 0, -1, "corollary: Der IDD(K^0_inf,0,-1) = <varphi_i>, i >= 0",
                   _shift_family(0, lambda i, q: i + 1 + q, 0)),
    InfiniteFamily("K1:inf:0,-1", 1, 0, -1, "corollary: Der IDD(K^1_inf,0,-1) = <varphi_i>, i >= 1",
                   _shift_family(-1, lambda i, q: i + q, 1)),
    InfiniteFamily("K0:inf:2,0", 0, 2, 0, "corollary: Der IDD(K^0_inf,2,0) = <varphi, phi>",
                   lambda N: [("varphi", _f_diag(lambda i: i - 2)), ("phi", _f_lower())]),
    InfiniteFamily("K1:inf:2,0", 1, 2, 0, "corollary: Der IDD(K^1_inf,2,0) = <varphi, phi>",
                   lambda N: [("varphi", _f_diag(lambda i: i - 2))], generators_claimed=2),
    InfiniteFamily("K0:inf:1,1", 0, 1, 1, "corollary: Der IDD(K^0_inf,1,1) = <varphi, phi>",
                   lambda N: [("varphi", _f_diag(lambda i: i - 2)), ("phi", _f_lower())]),
    InfiniteFamily("K1:inf:1,1", 1, 1, 1, "corollary: Der IDD(K^1_inf,1,1) = <varphi, phi>",
                   lambda N: [("varphi", _f_diag(lambda i: i - 2)), ("phi", _f_lower(skip=(1,)))]),
    InfiniteFamily("K0:inf:1,-1", 0, 1, -1, "corollary: Der IDD(K^0_inf,1,-1) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i))]),
    InfiniteFamily("K1:inf:1,-1", 1, 1, -1, "corollary: Der IDD(K^1_inf,1,-1) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i))]),
    InfiniteFamily("K0:inf:-1,-1", 0, -1, -1, "corollary: Der IDD(K^0_inf,-1,-1) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i + 2))]),
    InfiniteFamily("K1:inf:-1,-1", 1, -1, -1, "corollary: Der IDD(K^1_inf,-1,-1) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i + 2))]),
    InfiniteFamily("K0:inf:0,-2", 0, 0, -2, "corollary: Der IDD(K^0_inf,0,-2) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i + 2))]),
    InfiniteFamily("K1:inf:0,-2", 1, 0, -2, "corollary: Der IDD(K^1_inf,0,-2) = <varphi>",
                   lambda N: [("varphi", _f_diag(lambda i: i + 2))]),
]


def find_infinite_family(spec: AlgebraSpec) -> InfiniteFamily | None:
    for fam in INFINITE_FAMILIES:
        if (fam.k, fam.m1, fam.m2) == (spec.k, spec.m1, spec.m2):
            return fam
    return None


def _restrict(spec: AlgebraSpec, formula: MapFormula) -> LinearMap:
    return LinearMap.from_images(spec, {q: formula(q) for q in spec.indices})


def _interior_projection(vec, d: int, keep: int) -> list[Fraction]:
    """Entries ``D[p][q]`` with both positions below ``keep``."""
    return [vec[q * d + p] for q in range(keep) for p in range(keep)]


def infinite_family_check(spec: AlgebraSpec, family: InfiniteFamily | None = None,
                          margin: int = DEFAULT_MARGIN) -> dict:
    """Corollary maps on a truncation window ``e_k .. e_N``.

    (a) Each formula satisfies Leibniz on every pair whose products and
    images stay inside the window.  (b) The finite algebra on the window is
    solved; kernel vectors vanishing on the interior block
    ``e_k .. e_(N-margin)`` are boundary artifacts of the truncation, and the
    interior block of the remaining kernel must lie in the interior block of
    the corollary span.
    """
    if not spec.infinite:
        raise ValueError("expected a truncation window K<k>:inf@<N>")
    family = family or find_infinite_family(spec)
    if family is None:
        raise ValueError(f"no corollary registered for {spec}")
    if margin <= 0:
        raise WindowTooSmall("margin must be positive to separate boundary derivations")
    interior_top = spec.n - margin
    if interior_top < spec.k + 2:
        raise WindowTooSmall(f"window N={spec.n} leaves no interior with margin {margin}")
    t = build_table(spec)
    per_map = []
    formulas = family.maps(spec.n)
    for name, f in formulas:
        res = leibniz_scan(t, f)
        per_map.append({"name": name, **res.to_json()})

    finite = AlgebraSpec(spec.k, spec.n, spec.m1, spec.m2)
    d = finite.dim
    keep = interior_top - spec.k + 1
    kernel = derivation_kernel(finite)
    proj_kernel = Subspace.span([_interior_projection(v, d, keep) for v in kernel.basis], keep * keep)
    boundary_dim = kernel.dim - proj_kernel.dim
    restricted = [_restrict(finite, f).to_vector() for _, f in formulas]
    proj_cor = Subspace.span([_interior_projection(v, d, keep) for v in restricted], keep * keep)
    extra = None
    for v in proj_kernel.basis:
        if not proj_cor.contains(v):
            extra = v
            break
    out = {
        "spec": str(spec),
        "family": family.key,
        "citation": family.citation,
        "margin": margin,
        "per_map": per_map,
        "leibniz_ok": all(m["ok"] for m in per_map),
        "safe_pairs_checked": sum(m["checked"] for m in per_map),
        "window_kernel_dim": kernel.dim,
        "boundary_dim": boundary_dim,
        "interior_dim": proj_kernel.dim,
        "corollary_interior_dim": proj_cor.dim,
        "interior_within_corollary": extra is None,
        "interior_equal": proj_kernel == proj_cor,
    }
    if family.generators_claimed is not None and family.generators_claimed != len(formulas):
        out["generator_count_mismatch"] = {"claimed": family.generators_claimed, "defined": len(formulas)}
    if extra is not None:
        out["extra_interior"] = [render(c) for c in extra]
    return out
