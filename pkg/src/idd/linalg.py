"""Exact linear algebra over the rationals.

Elimination is done on sparse integer rows: every incoming row is scaled to
a primitive integer vector, forward elimination uses cross-multiplication
followed by content removal, and only the final back-substitution produces
fractions.  Pivots are the first nonzero column of each row; the reduced
row-echelon form is unique, so results do not depend on row order.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from idd.scalars import render


class DimensionMismatch(ValueError):
    pass


class RatMatrix:
    """Dense row-major rational matrix."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Sequence | None = None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            entries = [Fraction(0)] * (rows * cols)
        entries = [Fraction(x) for x in entries]
        if len(entries) != rows * cols:
            raise DimensionMismatch(f"{len(entries)} entries for a {rows}x{cols} matrix")
        self.entries = entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatch("ragged rows")
        return cls(len(rows), cols, [x for r in rows for x in r])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        m = cls(n, n)
        for i in range(n):
            m.entries[i * n + i] = Fraction(1)
        return m

    def __getitem__(self, rc: tuple[int, int]) -> Fraction:
        r, c = rc
        return self.entries[r * self.cols + c]

    def __setitem__(self, rc: tuple[int, int], value) -> None:
        r, c = rc
        self.entries[r * self.cols + c] = Fraction(value)

    def row(self, r: int) -> list[Fraction]:
        return self.entries[r * self.cols:(r + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [self.row(r) for r in range(self.rows)]

    def column(self, c: int) -> list[Fraction]:
        return [self.entries[r * self.cols + c] for r in range(self.rows)]

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = RatMatrix(self.rows, other.cols)
        for i in range(self.rows):
            for t in range(self.cols):
                a = self.entries[i * self.cols + t]
                if a == 0:
                    continue
                for j in range(other.cols):
                    b = other.entries[t * other.cols + j]
                    if b:
                        out.entries[i * other.cols + j] += a * b
        return out

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch")
        return RatMatrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch")
        return RatMatrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def scale(self, s) -> "RatMatrix":
        s = Fraction(s)
        return RatMatrix(self.rows, self.cols, [s * a for a in self.entries])

    def apply(self, v: Sequence) -> list[Fraction]:
        if len(v) != self.cols:
            raise DimensionMismatch("vector length")
        out = []
        for r in range(self.rows):
            base = r * self.cols
            out.append(sum((self.entries[base + c] * v[c] for c in range(self.cols) if v[c]), Fraction(0)))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def to_json(self) -> list[list[str]]:
        return [[render(x) for x in self.row(r)] for r in range(self.rows)]

    def __repr__(self) -> str:
        return f"RatMatrix({self.to_json()})"


# --- sparse integer elimination ---------------------------------------------

SparseRow = dict  # column -> int, no zero values


def _primitive(row: SparseRow) -> SparseRow:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g not in (1,):
        row = {c: v // g for c, v in row.items()}
    return row


def integer_row(values: dict | Sequence) -> SparseRow:
    """Clear denominators of a rational row; returns a primitive integer row."""
    items = values.items() if isinstance(values, dict) else enumerate(values)
    fr = {c: Fraction(v) for c, v in items if v != 0}
    if not fr:
        return {}
    den = lcm(*(v.denominator for v in fr.values()))
    return _primitive({c: int(v * den) for c, v in fr.items()})


class Echelon:
    """Incrementally maintained row-echelon basis of a row space."""

    def __init__(self, cols: int):
        self.cols = cols
        self.pivots: dict[int, SparseRow] = {}

    def reduce(self, row: SparseRow) -> SparseRow:
        row = dict(row)
        while row:
            c = min(row)
            p = self.pivots.get(c)
            if p is None:
                return _primitive(row)
            a, b = p[c], row[c]
            g = gcd(a, b)
            a //= g
            b //= g
            new = {col: a * v for col, v in row.items()}
            for col, v in p.items():
                nv = new.get(col, 0) - b * v
                if nv:
                    new[col] = nv
                else:
                    new.pop(col, None)
            row = _primitive(new) if new else new
        return row

    def add(self, row: SparseRow) -> bool:
        """Insert a row; returns True when it raised the rank."""
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduced_rows(self) -> list[dict[int, Fraction]]:
        """Back-substitute to reduced row-echelon form, pivots scaled to 1."""
        done: dict[int, SparseRow] = {}
        for c in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[c])
            for col in sorted(k for k in row if k != c and k in done):
                if col not in row:
                    continue
                q = done[col]
                a, b = q[col], row[col]
                g = gcd(a, b)
                a //= g
                b //= g
                new = {k: a * v for k, v in row.items()}
                for k, v in q.items():
                    nv = new.get(k, 0) - b * v
                    if nv:
                        new[k] = nv
                    else:
                        new.pop(k, None)
                row = _primitive(new)
            done[c] = row
        out = []
        for c in sorted(done):
            row = done[c]
            piv = row[c]
            out.append({k: Fraction(v, piv) for k, v in sorted(row.items())})
        return out


def rref(m: RatMatrix) -> tuple[RatMatrix, list[int]]:
    """Reduced row-echelon form and pivot columns; zero rows go to the bottom."""
    ech = Echelon(m.cols)
    for r in range(m.rows):
        ech.add(integer_row(m.row(r)))
    rows = ech.reduced_rows()
    out = RatMatrix(m.rows, m.cols)
    pivots = []
    for r, row in enumerate(rows):
        pivots.append(min(row))
        for c, v in row.items():
            out[r, c] = v
    return out, pivots


def matrix_rank(m: RatMatrix) -> int:
    ech = Echelon(m.cols)
    for r in range(m.rows):
        ech.add(integer_row(m.row(r)))
    return ech.rank


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix over GF(p); an independent check on elimination."""
    mat = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = pow(mat[rank][c], -1, p)
        mat[rank] = [x * inv % p for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [(x - f * y) % p for x, y in zip(mat[r], mat[rank])]
        rank += 1
    return rank


def kernel_from_echelon(ech: Echelon) -> "Subspace":
    rows = ech.reduced_rows()
    pivot_cols = [min(r) for r in rows]
    pset = set(pivot_cols)
    free = [c for c in range(ech.cols) if c not in pset]
    # column f of the kernel basis: x_f = 1, x_pivot = -row[f]
    by_free: dict[int, list[tuple[int, Fraction]]] = {f: [] for f in free}
    for pc, row in zip(pivot_cols, rows):
        for c, v in row.items():
            if c != pc:
                by_free[c].append((pc, -v))
    vecs = []
    for f in free:
        v = [Fraction(0)] * ech.cols
        v[f] = Fraction(1)
        for pc, val in by_free[f]:
            v[pc] = val
        vecs.append(v)
    return Subspace.span(vecs, ech.cols)


def kernel(m: RatMatrix) -> "Subspace":
    """Canonical basis of ``{x : m x = 0}``."""
    ech = Echelon(m.cols)
    for r in range(m.rows):
        ech.add(integer_row(m.row(r)))
    return kernel_from_echelon(ech)


class Subspace:
    """Subspace of Q^d stored by its reduced row-echelon basis.

    The stored basis is canonical, so equality of subspaces is equality of
    the stored tuples.
    """

    __slots__ = ("ambient_dim", "basis", "_pivots")

    def __init__(self, ambient_dim: int, basis: Sequence[Sequence[Fraction]] = ()):
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(v) for v in basis)
        self._pivots = [next(c for c, x in enumerate(v) if x != 0) for v in self.basis]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        ech = Echelon(ambient_dim)
        for v in vectors:
            if len(v) != ambient_dim:
                raise DimensionMismatch(f"vector of length {len(v)} in Q^{ambient_dim}")
            ech.add(integer_row(v))
        return cls._from_echelon(ech)

    @classmethod
    def _from_echelon(cls, ech: Echelon) -> "Subspace":
        basis = []
        for row in ech.reduced_rows():
            v = [Fraction(0)] * ech.cols
            for c, x in row.items():
                v[c] = x
            basis.append(v)
        return cls(ech.cols, basis)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.span(RatMatrix.identity(ambient_dim).to_rows(), ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> list[int]:
        return list(self._pivots)

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatch("vector length")
        w = [Fraction(x) for x in v]
        for p, b in zip(self._pivots, self.basis):
            f = w[p]
            if f:
                w = [x - f * y for x, y in zip(w, b)]
        return not any(w)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def is_coordinate(self) -> bool:
        """True when spanned by standard basis vectors."""
        return all(sum(1 for x in v if x) == 1 for v in self.basis)

    def to_json(self) -> list[list[str]]:
        return [[render(x) for x in v] for v in self.basis]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim})"


def span(vectors: Iterable[Sequence], ambient_dim: int) -> Subspace:
    return Subspace.span(vectors, ambient_dim)


def contains(s: Subspace, v: Sequence) -> bool:
    return s.contains(v)


def equal(a: Subspace, b: Subspace) -> bool:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"Q^{a.ambient_dim} vs Q^{b.ambient_dim}")
    return a.basis == b.basis


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"Q^{a.ambient_dim} vs Q^{b.ambient_dim}")
    return Subspace.span(list(a.basis) + list(b.basis), a.ambient_dim)
