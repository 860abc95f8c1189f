"""Exact integer/rational linear algebra: HNF, SNF, full-rank Z-lattices.

Everything here is exact; there is no floating point anywhere in this module.
Matrices act on row vectors: a lattice is the row span of its basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, lcm
from typing import Iterable, Sequence

from .errors import DimensionMismatch

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and strings like "3/4" or "-2" into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix, row-major, arbitrary precision entries."""

    entries: tuple[tuple[int, ...], ...]
    ncols: int

    def __post_init__(self):
        for row in self.entries:
            if len(row) != self.ncols:
                raise DimensionMismatch("ragged matrix rows")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], ncols: int | None = None) -> IntMatrix:
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        if ncols is None:
            if not rows:
                raise DimensionMismatch("ncols required for an empty matrix")
            ncols = len(rows[0])
        return cls(rows, ncols)

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @classmethod
    def zero(cls, m: int, n: int) -> IntMatrix:
        return cls(tuple((0,) * n for _ in range(m)), n)

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def rows(self) -> int:
        return self.nrows

    @property
    def cols(self) -> int:
        return self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def transpose(self) -> IntMatrix:
        return IntMatrix(tuple(tuple(self.entries[i][j] for i in range(self.nrows))
                               for j in range(self.ncols)), self.nrows)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        cols = other.transpose().entries
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols)
                               for r in self.entries), other.ncols)

    def to_json(self) -> list[list[str]]:
        return [[str(v) for v in r] for r in self.entries]

    @classmethod
    def from_json(cls, data, ncols: int | None = None) -> IntMatrix:
        return cls.from_rows([[int(str(v)) for v in r] for r in data], ncols)


# ---------------------------------------------------------------------------
# Hermite normal form

def _hnf_rows(rows: list[list[int]], ncols: int, track: bool):
    A = [list(r) for r in rows]
    m = len(A)
    U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None

    def sub(i, k, q):
        if q:
            Ak = A[k]
            A[i] = [a - q * b for a, b in zip(A[i], Ak)]
            if track:
                U[i] = [a - q * b for a, b in zip(U[i], U[k])]

    def swap(i, k):
        A[i], A[k] = A[k], A[i]
        if track:
            U[i], U[k] = U[k], U[i]

    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][c]))
            swap(r, piv)
            clean = True
            for i in range(r + 1, m):
                if A[i][c]:
                    sub(i, r, A[i][c] // A[r][c])
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-a for a in A[r]]
            if track:
                U[r] = [-a for a in U[r]]
        for i in range(r):
            sub(i, r, A[i][c] // A[r][c])
        r += 1
    return A, U, r


def hnf(m: IntMatrix) -> IntMatrix:
    """Canonical row-style Hermite normal form with zero rows removed.

    Pivots are positive and entries above a pivot lie in [0, pivot).
    """
    A, _, r = _hnf_rows(m.tolist(), m.ncols, track=False)
    return IntMatrix.from_rows(A[:r], m.ncols)


def hnf_with_transform(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, int]:
    """Return (H, U, rank) with U unimodular and U @ m == H (zero rows kept at the bottom)."""
    A, U, r = _hnf_rows(m.tolist(), m.ncols, track=True)
    return (IntMatrix.from_rows(A, m.ncols), IntMatrix.from_rows(U, m.nrows), r)


def left_kernel(m: IntMatrix) -> IntMatrix:
    """HNF basis of {x in Z^rows : x @ m == 0}."""
    _, U, r = hnf_with_transform(m)
    ker = U.entries[r:]
    if not ker:
        return IntMatrix.zero(0, m.nrows)
    return hnf(IntMatrix.from_rows(ker, m.nrows))


def right_kernel(m: IntMatrix) -> IntMatrix:
    """HNF basis (as rows) of {x in Z^cols : m @ x == 0}."""
    return left_kernel(m.transpose())


# ---------------------------------------------------------------------------
# Smith normal form

def smith_decomp(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (D, U, V) with U, V unimodular, U @ m @ V == D diagonal and d1 | d2 | ..."""
    A = m.tolist()
    nr, nc = m.nrows, m.ncols
    U = [[int(i == j) for j in range(nr)] for i in range(nr)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def row_op(i, k, q):  # row_i -= q row_k
        A[i] = [a - q * b for a, b in zip(A[i], A[k])]
        U[i] = [a - q * b for a, b in zip(U[i], U[k])]

    def col_op(j, k, q):  # col_j -= q col_k
        for row in A:
            row[j] -= q * row[k]
        for row in V:
            row[j] -= q * row[k]

    def row_swap(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]

    def col_swap(j, k):
        for row in A:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    for t in range(min(nr, nc)):
        cand = [(abs(A[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if A[i][j]]
        if not cand:
            break
        _, i0, j0 = min(cand)
        row_swap(t, i0)
        col_swap(t, j0)
        while True:
            for i in range(t + 1, nr):
                if A[i][t]:
                    row_op(i, t, A[i][t] // A[t][t])
            for j in range(t + 1, nc):
                if A[t][j]:
                    col_op(j, t, A[t][j] // A[t][t])
            rest = [(abs(A[i][t]), i, t) for i in range(t + 1, nr) if A[i][t]]
            rest += [(abs(A[t][j]), t, j) for j in range(t + 1, nc) if A[t][j]]
            if rest:
                _, i0, j0 = min(rest)
                if i0 != t:
                    row_swap(t, i0)
                else:
                    col_swap(t, j0)
                continue
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            # row_t += row_i, then the column sweep restores divisibility
            row_op(t, bad[0], -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    return (IntMatrix.from_rows(A, nc), IntMatrix.from_rows(U, nr), IntMatrix.from_rows(V, nc))


def snf(m: IntMatrix) -> tuple[IntMatrix, list[int]]:
    """Smith normal form and its invariant factors (length min(rows, cols))."""
    D, _, _ = smith_decomp(m)
    return D, [D.entries[i][i] for i in range(min(m.nrows, m.ncols))]


def cokernel_invariants(m: IntMatrix) -> list[int]:
    """Invariant factors of Z^cols / rowspan(m), trivial factors dropped, 0 = free summand."""
    _, factors = snf(m) if m.nrows else (None, [])
    factors = factors + [0] * (m.ncols - len(factors))
    return [d for d in factors if d != 1]


# ---------------------------------------------------------------------------
# rational linear algebra

def rat_matrix(rows) -> list[list[Fraction]]:
    return [[as_fraction(v) for v in r] for r in rows]


def rat_det(M: Sequence[Sequence[Fraction]]) -> Fraction:
    A = [list(map(Fraction, r)) for r in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] * inv
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def rat_inverse(M: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(M)
    A = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [a * inv for a in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [r[n:] for r in A]


def vec_mat(v: Sequence[Fraction], M: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Row vector times matrix."""
    ncols = len(M[0]) if M else 0
    out = [Fraction(0)] * ncols
    for a, row in zip(v, M):
        if a:
            out = [o + a * b for o, b in zip(out, row)]
    return out


def rat_matmul(A, B) -> list[list[Fraction]]:
    return [vec_mat(r, B) for r in A]


def rat_rank(M) -> int:
    A = [list(map(Fraction, r)) for r in M]
    if not A:
        return 0
    rank, ncols = 0, len(A[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(rank + 1, len(A)):
            f = A[i][c] / A[rank][c]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def _lcm_den(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (v.denominator for v in values), 1)


# ---------------------------------------------------------------------------
# full-rank lattices

@dataclass(frozen=True)
class ZLattice:
    """Full-rank Z-lattice (1/denominator) * rowspan(basis), basis in canonical HNF.

    Two equal lattices have identical (basis, denominator), so dataclass equality
    is lattice equality.
    """

    ambient_dim: int
    basis: IntMatrix
    denominator: int

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], ambient_dim: int | None = None) -> ZLattice:
        rows = [[as_fraction(v) for v in r] for r in rows]
        if ambient_dim is None:
            if not rows:
                raise DimensionMismatch("ambient_dim required for empty generator list")
            ambient_dim = len(rows[0])
        if any(len(r) != ambient_dim for r in rows):
            raise DimensionMismatch("generator length differs from ambient dimension")
        d = _lcm_den(v for r in rows for v in r)
        H = hnf(IntMatrix.from_rows([[int(v * d) for v in r] for r in rows], ambient_dim))
        if H.nrows != ambient_dim:
            raise DimensionMismatch(f"generators span rank {H.nrows} < {ambient_dim}")
        g = reduce(gcd, (v for r in H.entries for v in r), d)
        if g > 1:
            H = IntMatrix.from_rows([[v // g for v in r] for r in H.entries], ambient_dim)
            d //= g
        return cls(ambient_dim, H, d)

    @classmethod
    def standard(cls, n: int) -> ZLattice:
        return cls(n, IntMatrix.identity(n), 1)

    @cached_property
    def rational_basis(self) -> list[list[Fraction]]:
        d = self.denominator
        return [[Fraction(v, d) for v in r] for r in self.basis.entries]

    @cached_property
    def _inverse(self) -> list[list[Fraction]]:
        return rat_inverse(self.rational_basis)

    @cached_property
    def volume(self) -> Fraction:
        """|det| of the basis, i.e. the covolume relative to Z^n."""
        det = 1
        for i in range(self.ambient_dim):
            det *= self.basis.entries[i][i]
        return Fraction(abs(det), self.denominator ** self.ambient_dim)

    def coordinates(self, vec: Sequence) -> list[Fraction]:
        return vec_mat([as_fraction(v) for v in vec], self._inverse)

    def __contains__(self, vec) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(vec))

    def issubset(self, other: ZLattice) -> bool:
        self._check(other)
        return all(r in other for r in self.rational_basis)

    def scale(self, c) -> ZLattice:
        c = as_fraction(c)
        return ZLattice.from_rows([[c * v for v in r] for r in self.rational_basis], self.ambient_dim)

    def dual(self) -> ZLattice:
        inv = self._inverse
        n = self.ambient_dim
        return ZLattice.from_rows([[inv[j][i] for j in range(n)] for i in range(n)], n)

    def _check(self, other: ZLattice):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch(f"ambient dimensions {self.ambient_dim} != {other.ambient_dim}")

    def to_json(self) -> dict:
        return {"basis": self.basis.to_json(), "denominator": str(self.denominator)}

    @classmethod
    def from_json(cls, data) -> ZLattice:
        B = IntMatrix.from_json(data["basis"])
        d = int(data.get("denominator", 1))
        return cls.from_rows([[Fraction(v, d) for v in r] for r in B.entries], B.ncols)


def lattice_sum(a: ZLattice, b: ZLattice) -> ZLattice:
    a._check(b)
    return ZLattice.from_rows(a.rational_basis + b.rational_basis, a.ambient_dim)


def lattice_intersect(a: ZLattice, b: ZLattice) -> ZLattice:
    # (A ∩ B)^* = A^* + B^* for full lattices
    a._check(b)
    return lattice_sum(a.dual(), b.dual()).dual()


def lattice_index(sub: ZLattice, sup: ZLattice) -> Fraction:
    """Generalized index [sup : sub] = vol(sub) / vol(sup); defined for non-nested lattices too."""
    sub._check(sup)
    return sub.volume / sup.volume
