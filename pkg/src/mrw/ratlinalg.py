"""Exact linear algebra over arbitrary-precision rationals.

Matrices are immutable value objects backed by ``fractions.Fraction``, so every
operation here is a pure function whose output is reproducible bit for bit.
Rank and determinant use fraction-free (Bareiss-style) elimination with a
canonical pivot rule -- first nonzero entry in column order -- and the
characteristic polynomial is computed by the Faddeev-LeVerrier recurrence,
which stays inside the rationals.  Nothing in this module touches floating
point: separation claims elsewhere in the workbench rely on exact rank values,
where float pivoting could silently misreport.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionError, ValidationError

RationalLike = Fraction | int | str


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce ints, ``"p/q"`` strings and Fractions to canonical Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError("boolean is not a rational entry")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise ValidationError(f"cannot interpret {value!r} as an exact rational")


class RatMatrix:
    """Dense matrix of exact rationals, stored row-major and immutable.

    Entries are always held in canonical form (positive denominator, reduced),
    which ``Fraction`` guarantees.  Equality and hashing follow value
    semantics.
    """

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: int, cols: int, entries: Iterable[RationalLike]):
        if rows < 1 or cols < 1:
            raise DimensionError(f"matrix shape {rows}x{cols} must be at least 1x1")
        data = tuple(as_fraction(e) for e in entries)
        if len(data) != rows * cols:
            raise DimensionError(
                f"expected {rows * cols} entries for {rows}x{cols}, got {len(data)}"
            )
        self.rows = rows
        self.cols = cols
        self._entries = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]]) -> "RatMatrix":
        if not rows or not rows[0]:
            raise DimensionError("from_rows needs at least one row and column")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), ncols, [v for r in rows for v in r])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index ({i}, {j}) out of range for {self.rows}x{self.cols}")
        return self._entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._entries[i * self.cols : (i + 1) * self.cols]

    def iter_rows(self) -> Iterable[tuple[Fraction, ...]]:
        for i in range(self.rows):
            yield self.row(i)

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return self._entries

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            self.cols,
            self.rows,
            [self._entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)],
        )

    def entry_sum(self) -> Fraction:
        return sum(self._entries, Fraction(0))

    def is_symmetric(self) -> bool:
        return self.is_square and all(
            self[i, j] == self[j, i] for i in range(self.rows) for j in range(i + 1, self.cols)
        )

    def is_antisymmetric(self) -> bool:
        return self.is_square and all(
            self[i, j] == -self[j, i] for i in range(self.rows) for j in range(i, self.cols)
        )

    def map_entries(self, fn) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, [fn(e) for e in self._entries])

    def to_float_rows(self) -> list[list[float]]:
        return [[float(e) for e in self.row(i)] for i in range(self.rows)]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, RatMatrix)
            and self.shape == other.shape
            and self._entries == other._entries
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._entries))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(e) for e in row) for row in self.iter_rows())
        return f"RatMatrix({self.rows}x{self.cols}: {body})"


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial, coefficients indexed low to high.

    ``coeffs[k]`` multiplies x^k; the leading coefficient is always 1.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[-1] != 1:
            raise ValidationError("characteristic polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __str__(self) -> str:
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append("x" if c == 1 else f"{c}*x")
            else:
                parts.append(f"x^{k}" if c == 1 else f"{c}*x^{k}")
        return " + ".join(parts) if parts else "0"


def _require_same_shape(a: RatMatrix, b: RatMatrix, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op} needs matching shapes, got {a.shape} and {b.shape}")


def rank_exact(m: RatMatrix) -> int:
    """Exact rank over the rationals by fraction-free elimination.

    Pivots are chosen canonically (first nonzero entry scanning columns left
    to right, rows top to bottom), so intermediate values never depend on
    scheduling.  The Bareiss update keeps entries as exact minors, which
    bounds coefficient growth on integer input.
    """
    work = [list(row) for row in m.iter_rows()]
    rows, cols = m.rows, m.cols
    pivot_row = 0
    prev_pivot = Fraction(1)
    for col in range(cols):
        if pivot_row == rows:
            break
        pivot = next((r for r in range(pivot_row, rows) if work[r][col] != 0), None)
        if pivot is None:
            continue
        if pivot != pivot_row:
            work[pivot_row], work[pivot] = work[pivot], work[pivot_row]
        piv = work[pivot_row][col]
        for r in range(pivot_row + 1, rows):
            factor = work[r][col]
            if factor == 0:
                # Still rescale so later divisions by prev_pivot stay exact.
                for c in range(col + 1, cols):
                    work[r][c] = (piv * work[r][c]) / prev_pivot
            else:
                row_p = work[pivot_row]
                row_r = work[r]
                for c in range(col + 1, cols):
                    row_r[c] = (piv * row_r[c] - factor * row_p[c]) / prev_pivot
            work[r][col] = Fraction(0)
        prev_pivot = piv
        pivot_row += 1
    return pivot_row


def det_exact(m: RatMatrix) -> Fraction:
    """Exact determinant via Bareiss elimination with sign tracking."""
    if not m.is_square:
        raise DimensionError(f"determinant needs a square matrix, got {m.shape}")
    n = m.rows
    work = [list(row) for row in m.iter_rows()]
    sign = 1
    prev_pivot = Fraction(1)
    for k in range(n - 1):
        pivot = next((r for r in range(k, n) if work[r][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            work[k], work[pivot] = work[pivot], work[k]
            sign = -sign
        piv = work[k][k]
        for r in range(k + 1, n):
            factor = work[r][k]
            row_k = work[k]
            row_r = work[r]
            for c in range(k + 1, n):
                row_r[c] = (piv * row_r[c] - factor * row_k[c]) / prev_pivot
            row_r[k] = Fraction(0)
        prev_pivot = piv
    return sign * work[n - 1][n - 1]


def mat_mul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    bt = b.transpose()
    out = []
    for i in range(a.rows):
        ra = a.row(i)
        for j in range(b.cols):
            cb = bt.row(j)
            out.append(sum((x * y for x, y in zip(ra, cb) if x and y), Fraction(0)))
    return RatMatrix(a.rows, b.cols, out)


def mat_add(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    _require_same_shape(a, b, "addition")
    return RatMatrix(a.rows, a.cols, [x + y for x, y in zip(a.entries, b.entries)])


def mat_scale(a: RatMatrix, s: RationalLike) -> RatMatrix:
    sf = as_fraction(s)
    return RatMatrix(a.rows, a.cols, [sf * x for x in a.entries])


def trace(m: RatMatrix) -> Fraction:
    if not m.is_square:
        raise DimensionError("trace needs a square matrix")
    return sum((m[i, i] for i in range(m.rows)), Fraction(0))


def char_poly_exact(m: RatMatrix) -> CharPoly:
    """Characteristic polynomial det(xI - M) by Faddeev-LeVerrier.

    The recurrence M_1 = M, c_{n-1} = -tr(M_1),
    M_k = M (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k)/k stays exact over the
    rationals; no root finding is involved.
    """
    if not m.is_square:
        raise DimensionError(f"characteristic polynomial needs a square matrix, got {m.shape}")
    n = m.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    ident = RatMatrix.identity(n)
    mk = m
    coeffs[n - 1] = -trace(mk)
    for k in range(2, n + 1):
        shifted = mat_add(mk, mat_scale(ident, coeffs[n - k + 1]))
        mk = mat_mul(m, shifted)
        coeffs[n - k] = -trace(mk) / k
    return CharPoly(tuple(coeffs))


def hadamard(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Entrywise product of two equally shaped matrices."""
    _require_same_shape(a, b, "entrywise product")
    return RatMatrix(a.rows, a.cols, [x * y for x, y in zip(a.entries, b.entries)])


def kronecker(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Kronecker product, shape (ra*rb) x (ca*cb)."""
    out = []
    for i in range(a.rows):
        for k in range(b.rows):
            for j in range(a.cols):
                aij = a[i, j]
                row_b = b.row(k)
                out.extend(aij * v for v in row_b)
    return RatMatrix(a.rows * b.rows, a.cols * b.cols, out)


def submatrix(m: RatMatrix, row_idx: Sequence[int], col_idx: Sequence[int]) -> RatMatrix:
    """Select rows/columns in the given order.

    Empty index lists are rejected: 0x0 matrices would force degenerate rank
    conventions downstream.
    """
    if not row_idx or not col_idx:
        raise ValidationError("submatrix index lists must be nonempty")
    for i in row_idx:
        if not (0 <= i < m.rows):
            raise IndexError(f"row index {i} out of range for {m.rows} rows")
    for j in col_idx:
        if not (0 <= j < m.cols):
            raise IndexError(f"column index {j} out of range for {m.cols} columns")
    return RatMatrix(
        len(row_idx), len(col_idx), [m[i, j] for i in row_idx for j in col_idx]
    )
