"""Exact arithmetic kernel: rationals, Gaussian rationals, dense matrices.

Every certifying computation in this package runs over exact scalars, either
arbitrary-precision rationals (``fractions.Fraction``) or Gaussian rationals
(pairs of rationals ``a + b*i``).  Matrices are small and dense at desk scale,
so the representation is a plain row-major tuple of tuples and every operation
returns a fresh immutable value.

Determinants use fraction-free Bareiss elimination after clearing row
denominators; characteristic polynomials use the division-free Samuelson
-Berkowitz recursion so the same code path serves rational and Gaussian
-rational inputs.  Linear solving is exact Gaussian elimination that
distinguishes inconsistent systems from rank-deficient ones.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "Rational",
    "GaussianRational",
    "Scalar",
    "ExactMatrix",
    "InconsistentSystemError",
    "RankDeficientError",
    "det",
    "char_poly",
    "level",
    "is_unimodular",
    "solve_exact",
    "dump_matrix",
    "load_matrix",
]

# The rational scalar is exactly the stdlib Fraction: always reduced,
# positive denominator, arbitrary precision.
Rational = Fraction


class GaussianRational:
    """A Gaussian rational ``re + im*i`` with exact rational components.

    Supports field arithmetic and mixes freely with ``int``/``Fraction``
    operands, which coerce to a Gaussian value with zero imaginary part.
    Instances are immutable and hashable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- coercion ---------------------------------------------------------

    @staticmethod
    def _coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")

    # -- field operations -------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        other = self._coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Field norm ``re**2 + im**2`` (a nonnegative rational)."""
        return self.re * self.re + self.im * self.im

    # -- comparisons / protocol -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)


I_UNIT = GaussianRational(0, 1)

Scalar = Union[int, Fraction, GaussianRational]


def conj(x: Scalar) -> Scalar:
    return x.conjugate() if isinstance(x, GaussianRational) else x


def is_zero(x: Scalar) -> bool:
    return not x


def _as_exact(value) -> Scalar:
    """Normalize an input entry to int, Fraction or GaussianRational."""
    if isinstance(value, (int, GaussianRational)):
        return value
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, complex):
        if value.real != int(value.real) or value.imag != int(value.imag):
            raise TypeError("complex entries must have integral parts; use GaussianRational")
        return GaussianRational(int(value.real), int(value.imag))
    raise TypeError(f"unsupported matrix entry type {type(value).__name__}")


def _div(a: Scalar, b: Scalar) -> Scalar:
    """Exact field division that never falls back to floats."""
    if isinstance(a, GaussianRational) or isinstance(b, GaussianRational):
        return GaussianRational._coerce(a) / b
    return Fraction(a) / Fraction(b)


# ---------------------------------------------------------------------------
# scalar parsing / formatting ("num/den" and "a/b+c/di" forms)
# ---------------------------------------------------------------------------

_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^(?P<re>{_RAT})(?P<im>[+-]\d+(?:/\d+)?)i$")
_IMAG_RE = re.compile(rf"^(?P<im>{_RAT})i$")


def parse_scalar(text: str) -> Scalar:
    """Parse ``"3"``, ``"-1/2"``, ``"1/2+3/4i"``, ``"-2i"`` style entries."""
    text = text.strip()
    m = _GAUSS_RE.match(text)
    if m:
        return GaussianRational(Fraction(m.group("re")), Fraction(m.group("im")))
    m = _IMAG_RE.match(text)
    if m:
        return GaussianRational(0, Fraction(m.group("im")))
    try:
        return Fraction(text)
    except ValueError:
        raise ValueError(f"malformed scalar {text!r}") from None


def format_scalar(x: Scalar) -> str:
    if isinstance(x, GaussianRational):
        if x.im == 0:
            return str(x.re)
        sign = "+" if x.im >= 0 else "-"
        return f"{x.re}{sign}{abs(x.im)}i"
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# dense exact matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Immutable dense matrix over exact scalars, row-major storage."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable]):
        data = tuple(tuple(_as_exact(x) for x in row) for row in entries)
        if not data:
            raise ValueError("matrix needs at least one row")
        cols = len(data[0])
        if cols == 0:
            raise ValueError("matrix needs at least one column")
        if any(len(row) != cols for row in data):
            raise ValueError("ragged rows in matrix input")
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", data)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values: Sequence) -> "ExactMatrix":
        return cls([[v] for v in values])

    @classmethod
    def diagonal(cls, values: Sequence) -> "ExactMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    # -- basic queries ----------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def col(self, j: int) -> tuple:
        return tuple(row[j] for row in self.entries)

    def is_gaussian(self) -> bool:
        return any(isinstance(x, GaussianRational) for row in self.entries for x in row)

    def is_integral(self) -> bool:
        for row in self.entries:
            for x in row:
                if isinstance(x, GaussianRational):
                    if x.re.denominator != 1 or x.im.denominator != 1:
                        return False
                elif isinstance(x, Fraction):
                    if x.denominator != 1:
                        return False
        return True

    def to_int_rows(self) -> list[list[int]]:
        """Entries as plain ints; requires an integral rational matrix."""
        out = []
        for row in self.entries:
            int_row = []
            for x in row:
                if isinstance(x, GaussianRational):
                    raise ValueError("matrix has Gaussian entries")
                f = Fraction(x)
                if f.denominator != 1:
                    raise ValueError("matrix is not integral")
                int_row.append(f.numerator)
            out.append(int_row)
        return out

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self):
        return self.map(lambda x: -x)

    def scale(self, c: Scalar) -> "ExactMatrix":
        return self.map(lambda x: c * x)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        bt = other.transpose().entries  # iterate cache-friendly over columns
        out = []
        for ra in self.entries:
            out.append([sum(a * b for a, b in zip(ra, cb)) for cb in bt])
        return ExactMatrix(out)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(list(zip(*self.entries)))

    def conj_transpose(self) -> "ExactMatrix":
        return ExactMatrix([[conj(x) for x in row] for row in zip(*self.entries)])

    def map(self, fn) -> "ExactMatrix":
        return ExactMatrix([[fn(x) for x in row] for row in self.entries])

    def hstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch in hstack")
        return ExactMatrix(
            [ra + rb for ra, rb in zip(self.entries, other.entries)]
        )

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(
            [[self.entries[i][j] for j in col_idx] for i in row_idx]
        )

    # -- numerics bridge --------------------------------------------------

    def to_float_array(self):
        import numpy as np

        if self.is_gaussian():
            return np.array(
                [[complex(GaussianRational._coerce(x)) for x in row] for row in self.entries],
                dtype=complex,
            )
        return np.array([[float(Fraction(x)) for x in row] for row in self.entries], dtype=float)

    # -- protocol ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        for ra, rb in zip(self.entries, other.entries):
            for a, b in zip(ra, rb):
                if a != b:
                    return False
        return True

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(
            " ".join(format_scalar(x) for x in row) for row in self.entries
        )
        return f"ExactMatrix({self.rows}x{self.cols}: {body})"

    def _check_same_shape(self, other: "ExactMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


class InconsistentSystemError(ValueError):
    """Raised when a linear system ``A X = Y`` has no solution."""


class RankDeficientError(ValueError):
    """Raised when ``A`` lacks full column rank, so no unique solution exists."""


# ---------------------------------------------------------------------------
# determinant (fraction-free Bareiss after denominator clearing)
# ---------------------------------------------------------------------------


def _row_denominator_lcm(row) -> int:
    l = 1
    for x in row:
        if isinstance(x, GaussianRational):
            l = math.lcm(l, x.re.denominator, x.im.denominator)
        else:
            l = math.lcm(l, Fraction(x).denominator)
    return l


def _gaussian_int_exact_div(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    # Bareiss divisions are exact, so Gaussian-integer division stays integral.
    return a / b


def det(m: ExactMatrix) -> Scalar:
    """Exact determinant of a square matrix.

    Row denominators are cleared first, then fraction-free Bareiss elimination
    runs over the integers (or Gaussian integers); the cleared factor is
    divided back out at the end.
    """
    if not m.is_square:
        raise ValueError("determinant requires a square matrix")
    n = m.rows
    gaussian = m.is_gaussian()

    scale = 1
    work = []
    for row in m.entries:
        l = _row_denominator_lcm(row)
        scale *= l
        if gaussian:
            work.append([GaussianRational._coerce(x) * l for x in row])
        else:
            int_row = []
            for x in row:
                f = Fraction(x) * l
                int_row.append(f.numerator)
            work.append(int_row)

    sign = 1
    prev = 1
    for k in range(n - 1):
        if is_zero(work[k][k]):
            pivot_row = next(
                (i for i in range(k + 1, n) if not is_zero(work[i][k])), None
            )
            if pivot_row is None:
                return GaussianRational(0) if gaussian else Fraction(0)
            work[k], work[pivot_row] = work[pivot_row], work[k]
            sign = -sign
        pivot = work[k][k]
        for i in range(k + 1, n):
            wi, wk = work[i], work[k]
            head = wi[k]
            for j in range(k + 1, n):
                num = pivot * wi[j] - head * wk[j]
                if gaussian:
                    wi[j] = _gaussian_int_exact_div(num, GaussianRational._coerce(prev))
                else:
                    wi[j] = num // prev
            wi[k] = 0
        prev = pivot

    value = work[n - 1][n - 1]
    if sign < 0:
        value = -value
    if gaussian:
        return GaussianRational._coerce(value) / scale
    return Fraction(value, scale)


# ---------------------------------------------------------------------------
# characteristic polynomial (Samuelson-Berkowitz, division-free)
# ---------------------------------------------------------------------------


def char_poly(m: ExactMatrix) -> list:
    """Coefficients of ``det(t*I - M)``, leading coefficient first.

    The Samuelson-Berkowitz recursion uses ring operations only, so the same
    code runs over rationals and Gaussian rationals.  Returns ``n + 1`` exact
    coefficients in descending powers of ``t``.
    """
    if not m.is_square:
        raise ValueError("characteristic polynomial requires a square matrix")
    n = m.rows
    a = m.entries

    # poly holds the char poly of the trailing principal (n - r) x (n - r)
    # block, leading coefficient first; start from the empty block.
    poly = [1]
    for r in range(n - 1, -1, -1):
        pivot = a[r][r]
        row = [a[r][j] for j in range(r + 1, n)]
        col = [a[i][r] for i in range(r + 1, n)]
        size = n - r
        # Toeplitz column: 1, -a_rr, -row.col, -row.M.col, -row.M^2.col, ...
        t_col = [1, -pivot]
        v = col
        for _ in range(size - 1):
            t_col.append(-sum(x * y for x, y in zip(row, v)))
            v = [
                sum(a[r + 1 + i][r + 1 + j] * v[j] for j in range(size - 1))
                for i in range(size - 1)
            ]
        new_poly = [0] * (size + 1)
        for i in range(size + 1):
            acc = 0
            for j in range(max(0, i - size), min(i, len(poly) - 1) + 1):
                acc = acc + t_col[i - j] * poly[j]
            new_poly[i] = acc
        poly = new_poly

    gaussian = m.is_gaussian()
    out = []
    for c in poly:
        if gaussian:
            out.append(GaussianRational._coerce(c))
        else:
            out.append(Fraction(c))
    return out


# ---------------------------------------------------------------------------
# level, unimodularity, linear solving
# ---------------------------------------------------------------------------


def level(m: ExactMatrix) -> int:
    """Smallest positive integer ``l`` such that ``l * M`` is integral."""
    l = 1
    for row in m.entries:
        l = math.lcm(l, _row_denominator_lcm(row))
    return l


def is_unimodular(m: ExactMatrix) -> bool:
    """True iff the matrix is square, integral, and has determinant +-1."""
    if not m.is_square:
        raise ValueError("unimodularity requires a square matrix")
    if not m.is_integral():
        raise ValueError("unimodularity requires an integral matrix")
    d = det(m)
    return d == 1 or d == -1


def solve_exact(a: ExactMatrix, y: ExactMatrix) -> ExactMatrix:
    """Solve ``A X = Y`` exactly by Gaussian elimination.

    Raises :class:`RankDeficientError` when ``A`` lacks full column rank (the
    solution, if any, would not be unique) and :class:`InconsistentSystemError`
    when the system has no solution at all.
    """
    if a.rows != y.rows:
        raise ValueError(f"row mismatch: A has {a.rows}, Y has {y.rows}")
    m, n = a.rows, a.cols
    k = y.cols
    aug = [list(ra) + list(ry) for ra, ry in zip(a.entries, y.entries)]

    pivot_cols = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, m) if not is_zero(aug[i][c])), None)
        if pivot_row is None:
            continue
        aug[r], aug[pivot_row] = aug[pivot_row], aug[r]
        pivot = aug[r][c]
        aug[r] = [_div(x, pivot) for x in aug[r]]
        for i in range(m):
            if i != r and not is_zero(aug[i][c]):
                f = aug[i][c]
                aug[i] = [x - f * y_ for x, y_ in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break

    # Any nonzero RHS entry in a zero row of A means no solution exists.
    for i in range(r, m):
        if any(not is_zero(aug[i][n + j]) for j in range(k)):
            raise InconsistentSystemError("linear system A X = Y is inconsistent")

    if len(pivot_cols) < n:
        raise RankDeficientError(
            f"coefficient matrix has column rank {len(pivot_cols)} < {n}"
        )

    rows = [[0] * k for _ in range(n)]
    for idx, c in enumerate(pivot_cols):
        for j in range(k):
            rows[c][j] = aug[idx][n + j]
    return ExactMatrix(rows)


def rank(m: ExactMatrix) -> int:
    """Exact rank via Gaussian elimination over the scalar field."""
    work = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if not is_zero(work[i][c])), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        pivot = work[r][c]
        for i in range(r + 1, rows):
            if not is_zero(work[i][c]):
                f = _div(work[i][c], pivot)
                work[i] = [x - f * y_ for x, y_ in zip(work[i], work[r])]
        r += 1
        if r == rows:
            break
    return r


# ---------------------------------------------------------------------------
# text serialization: first line "rows cols", then row-major entries
# ---------------------------------------------------------------------------


def dump_matrix(m: ExactMatrix) -> str:
    lines = [f"{m.rows} {m.cols}"]
    for row in m.entries:
        lines.append(" ".join(format_scalar(x) for x in row))
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> ExactMatrix:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix text needs a 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ValueError(f"malformed matrix header {tokens[:2]}") from None
    if rows <= 0 or cols <= 0:
        raise ValueError("matrix dimensions must be positive")
    body = tokens[2:]
    if len(body) != rows * cols:
        raise ValueError(
            f"expected {rows * cols} entries for {rows}x{cols}, got {len(body)}"
        )
    it = iter(body)
    return ExactMatrix([[parse_scalar(next(it)) for _ in range(cols)] for _ in range(rows)])
