"""Smith normal form over the integers with unimodular transform tracking.

The reduction keeps the invariant ``U @ S @ V == M`` at every step: each
elementary row operation applied to the work matrix is compensated by the
inverse column operation on ``U``, and each column operation by the inverse
row operation on ``V``.  The pivot is re-chosen as the smallest-magnitude
nonzero entry of the trailing block after every nonzero remainder, so each
elimination divides by the current minimum; without that re-selection,
intermediate entries blow up doubly exponentially on some dense inputs.
The returned diagonal is normalized to nonnegative entries with the
divisibility chain d1 | d2 | ... enforced.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .exact import ExactMatrix, det

__all__ = ["SmithDecomposition", "smith_normal_form", "last_invariant_factor"]


@dataclass(frozen=True)
class SmithDecomposition:
    """Unimodular ``u``, diagonal ``s``, unimodular ``v`` with ``u s v = m``."""

    u: ExactMatrix
    s: ExactMatrix
    v: ExactMatrix

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        """Nonzero diagonal entries of ``s``, in divisibility order."""
        out = []
        for k in range(min(self.s.rows, self.s.cols)):
            d = int(self.s[k, k])
            if d == 0:
                break
            out.append(d)
        return tuple(out)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def verify(self, m: ExactMatrix) -> bool:
        """Recheck every decomposition property against the original matrix."""
        if self.u @ self.s @ self.v != m:
            return False
        du, dv = det(self.u), det(self.v)
        if du not in (1, -1) or dv not in (1, -1):
            return False
        factors = self.invariant_factors
        for a, b in zip(factors, factors[1:]):
            if b % a != 0:
                return False
        # Off-diagonal entries and trailing diagonal must be zero.
        for i in range(self.s.rows):
            for j in range(self.s.cols):
                expected = factors[i] if (i == j and i < len(factors)) else 0
                if self.s[i, j] != expected:
                    return False
        return True


class _Reduction:
    """Mutable row-major int workspace plus the two transform accumulators."""

    def __init__(self, m: ExactMatrix):
        self.s = m.to_int_rows()
        self.rows = m.rows
        self.cols = m.cols
        self.u = [[1 if i == j else 0 for j in range(self.rows)] for i in range(self.rows)]
        self.v = [[1 if i == j else 0 for j in range(self.cols)] for i in range(self.cols)]

    # Each op below pairs the change to S with the inverse transform on U or V.

    def row_swap(self, i, j):
        self.s[i], self.s[j] = self.s[j], self.s[i]
        for row in self.u:
            row[i], row[j] = row[j], row[i]

    def col_swap(self, i, j):
        for row in self.s:
            row[i], row[j] = row[j], row[i]
        self.v[i], self.v[j] = self.v[j], self.v[i]

    def row_add(self, i, j, k):
        # row_i += k * row_j on S; U column j -= k * column i.
        si, sj = self.s[i], self.s[j]
        for c in range(self.cols):
            si[c] += k * sj[c]
        for row in self.u:
            row[j] -= k * row[i]

    def col_add(self, j, i, k):
        # col_j += k * col_i on S; V row i -= k * row j.
        for row in self.s:
            row[j] += k * row[i]
        vi, vj = self.v[i], self.v[j]
        for c in range(self.cols):
            vi[c] -= k * vj[c]

    def row_negate(self, i):
        self.s[i] = [-x for x in self.s[i]]
        for row in self.u:
            row[i] = -row[i]


def _pivot_position(s, k, rows, cols):
    """Coordinates of a smallest-magnitude nonzero entry in the trailing block."""
    best = None
    best_val = None
    for i in range(k, rows):
        for j in range(k, cols):
            a = abs(s[i][j])
            if a and (best_val is None or a < best_val):
                best, best_val = (i, j), a
                if a == 1:
                    return best
    return best


def smith_normal_form(m: ExactMatrix) -> SmithDecomposition:
    """Smith normal form of an integer matrix.

    Returns :class:`SmithDecomposition` with unimodular ``u`` and ``v`` such
    that ``u @ s @ v`` reproduces the input and the diagonal of ``s`` is
    nonnegative with each entry dividing the next.
    """
    work = _Reduction(m)
    s, rows, cols = work.s, work.rows, work.cols

    for k in range(min(rows, cols)):
        if _pivot_position(s, k, rows, cols) is None:
            break

        while True:
            # Move the smallest-magnitude nonzero entry of the trailing block
            # to (k, k).  Every elimination below divides by this global
            # minimum; on the first nonzero remainder we restart the selection
            # so the remainder (strictly smaller) becomes the next pivot.
            # |pivot| strictly decreases across restarts, so this terminates.
            pos = _pivot_position(s, k, rows, cols)
            work.row_swap(k, pos[0])
            work.col_swap(k, pos[1])

            restart = False
            for i in range(k + 1, rows):
                if s[i][k]:
                    q = s[i][k] // s[k][k]
                    if q:
                        work.row_add(i, k, -q)
                    if s[i][k]:
                        restart = True
                        break
            if restart:
                continue
            for j in range(k + 1, cols):
                if s[k][j]:
                    q = s[k][j] // s[k][k]
                    if q:
                        work.col_add(j, k, -q)
                    if s[k][j]:
                        restart = True
                        break
            if restart:
                continue
            # Divisibility fix: fold a bad row into row k.  Re-reducing row k
            # then exposes a nonzero remainder, shrinking the pivot again.
            bad = next(
                (
                    i
                    for i in range(k + 1, rows)
                    if any(s[i][j] % s[k][k] for j in range(k + 1, cols))
                ),
                None,
            )
            if bad is None:
                break
            work.row_add(k, bad, 1)

        if s[k][k] < 0:
            work.row_negate(k)

    return SmithDecomposition(
        u=ExactMatrix(work.u), s=ExactMatrix(work.s), v=ExactMatrix(work.v)
    )


def last_invariant_factor(m: ExactMatrix) -> int:
    """The r-th invariant factor of a full-row-rank integer matrix (r = rows).

    This is the quantity that caps the denominators of the rational orthogonal
    matrix recovered from a full-rank extended walk matrix.  Computed from the
    Smith normal form; raises if the matrix does not have full row rank.
    """
    dec = smith_normal_form(m)
    factors = dec.invariant_factors
    if len(factors) < m.rows:
        raise ValueError(
            f"matrix has rank {len(factors)} < {m.rows}, no r-th invariant factor"
        )
    return factors[-1]


def _gcd_of_minors(m: ExactMatrix, k: int) -> int:
    """Brute-force gcd of all k x k minors; independent check for small inputs."""
    from itertools import combinations

    g = 0
    for rows_idx in combinations(range(m.rows), k):
        for cols_idx in combinations(range(m.cols), k):
            g = gcd(g, int(det(m.submatrix(rows_idx, cols_idx))))
    return g
