"""Unit tests for the exact scalar and matrix layer."""

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cospectral import (
    ExactMatrix,
    GaussianRational,
    InconsistentSystemError,
    RankDeficientError,
    char_poly,
    det,
    level,
    rank,
    solve_exact,
)
from cospectral.exact import (
    I_UNIT,
    dump_matrix,
    format_scalar,
    load_matrix,
    parse_scalar,
)


def rand_fraction(rng):
    return Fraction(rng.randint(-9, 9), rng.randint(1, 7))


def rand_gaussian(rng):
    return GaussianRational(rand_fraction(rng), rand_fraction(rng))


def rand_int_matrix(rng, n, lo=-9, hi=9):
    return ExactMatrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


def det_cofactor(rows):
    """Independent determinant oracle: recursive cofactor expansion."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = rows[0][j] * det_cofactor(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def char_poly_faddeev(rows):
    """Independent char poly oracle: Faddeev-LeVerrier over plain Fractions."""
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]

    def matmul(x, y):
        return [
            [sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)
        ]

    def add_scalar(x, c):
        return [
            [x[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)
        ]

    coeffs = [Fraction(1)]
    m = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        am = matmul(a, m)
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
        m = add_scalar(am, c)
    return coeffs


class TestGaussianRational:
    def test_field_operations(self):
        rng = random.Random(7)
        for _ in range(60):
            z, w, u = (rand_gaussian(rng) for _ in range(3))
            assert z + w == w + z
            assert (z + w) + u == z + (w + u)
            assert z * w == w * z
            assert (z * w) * u == z * (w * u)
            assert z * (w + u) == z * w + z * u
            if w != GaussianRational(0, 0):
                assert (z / w) * w == z

    def test_conjugate_and_norm(self):
        rng = random.Random(11)
        for _ in range(40):
            z, w = rand_gaussian(rng), rand_gaussian(rng)
            assert (z * w).conjugate() == z.conjugate() * w.conjugate()
            assert z * z.conjugate() == GaussianRational(z.norm(), 0)
            assert z.norm() >= 0

    def test_mixed_arithmetic_with_rationals(self):
        z = GaussianRational(Fraction(1, 2), Fraction(3))
        assert z + Fraction(1, 2) == GaussianRational(1, 3)
        assert 2 * z == GaussianRational(1, 6)
        assert z - 1 == GaussianRational(Fraction(-1, 2), 3)
        assert I_UNIT * I_UNIT == GaussianRational(-1, 0)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            GaussianRational(1, 1) / GaussianRational(0, 0)


class TestScalarFormat:
    def test_specific_forms(self):
        cases = {
            0: "0",
            -3: "-3",
            Fraction(1, 2): "1/2",
            Fraction(-7, 3): "-7/3",
            GaussianRational(0, 1): "0+1i",
            GaussianRational(0, -1): "0-1i",
            GaussianRational(Fraction(1, 2), Fraction(-2, 3)): "1/2-2/3i",
        }
        for value, text in cases.items():
            assert format_scalar(value) == text
            assert parse_scalar(text) == value

    def test_round_trip_random(self):
        rng = random.Random(23)
        for _ in range(200):
            x = rand_gaussian(rng) if rng.random() < 0.5 else rand_fraction(rng)
            assert parse_scalar(format_scalar(x)) == x

    def test_real_gaussian_collapses(self):
        # a Gaussian with zero imaginary part prints as a plain rational
        assert format_scalar(GaussianRational(3, 0)) == "3"

    def test_rejects_garbage(self):
        for bad in ["", "1+", "i2", "1//2", "x", "+", "1+2"]:
            with pytest.raises(ValueError):
                parse_scalar(bad)

    def test_dump_load_round_trip(self):
        rng = random.Random(31)
        m = ExactMatrix(
            [[rand_gaussian(rng) for _ in range(3)] for _ in range(2)]
        )
        assert load_matrix(dump_matrix(m)) == m
        i3 = ExactMatrix.identity(3)
        assert load_matrix(dump_matrix(i3)) == i3


class TestExactMatrix:
    def test_integer_entries_stay_int(self):
        m = ExactMatrix([[1, 2], [3, 4]])
        assert isinstance(m[0, 1], int)

    def test_constructor_errors(self):
        with pytest.raises(ValueError):
            ExactMatrix([])
        with pytest.raises(ValueError):
            ExactMatrix([[1, 2], [3]])

    def test_immutability(self):
        m = ExactMatrix.identity(2)
        with pytest.raises(AttributeError):
            m.rows = 3

    def test_matmul_matches_numpy(self):
        rng = random.Random(41)
        for _ in range(20):
            n = rng.randint(1, 5)
            a, b = rand_int_matrix(rng, n), rand_int_matrix(rng, n)
            got = (a @ b).to_int_rows()
            want = (
                np.array(a.to_int_rows(), dtype=object)
                @ np.array(b.to_int_rows(), dtype=object)
            ).tolist()
            assert got == want

    def test_transpose_and_conj_transpose(self):
        rng = random.Random(43)
        m = ExactMatrix([[rand_gaussian(rng) for _ in range(3)] for _ in range(2)])
        assert m.transpose().transpose() == m
        assert m.conj_transpose().conj_transpose() == m
        assert m.conj_transpose() == m.transpose().map(
            lambda x: x.conjugate() if isinstance(x, GaussianRational) else x
        )

    def test_hstack_and_submatrix(self):
        a = ExactMatrix([[1, 2], [3, 4]])
        b = ExactMatrix([[5], [6]])
        c = a.hstack(b)
        assert c.shape == (2, 3)
        assert c.col(2) == (5, 6)
        assert c.submatrix([0, 1], [0, 1]) == a

    def test_integrality_queries(self):
        assert ExactMatrix([[1, -2]]).is_integral()
        assert not ExactMatrix([[Fraction(1, 2)]]).is_integral()
        assert not ExactMatrix([[GaussianRational(1, Fraction(1, 3))]]).is_integral()
        assert ExactMatrix([[GaussianRational(1, 2)]]).is_integral()


class TestDet:
    def test_matches_cofactor_oracle(self):
        rng = random.Random(53)
        for n in range(1, 6):
            for _ in range(8):
                entries = [
                    [
                        rand_gaussian(rng) if rng.random() < 0.3 else rand_fraction(rng)
                        for _ in range(n)
                    ]
                    for _ in range(n)
                ]
                m = ExactMatrix(entries)
                assert det(m) == det_cofactor(entries)

    def test_multiplicative(self):
        rng = random.Random(59)
        for _ in range(15):
            n = rng.randint(1, 4)
            a, b = rand_int_matrix(rng, n), rand_int_matrix(rng, n)
            assert det(a @ b) == det(a) * det(b)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            det(ExactMatrix([[1, 2, 3], [4, 5, 6]]))

    @given(
        st.lists(
            st.lists(st.integers(-5, 5), min_size=3, max_size=3),
            min_size=3,
            max_size=3,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_transpose_invariance(self, rows):
        m = ExactMatrix(rows)
        assert det(m.transpose()) == det(m)


class TestCharPoly:
    def test_frozen_star_polynomial(self):
        # adjacency of the 5-vertex star: spectrum {2, 0, 0, 0, -2}
        star = ExactMatrix(
            [
                [0, 1, 1, 1, 1],
                [1, 0, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [1, 0, 0, 0, 0],
            ]
        )
        assert char_poly(star) == [1, 0, -4, 0, 0, 0]

    def test_matches_faddeev_oracle(self):
        rng = random.Random(61)
        for _ in range(20):
            n = rng.randint(1, 5)
            m = rand_int_matrix(rng, n, lo=-4, hi=4)
            assert char_poly(m) == char_poly_faddeev(m.to_int_rows())

    def test_matches_numpy_roots(self):
        rng = random.Random(67)
        for _ in range(10):
            n = rng.randint(2, 5)
            m = rand_int_matrix(rng, n, lo=-3, hi=3)
            want = np.poly(np.array(m.to_int_rows(), dtype=float))
            got = np.array([float(c) for c in char_poly(m)])
            assert np.allclose(got, want, atol=1e-6)

    def test_trace_and_det_coefficients(self):
        rng = random.Random(71)
        for _ in range(10):
            n = rng.randint(1, 5)
            m = rand_int_matrix(rng, n)
            coeffs = char_poly(m)
            assert len(coeffs) == n + 1
            assert coeffs[0] == 1
            trace = sum(m[i, i] for i in range(n))
            assert coeffs[1] == -trace
            assert coeffs[-1] == (-1) ** n * det(m)

    def test_hermitian_gaussian_has_real_coefficients(self):
        rng = random.Random(73)
        for _ in range(10):
            n = rng.randint(2, 4)
            h = [[GaussianRational(0, 0)] * n for _ in range(n)]
            for i in range(n):
                h[i][i] = GaussianRational(rng.randint(-3, 3), 0)
                for j in range(i + 1, n):
                    z = rand_gaussian(rng)
                    h[i][j] = z
                    h[j][i] = z.conjugate()
            coeffs = char_poly(ExactMatrix(h))
            for c in coeffs:
                assert isinstance(c, GaussianRational)
                assert c.im == 0


class TestSolveAndRank:
    def test_solve_round_trip(self):
        rng = random.Random(79)
        solved = 0
        while solved < 15:
            n = rng.randint(1, 5)
            a = rand_int_matrix(rng, n)
            if det(a) == 0:
                continue
            y = ExactMatrix([[rand_fraction(rng)] for _ in range(n)])
            x = solve_exact(a, y)
            assert a @ x == y
            solved += 1

    def test_solve_multiple_right_hand_sides(self):
        a = ExactMatrix([[2, 1], [1, 1]])
        y = ExactMatrix([[1, 0], [0, 1]])
        x = solve_exact(a, y)
        assert a @ x == ExactMatrix.identity(2)

    def test_inconsistent_system(self):
        a = ExactMatrix([[1, 1], [1, 1]])
        with pytest.raises(InconsistentSystemError):
            solve_exact(a, ExactMatrix([[1], [2]]))

    def test_rank_deficient_but_consistent(self):
        a = ExactMatrix([[1, 1], [1, 1]])
        with pytest.raises(RankDeficientError):
            solve_exact(a, ExactMatrix([[1], [1]]))

    def test_rank_matches_numpy(self):
        rng = random.Random(83)
        for _ in range(20):
            n = rng.randint(2, 6)
            r = rng.randint(1, n)
            left = ExactMatrix(
                [[rng.randint(-3, 3) for _ in range(r)] for _ in range(n)]
            )
            right = ExactMatrix(
                [[rng.randint(-3, 3) for _ in range(n)] for _ in range(r)]
            )
            m = left @ right
            want = np.linalg.matrix_rank(np.array(m.to_int_rows(), dtype=float))
            assert rank(m) == want

    def test_rank_of_identity_and_zero(self):
        assert rank(ExactMatrix.identity(4)) == 4
        assert rank(ExactMatrix.zeros(3, 5)) == 0


class TestLevel:
    def test_frozen_values(self):
        assert level(ExactMatrix.identity(3)) == 1
        assert level(ExactMatrix([[Fraction(1, 2)]])) == 2
        assert level(ExactMatrix([[Fraction(1, 2), Fraction(1, 3)], [0, 1]])) == 6
        assert level(ExactMatrix([[GaussianRational(Fraction(1, 2), Fraction(1, 5))]])) == 10

    def test_definition(self):
        # level is the least positive integer clearing every denominator
        rng = random.Random(89)
        for _ in range(20):
            m = ExactMatrix(
                [[rand_fraction(rng) for _ in range(3)] for _ in range(3)]
            )
            ell = level(m)
            assert ell >= 1
            assert m.scale(ell).is_integral()
            for d in range(1, ell):
                if ell % d == 0:
                    assert not m.scale(d).is_integral()
