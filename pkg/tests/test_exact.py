import random
from fractions import Fraction
from itertools import product

import pytest

from shimforms.exact import (
    ComplexLatticeBasis,
    DegenerateLatticeError,
    IntLatticeBasis,
    gauss_reduce,
    hnf,
    lattice_index,
    lattice_sum,
    recognize_rational,
)


def span_points(basis_rows, coeff_range):
    """Independent oracle: all Z-combinations with small coefficients."""
    pts = set()
    rng = range(-coeff_range, coeff_range + 1)
    for coeffs in product(rng, repeat=len(basis_rows)):
        v = tuple(
            sum(Fraction(c) * x for c, x in zip(coeffs, col))
            for col in zip(*basis_rows)
        )
        pts.add(v)
    return pts


class TestHNF:
    def test_identity_fixed(self):
        eye = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        L = hnf(eye)
        assert L.rows == tuple(tuple(r) for r in eye)
        assert L.scale == 1

    def test_2x2_span_matches_brute_force(self):
        L = hnf([[2, 0], [1, 1]])
        # oracle: both generating sets produce identical small-coefficient spans
        got = span_points(L.basis_rows(), 4)
        expect = span_points([[Fraction(2), Fraction(0)], [Fraction(1), Fraction(1)]], 4)
        # compare on the box where both spans are complete
        box = {p for p in expect if all(abs(x) <= 4 for x in p)}
        assert {p for p in got if all(abs(x) <= 4 for x in p)} == box

    def test_half_vector_lattice(self):
        rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0],
                [Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)]]
        L = hnf(rows)
        assert L.contains([Fraction(1, 2)] * 4)
        assert L.covolume() == Fraction(1, 2)

    def test_idempotent(self):
        L = hnf([[2, 1], [0, 3]])
        assert hnf(L.basis_rows()) == L

    def test_rank_deficient_rejected(self):
        with pytest.raises(DegenerateLatticeError):
            hnf([[1, 2], [2, 4]])

    def test_unimodular_invariance(self):
        rng = random.Random(7)
        for _ in range(25):
            rows = [[Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(4)]
                    for _ in range(4)]
            try:
                L = hnf(rows)
            except DegenerateLatticeError:
                continue
            U = random_unimodular(rng, 4)
            mixed = [[sum(U[i][k] * rows[k][j] for k in range(4)) for j in range(4)]
                     for i in range(4)]
            assert hnf(mixed) == L


def random_unimodular(rng, n):
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(12):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-3, 3)
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    return U


class TestLatticeSumIndex:
    def test_sum_idempotent(self):
        L = hnf([[2, 1], [0, 5]])
        assert lattice_sum(L, L) == L

    def test_sum_containment(self):
        z4 = hnf([[1 if i == j else 0 for j in range(4)] for i in range(4)])
        half = hnf([[Fraction(1, 2) if i == j else 0 for j in range(4)] for i in range(4)])
        assert lattice_sum(z4, half) == half

    def test_sum_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lattice_sum(hnf([[1, 0], [0, 1]]), hnf([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))

    def test_index_trivial(self):
        L = hnf([[3, 1], [0, 2]])
        assert lattice_index(L, L) == 1

    def test_index_scaling(self):
        z4 = hnf([[1 if i == j else 0 for j in range(4)] for i in range(4)])
        two_z4 = hnf([[2 if i == j else 0 for j in range(4)] for i in range(4)])
        assert lattice_index(two_z4, z4) == 16

    def test_index_requires_containment(self):
        a = hnf([[2, 0], [0, 1]])
        b = hnf([[1, 0], [0, 2]])
        with pytest.raises(ValueError):
            lattice_index(a, b)

    def test_index_multiplicative_on_chains(self):
        rng = random.Random(3)
        for _ in range(10):
            L3 = hnf([[1, 0], [0, 1]])
            L2 = hnf([[rng.randint(1, 3), rng.randint(0, 2)], [0, rng.randint(1, 3)]])
            mult = [[rng.randint(1, 3), rng.randint(0, 2)], [0, rng.randint(1, 3)]]
            rows2 = L2.basis_rows()
            L1 = hnf([[sum(mult[i][k] * rows2[k][j] for k in range(2)) for j in range(2)]
                      for i in range(2)])
            assert lattice_index(L1, L3) == lattice_index(L1, L2) * lattice_index(L2, L3)


class TestGaussReduce:
    def test_already_reduced(self):
        B = gauss_reduce(1 + 0j, 1j)
        assert {B.omega1, B.omega2} == {1 + 0j, 1j}

    def test_shear_reduces(self):
        B = gauss_reduce(1 + 0j, 1 + 1j)
        assert abs(B.omega1) <= abs(B.omega2) <= 1.0 + 1e-12
        assert same_complex_lattice(B, ComplexLatticeBasis(1 + 0j, 1j))

    def test_random_pair_same_lattice(self):
        B = gauss_reduce(5 + 5j, 3 + 2j)
        assert same_complex_lattice(B, ComplexLatticeBasis(5 + 5j, 3 + 2j))
        assert abs(B.omega1) <= abs(B.omega2)
        assert abs(B.omega2) <= abs(B.omega1 + B.omega2) + 1e-12
        assert abs(B.omega2) <= abs(B.omega1 - B.omega2) + 1e-12

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateLatticeError):
            gauss_reduce(1 + 1j, 2 + 2j)


def same_complex_lattice(b1, b2, tol=1e-12):
    """Both bases express each other with integer coefficients."""
    for z in (b2.omega1, b2.omega2):
        c1, c2 = b1.coordinates(z)
        if abs(c1 - round(c1)) > tol or abs(c2 - round(c2)) > tol:
            return False
    for z in (b1.omega1, b1.omega2):
        c1, c2 = b2.coordinates(z)
        if abs(c1 - round(c1)) > tol or abs(c2 - round(c2)) > tol:
            return False
    return True


class TestRecognizeRational:
    def test_one_third(self):
        assert recognize_rational(0.333333333333, 100, 1e-9) == Fraction(1, 3)

    def test_negative_integer(self):
        assert recognize_rational(-4.0000000002, 10, 1e-6) == Fraction(-4)

    def test_heegner_table_value(self):
        # x = -1339/256 appears as a recognized Heegner x-coordinate
        assert recognize_rational(-5.23046875, 10**6, 1e-12) == Fraction(-1339, 256)

    def test_noise_returns_none(self):
        import math
        assert recognize_rational(math.pi, 50, 1e-9) is None

    def test_exact_fractions_roundtrip(self):
        rng = random.Random(11)
        for _ in range(50):
            q = rng.randint(1, 999)
            p = rng.randint(-5000, 5000)
            x = Fraction(p, q)
            assert recognize_rational(float(x), 1000, 1e-9) == x

    def test_mpfr_input(self):
        import gmpy2
        with gmpy2.context(precision=120):
            x = gmpy2.mpfr(4) / 7
            assert recognize_rational(x, 100, 1e-20) == Fraction(4, 7)
