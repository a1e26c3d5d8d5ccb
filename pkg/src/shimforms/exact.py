"""Exact rational and integer lattice arithmetic.

Lattices in Q^n are stored by a canonical basis: a rational scale times an
integer matrix in row-style Hermite normal form.  Canonical form makes
lattice equality a structural comparison.  Also provides 2-dimensional
complex lattice (Gauss) reduction and rational recognition by continued
fractions, which the Heegner pipeline uses to turn floating-point output
back into exact data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd
from typing import Iterable, Sequence

Rational = Fraction


class DegenerateLatticeError(ValueError):
    """Raised when an operation needs linearly independent basis rows."""


def _frac_rows(matrix: Iterable[Sequence]) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in matrix]


def _int_hnf(rows: list[list[int]]) -> list[list[int]]:
    """Row-style HNF: upper-triangular staircase, positive pivots,
    entries above each pivot reduced into [0, pivot).

    Zero rows are dropped, so the result has one row per pivot.
    """
    m = [row[:] for row in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivot_row = 0
    for col in range(ncols):
        if pivot_row >= len(m):
            break
        # clear the column below pivot_row with extended-gcd row combinations
        for i in range(pivot_row + 1, len(m)):
            if m[i][col] == 0:
                continue
            a, b = m[pivot_row][col], m[i][col]
            if a == 0:
                m[pivot_row], m[i] = m[i], m[pivot_row]
                a, b = b, 0
                continue
            g, u, v = _xgcd(a, b)
            p, q = a // g, b // g
            r1 = [u * x + v * y for x, y in zip(m[pivot_row], m[i])]
            r2 = [-q * x + p * y for x, y in zip(m[pivot_row], m[i])]
            m[pivot_row], m[i] = r1, r2
        if m[pivot_row][col] == 0:
            continue
        if m[pivot_row][col] < 0:
            m[pivot_row] = [-x for x in m[pivot_row]]
        piv = m[pivot_row][col]
        for i in range(pivot_row):
            q = m[i][col] // piv
            if q:
                m[i] = [x - q * y for x, y in zip(m[i], m[pivot_row])]
        pivot_row += 1
    return [row for row in m[:pivot_row]]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _bareiss_det(rows: list[list[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    n = len(rows)
    m = [row[:] for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class IntLatticeBasis:
    """Canonical basis of a lattice in Q^n: ``scale`` times HNF integer rows.

    The integer part has content 1, so equal lattices compare equal.
    """

    rows: tuple[tuple[int, ...], ...]
    scale: Fraction

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def basis_rows(self) -> list[list[Fraction]]:
        """Basis vectors as exact rational rows."""
        return [[self.scale * x for x in row] for row in self.rows]

    def covolume(self) -> Fraction:
        """|det| of the basis matrix (full-rank square lattices only)."""
        if self.rank != self.dim:
            raise DegenerateLatticeError("covolume needs a full-rank lattice")
        return abs(self.scale**self.rank * _bareiss_det([list(r) for r in self.rows]))

    def contains(self, vector: Sequence) -> bool:
        """Exact membership of a rational vector in the Z-span."""
        coeffs = self.coordinates_or_none(vector)
        return coeffs is not None and all(c.denominator == 1 for c in coeffs)

    def coordinates_or_none(self, vector: Sequence) -> list[Fraction] | None:
        """Rational coordinates of ``vector`` in this basis, or None if
        outside the Q-span."""
        v = [Fraction(x) / self.scale for x in vector]
        coeffs: list[Fraction] = []
        residual = v[:]
        pivots = _pivot_cols(self.rows)
        for row, pc in zip(self.rows, pivots):
            c = Fraction(residual[pc], row[pc])
            coeffs.append(c)
            residual = [r - c * x for r, x in zip(residual, row)]
        if any(r != 0 for r in residual):
            return None
        return coeffs


def _pivot_cols(rows: Sequence[Sequence[int]]) -> list[int]:
    out = []
    for row in rows:
        for j, x in enumerate(row):
            if x != 0:
                out.append(j)
                break
    return out


def _canonical(int_rows: list[list[int]], scale: Fraction) -> IntLatticeBasis:
    content = 0
    for row in int_rows:
        for x in row:
            content = gcd(content, x)
    if content > 1:
        int_rows = [[x // content for x in row] for row in int_rows]
        scale = scale * content
    return IntLatticeBasis(tuple(tuple(r) for r in int_rows), scale)


def _span_basis(rows: list[list[Fraction]]) -> IntLatticeBasis:
    denom = 1
    for row in rows:
        for x in row:
            denom = denom * x.denominator // gcd(denom, x.denominator)
    int_rows = [[int(x * denom) for x in row] for row in rows]
    reduced = _int_hnf(int_rows)
    return _canonical(reduced, Fraction(1, denom))


def hnf(matrix: Iterable[Sequence]) -> IntLatticeBasis:
    """Canonical HNF basis of the row span over Z of a rational matrix.

    Raises DegenerateLatticeError for rank-deficient input.  Idempotent:
    feeding back ``basis_rows()`` reproduces the same object.
    """
    rows = _frac_rows(matrix)
    if not rows:
        raise DegenerateLatticeError("degenerate lattice: empty input")
    basis = _span_basis(rows)
    if basis.rank != len(rows):
        raise DegenerateLatticeError("degenerate lattice: rows are dependent")
    return basis


def lattice_sum(l1: IntLatticeBasis, l2: IntLatticeBasis) -> IntLatticeBasis:
    """HNF basis of L1 + L2 (smallest lattice containing both)."""
    if l1.dim != l2.dim:
        raise ValueError("dimension mismatch")
    return _span_basis(_frac_rows(l1.basis_rows() + l2.basis_rows()))


def lattice_index(l_sub: IntLatticeBasis, l_sup: IntLatticeBasis) -> int:
    """Index [L_sup : L_sub] for full-rank L_sub contained in L_sup."""
    for row in l_sub.basis_rows():
        if not l_sup.contains(row):
            raise ValueError("first lattice is not contained in the second")
    ratio = l_sub.covolume() / l_sup.covolume()
    if ratio.denominator != 1:
        raise ValueError("containment holds but index is not integral")
    return int(ratio)


def mat_inverse(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
           for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise DegenerateLatticeError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _std_dual(L: IntLatticeBasis) -> IntLatticeBasis:
    """Dual lattice w.r.t. the standard dot product (full rank only)."""
    rows = L.basis_rows()
    inv = mat_inverse(rows)
    # dual basis rows are the columns of B^{-1}
    dual_rows = [[inv[i][j] for i in range(len(inv))] for j in range(len(inv))]
    return hnf(dual_rows)


def lattice_intersection(l1: IntLatticeBasis, l2: IntLatticeBasis) -> IntLatticeBasis:
    """Intersection of two full-rank lattices via duality:
    L1 cap L2 = (L1^# + L2^#)^# for the standard-dot-product dual."""
    if l1.dim != l2.dim:
        raise ValueError("dimension mismatch")
    if l1.rank != l1.dim or l2.rank != l2.dim:
        raise DegenerateLatticeError("intersection needs full-rank lattices")
    return _std_dual(lattice_sum(_std_dual(l1), _std_dual(l2)))


@dataclass(frozen=True)
class ComplexLatticeBasis:
    """Gauss-reduced basis (omega1, omega2) of a rank-2 lattice in C."""

    omega1: complex
    omega2: complex

    def coordinates(self, z) -> tuple[float, float]:
        """Real coordinates of z in the basis (solves the 2x2 real system)."""
        a, b = self.omega1, self.omega2
        det = a.real * b.imag - a.imag * b.real
        c1 = (z.real * b.imag - z.imag * b.real) / det
        c2 = (a.real * z.imag - a.imag * z.real) / det
        return c1, c2

    def covolume(self):
        a, b = self.omega1, self.omega2
        return abs(a.real * b.imag - a.imag * b.real)

    def reduce_mod(self, z):
        """Translate z by lattice vectors into the centered fundamental cell."""
        c1, c2 = self.coordinates(z)
        return z - _round_half(c1) * self.omega1 - _round_half(c2) * self.omega2


def _round_half(x) -> int:
    xf = float(x)
    return int(floor(xf + 0.5))


def gauss_reduce(omega1, omega2) -> ComplexLatticeBasis:
    """Lagrange-Gauss reduction of the lattice Z*omega1 + Z*omega2.

    Works for python complex and gmpy2 mpc alike.  The output basis
    generates the same lattice and satisfies
    |omega1| <= |omega2| <= |omega1 +- omega2|.
    """
    a, b = omega1, omega2
    cross = a.real * b.imag - a.imag * b.real
    if _is_zero_cross(cross, a, b):
        raise DegenerateLatticeError("degenerate lattice: collinear periods")
    if abs(a) > abs(b):
        a, b = b, a
    while True:
        # project b on a and subtract nearest integer multiple
        mu = (b.real * a.real + b.imag * a.imag) / (a.real * a.real + a.imag * a.imag)
        q = _round_half(mu)
        b = b - q * a
        if abs(b) >= abs(a):
            break
        a, b = b, a
    # each generator may be negated freely; fix signs for a canonical pick
    a = _sign_normalize(a)
    b = _sign_normalize(b)
    return ComplexLatticeBasis(a, b)


def _sign_normalize(z):
    if z.real < 0 or (z.real == 0 and z.imag < 0):
        return -z
    return z


def _is_zero_cross(cross, a, b) -> bool:
    scale = (abs(a) * abs(b))
    if scale == 0:
        return True
    return abs(cross) / scale < 1e-14


def recognize_rational(x, max_denominator: int, residual_tol) -> Fraction | None:
    """Recognize x as p/q with q <= max_denominator via continued fractions.

    Only continued-fraction convergents are considered; the first one whose
    residual |x - p/q| falls within residual_tol is returned.  Convergents
    are optimal rational approximations, so a noisy x that is not close to
    any small-denominator rational yields None rather than a bad guess.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    xf = _to_fraction(x)
    tol = Fraction(_to_fraction(residual_tol))
    # convergents h/k of the continued fraction of xf
    num, den = xf.numerator, xf.denominator
    h0, h1 = 1, num // den
    k0, k1 = 0, 1
    a = num // den
    num, den = den, num - a * den
    while True:
        cand = Fraction(h1, k1)
        if k1 <= max_denominator and abs(xf - cand) <= tol:
            return cand
        if den == 0 or k1 > max_denominator:
            return None
        a = num // den
        num, den = den, num - a * den
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    # gmpy2.mpfr and friends
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))
