"""Rational quaternion algebras (a,b | Q) and their real embeddings.

The algebra (a,b | Q) has basis 1, i, j, ij with i^2 = a, j^2 = b and
ij = -ji.  The split algebra M_2(Q) is represented structurally with the
matrix-unit basis e11, e12, e21, e22 instead of an (a,b) pair, so that
level structures like [[Z,Z],[N Z,Z]] stay exact.

Hilbert symbols use the Legendre formula at odd primes and an exhaustive
solvability search mod 64 at p = 2, which sidesteps the case table for
the dyadic symbol.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import gmpy2
import numpy as np

INF_PLACE = "inf"


def _is_square(q: Fraction) -> bool:
    if q < 0:
        return False
    return isqrt(q.numerator) ** 2 == q.numerator and isqrt(q.denominator) ** 2 == q.denominator


def _valuation(q: Fraction, p: int) -> tuple[int, Fraction]:
    """p-adic valuation and unit part of a nonzero rational."""
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


def _legendre(u: Fraction, p: int) -> int:
    """Legendre symbol of a p-adic unit modulo an odd prime."""
    r = u.numerator * pow(u.denominator, -1, p) % p
    s = pow(r, (p - 1) // 2, p)
    return 1 if s == 1 else -1


@lru_cache(maxsize=None)
def _dyadic_symbol(a_red: int, b_red: int) -> int:
    """Hilbert symbol at 2 by primitive solvability of z^2 = a x^2 + b y^2
    mod 64.  a_red, b_red are square-class representatives 2^e*u with
    e in {0,1} and u odd taken mod 8."""
    n = 64
    r = np.arange(n)
    sq = (r * r) % n
    vals = (a_red * sq[:, None, None] + b_red * sq[None, :, None] - sq[None, None, :]) % n
    odd = (r % 2 == 1)
    primitive = odd[:, None, None] | odd[None, :, None] | odd[None, None, :]
    return 1 if np.any((vals == 0) & primitive) else -1


def _square_class_rep_2(q: Fraction) -> int:
    v, u = _valuation(q, 2)
    # odd part of a 2-adic unit is determined mod 8 as a square class
    r = u.numerator * pow(u.denominator, -1, 8) % 8
    return (2 ** (v % 2)) * r


def hilbert_symbol(a, b, place) -> int:
    """(a,b)_v for v a prime or the infinite place ("inf").

    Equals +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v,
    i.e. iff a is a norm from Q_v(sqrt(b)).
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol needs nonzero arguments")
    if place in (INF_PLACE, float("inf")):
        return -1 if (a < 0 and b < 0) else 1
    p = int(place)
    if p == 2:
        return _dyadic_symbol(_square_class_rep_2(a), _square_class_rep_2(b))
    alpha, u = _valuation(a, p)
    beta, v = _valuation(b, p)
    eps = (p - 1) // 2
    sign = -1 if (alpha * beta * eps) % 2 else 1
    if beta % 2:
        sign *= _legendre(u, p)
    if alpha % 2:
        sign *= _legendre(v, p)
    return sign


def _prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def discriminant(a, b) -> tuple[int, list[int]]:
    """Reduced discriminant d_B and ramified primes of (a,b | Q).

    Raises for algebras ramified at the real place (definite algebras).
    """
    a, b = Fraction(a), Fraction(b)
    if hilbert_symbol(a, b, INF_PLACE) == -1:
        raise ValueError("definite algebra unsupported")
    candidates = {2}
    for q in (a, b):
        candidates.update(_prime_factors(q.numerator))
        candidates.update(_prime_factors(q.denominator))
    ramified = sorted(p for p in candidates if hilbert_symbol(a, b, p) == -1)
    if len(ramified) % 2:
        raise ArithmeticError("odd ramification set contradicts the product formula")
    d = 1
    for p in ramified:
        d *= p
    return d, ramified


@dataclass(frozen=True)
class QuaternionAlgebra:
    """An indefinite rational quaternion algebra.

    For split=False the basis is (1, i, j, ij) for (a,b | Q) with a > 0
    a non-square, so sqrt(a) is a real irrational and the standard real
    embedding applies.  For split=True the basis is the matrix units
    (e11, e12, e21, e22) of M_2(Q) and a, b are unused.
    """

    a: Fraction
    b: Fraction
    ramified_primes: tuple[int, ...]
    disc: int
    split: bool = False

    @classmethod
    def create(cls, a, b) -> "QuaternionAlgebra":
        a, b = Fraction(a), Fraction(b)
        if a <= 0 or _is_square(a):
            raise ValueError("need a > 0 and not a square for the real embedding")
        d, ram = discriminant(a, b)
        return cls(a, b, tuple(ram), d)

    @classmethod
    def split_algebra(cls) -> "QuaternionAlgebra":
        return cls(Fraction(0), Fraction(0), (), 1, split=True)

    def element(self, x0, x1, x2, x3) -> "QuatElement":
        return QuatElement(self, Fraction(x0), Fraction(x1), Fraction(x2), Fraction(x3))

    def one(self) -> "QuatElement":
        if self.split:
            return self.element(1, 0, 0, 1)
        return self.element(1, 0, 0, 0)

    def zero(self) -> "QuatElement":
        return self.element(0, 0, 0, 0)

    def basis(self) -> list["QuatElement"]:
        return [self.element(*[1 if i == k else 0 for i in range(4)]) for k in range(4)]

    def from_matrix_entries(self, m11, m12, m21, m22) -> "QuatElement":
        if not self.split:
            raise ValueError("matrix entries only define elements of the split algebra")
        return self.element(m11, m12, m21, m22)

    def to_json(self) -> dict:
        if self.split:
            return {"split": True}
        return {"a": str(self.a), "b": str(self.b)}

    @classmethod
    def from_json(cls, data: dict) -> "QuaternionAlgebra":
        if data.get("split"):
            return cls.split_algebra()
        return cls.create(Fraction(data["a"]), Fraction(data["b"]))


@dataclass(frozen=True)
class QuatElement:
    """Element with exact rational coordinates in the algebra basis."""

    algebra: QuaternionAlgebra
    x0: Fraction
    x1: Fraction
    x2: Fraction
    x3: Fraction

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.x0, self.x1, self.x2, self.x3)

    def _check(self, other: "QuatElement"):
        if self.algebra != other.algebra:
            raise ValueError("algebra mismatch")

    def __add__(self, other: "QuatElement") -> "QuatElement":
        self._check(other)
        return QuatElement(self.algebra, *(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other: "QuatElement") -> "QuatElement":
        self._check(other)
        return QuatElement(self.algebra, *(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self) -> "QuatElement":
        return QuatElement(self.algebra, *(-x for x in self.coords))

    def scale(self, c) -> "QuatElement":
        c = Fraction(c)
        return QuatElement(self.algebra, *(c * x for x in self.coords))

    def __mul__(self, other: "QuatElement") -> "QuatElement":
        self._check(other)
        B = self.algebra
        if B.split:
            a11, a12, a21, a22 = self.coords
            b11, b12, b21, b22 = other.coords
            return QuatElement(B, a11 * b11 + a12 * b21, a11 * b12 + a12 * b22,
                               a21 * b11 + a22 * b21, a21 * b12 + a22 * b22)
        a, b = B.a, B.b
        x0, x1, x2, x3 = self.coords
        y0, y1, y2, y3 = other.coords
        # 1,i,j,ij with i^2=a, j^2=b, ij=-ji
        return QuatElement(
            B,
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    def conj(self) -> "QuatElement":
        """Main involution."""
        if self.algebra.split:
            m11, m12, m21, m22 = self.coords
            return QuatElement(self.algebra, m22, -m12, -m21, m11)
        return QuatElement(self.algebra, self.x0, -self.x1, -self.x2, -self.x3)

    def reduced_norm(self) -> Fraction:
        if self.algebra.split:
            m11, m12, m21, m22 = self.coords
            return m11 * m22 - m12 * m21
        a, b = self.algebra.a, self.algebra.b
        x0, x1, x2, x3 = self.coords
        return x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3

    def reduced_trace(self) -> Fraction:
        if self.algebra.split:
            return self.x0 + self.x3
        return 2 * self.x0

    def trace_pair(self, other: "QuatElement") -> Fraction:
        """Trace pairing <x,y> = tr(x y^iota)."""
        return (self * other.conj()).reduced_trace()

    def inverse(self) -> "QuatElement":
        n = self.reduced_norm()
        if n == 0:
            raise ZeroDivisionError("element has reduced norm zero")
        return self.conj().scale(Fraction(1) / n)


class RealEmbedding:
    """The fixed embedding B -> M_2(R).

    For (a,b | Q) an element x0 + x1 i + x2 j + x3 ij maps to
    [[x0 + x1 sqrt(a), x2 + x3 sqrt(a)], [b (x2 - x3 sqrt(a)), x0 - x1 sqrt(a)]].
    For the split algebra the matrix-unit coordinates are already the
    matrix entries.  sqrt(a) is cached at the requested precision.
    """

    def __init__(self, algebra: QuaternionAlgebra, prec: int = 53):
        self.algebra = algebra
        self.prec = prec
        if algebra.split:
            self.sqrt_a = None
            self._sqrt_a_mp = None
        else:
            with gmpy2.context(precision=prec + 10):
                self._sqrt_a_mp = gmpy2.sqrt(
                    gmpy2.mpfr(algebra.a.numerator) / algebra.a.denominator)
            self.sqrt_a = float(self._sqrt_a_mp)

    def matrix(self, x: QuatElement) -> np.ndarray:
        """Image as a 2x2 double-precision matrix."""
        if self.algebra.split:
            return np.array([[float(x.x0), float(x.x1)], [float(x.x2), float(x.x3)]])
        sa = self.sqrt_a
        x0, x1, x2, x3 = (float(c) for c in x.coords)
        b = float(self.algebra.b)
        return np.array([
            [x0 + x1 * sa, x2 + x3 * sa],
            [b * (x2 - x3 * sa), x0 - x1 * sa],
        ])

    def matrix_mp(self, x: QuatElement):
        """Image with mpfr entries at this embedding's precision."""
        def mp(q: Fraction):
            return gmpy2.mpfr(q.numerator) / q.denominator

        with gmpy2.context(precision=self.prec + 10):
            if self.algebra.split:
                return ((mp(x.x0), mp(x.x1)), (mp(x.x2), mp(x.x3)))
            sa = self._sqrt_a_mp
            b = mp(self.algebra.b)
            x0, x1, x2, x3 = (mp(c) for c in x.coords)
            return ((x0 + x1 * sa, x2 + x3 * sa),
                    (b * (x2 - x3 * sa), x0 - x1 * sa))


def find_algebra(d_B: int, max_b: int = 200) -> QuaternionAlgebra:
    """A pair (a,b) realizing the indefinite algebra of discriminant d_B.

    Small search over non-square a > 0 and squarefree b; the first match
    (deterministic order) wins, keeping embeddings numerically mild.
    """
    if d_B < 1:
        raise ValueError("discriminant must be a positive squarefree integer")
    if d_B == 1:
        return QuaternionAlgebra.split_algebra()
    factors = _prime_factors(d_B)
    prod = 1
    for p in factors:
        prod *= p
    if prod != d_B or len(factors) % 2:
        raise ValueError("discriminant must be squarefree with an even number of prime factors")
    for a in range(2, 60):
        if _is_square(Fraction(a)):
            continue
        for absb in range(1, max_b + 1):
            if not _is_squarefree(absb):
                continue
            for b in (absb, -absb):
                try:
                    d, _ram = discriminant(a, b)
                except ValueError:
                    continue
                if d == d_B:
                    return QuaternionAlgebra.create(a, b)
    raise ValueError(f"no (a,b) pair found for discriminant {d_B} with |b| <= {max_b}")


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True
