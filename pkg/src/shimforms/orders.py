"""Orders in quaternion algebras: maximal orders, Eichler orders of
squarefree level, trace-pairing duals, locally dual lattices, and
hyperbolic covolumes.

An order is stored as an exact lattice basis in the algebra's coordinate
system.  Maximal orders are built by saturation: starting from the obvious
integral span, adjoin p-fractional integral elements and re-close the ring
until the reduced discriminant drops to the algebra discriminant.  All
structural claims (ring closure, discriminants, dualities) are exact and
re-checkable, which the tests exploit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import isqrt, pi

from .exact import (
    IntLatticeBasis,
    hnf,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    mat_inverse,
)
from .quaternion import QuatElement, QuaternionAlgebra


@dataclass(frozen=True)
class OrderLattice:
    """A rank-4 lattice in B with order/level metadata.

    ``basis`` rows are coordinates in the algebra basis (1,i,j,ij), or the
    matrix units for split B.  ``level`` is the Eichler level N (1 for a
    maximal order); for dual kinds it is inherited from the parent order.
    """

    algebra: QuaternionAlgebra
    basis: IntLatticeBasis
    level: int = 1
    kind: str = "maximal"
    dual_divisor: int | None = None

    def elements(self) -> list[QuatElement]:
        return [self.algebra.element(*row) for row in self.basis.basis_rows()]

    def contains(self, x: QuatElement) -> bool:
        return self.basis.contains(x.coords)

    def trace_gram(self) -> list[list[Fraction]]:
        els = self.elements()
        return [[u.trace_pair(v) for v in els] for u in els]

    def reduced_discriminant(self) -> int:
        return reduced_discriminant(self)

    def conjugate_by(self, gamma: QuatElement) -> "OrderLattice":
        """The lattice gamma * self * gamma^{-1} (same algebra coordinates)."""
        n = gamma.reduced_norm()
        if n == 0:
            raise ZeroDivisionError("conjugation by a norm-zero element")
        rows = []
        for el in self.elements():
            conj = (gamma * el * gamma.conj()).scale(Fraction(1) / n)
            rows.append(list(conj.coords))
        return OrderLattice(self.algebra, hnf(rows), self.level, self.kind, self.dual_divisor)

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.to_json(),
            "basis": [[str(x) for x in row] for row in self.basis.basis_rows()],
            "level": self.level,
            "kind": self.kind,
        }


def order_from_basis(algebra: QuaternionAlgebra, rows, level: int = 1,
                     kind: str = "eichler") -> OrderLattice:
    """Build and validate an order from explicit rational basis rows."""
    R = OrderLattice(algebra, hnf(rows), level, kind)
    validate_order(R)
    return R


def validate_order(R: OrderLattice) -> None:
    """Exact order axioms: contains 1, multiplicatively closed, integral."""
    if not R.contains(R.algebra.one()):
        raise ValueError("lattice does not contain 1")
    els = R.elements()
    for u in els:
        for v in els:
            if not R.contains(u * v):
                raise ValueError("lattice is not closed under multiplication")
    for u in els:
        if u.reduced_trace().denominator != 1 or u.reduced_norm().denominator != 1:
            raise ValueError("basis element is not integral")


def reduced_discriminant(R: OrderLattice) -> int:
    """Positive integer whose square is |det| of the trace-pairing Gram."""
    gram = R.trace_gram()
    d = _det4(gram)
    d = abs(d)
    if d.denominator != 1:
        raise ValueError("not an order basis: non-integral Gram determinant")
    r = isqrt(d.numerator)
    if r * r != d.numerator:
        raise ValueError("not an order basis: Gram determinant is not a square")
    return r


def _det4(m: list[list[Fraction]]) -> Fraction:
    n = len(m)
    a = [row[:] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = Fraction(1) / a[col][col]
        for i in range(col + 1, n):
            if a[i][col] != 0:
                c = a[i][col] * inv
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    return det


def maximal_order(B: QuaternionAlgebra) -> OrderLattice:
    """A maximal order in B, found by p-saturation from the obvious span.

    Split case: M_2(Z) in matrix units.  Otherwise start from
    Z<1, c_a i, c_b j, c_a c_b ij> (scaled so generators are integral) and,
    for each prime p dividing disc(order)/d_B, adjoin a p-fractional
    element with integral trace and norm whose ring closure is an integral
    order of smaller discriminant.  Terminates when the reduced
    discriminant equals d_B.
    """
    if B.split:
        eye = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        return OrderLattice(B, hnf(eye), 1, "maximal")
    ca, cb = B.a.denominator, B.b.denominator
    rows = [[1, 0, 0, 0], [0, ca, 0, 0], [0, 0, cb, 0], [0, 0, 0, ca * cb]]
    R = OrderLattice(B, hnf(rows), 1, "maximal")
    disc = reduced_discriminant(R)
    while disc != B.disc:
        index = disc // B.disc
        p = _smallest_prime_factor(index)
        enlarged = _enlarge_at_prime(R, p)
        if enlarged is None:
            raise ArithmeticError(f"saturation stalled at prime {p} (disc {disc})")
        R = enlarged
        disc = reduced_discriminant(R)
    validate_order(R)
    return R


def _smallest_prime_factor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def _enlarge_at_prime(R: OrderLattice, p: int) -> OrderLattice | None:
    """Try candidates x = v/p with v in R (coefficients mod p); return the
    ring closure of R + Zx when it is a strictly larger integral order."""
    B = R.algebra
    rows = R.basis.basis_rows()
    disc0 = reduced_discriminant(R)
    for vec in _projective_coeffs(p):
        coords = [sum(Fraction(c) * rows[k][t] for k, c in enumerate(vec)) / p
                  for t in range(4)]
        x = B.element(*coords)
        if R.contains(x):
            continue
        if x.reduced_trace().denominator != 1 or x.reduced_norm().denominator != 1:
            continue
        closed = _ring_closure(R, x)
        if closed is None:
            continue
        disc1 = reduced_discriminant(closed)
        if disc1 < disc0 and disc0 % disc1 == 0:
            return closed
    return None


def _projective_coeffs(p: int):
    """Nonzero vectors of F_p^4 with first nonzero coordinate 1."""
    for lead in range(4):
        prefix = [0] * lead + [1]
        free = 4 - lead - 1
        def rec(acc, k):
            if k == 0:
                yield prefix + acc
                return
            for c in range(p):
                yield from rec(acc + [c], k - 1)
        yield from rec([], free)


def _ring_closure(R: OrderLattice, x: QuatElement) -> OrderLattice | None:
    """Close R + Zx under multiplication; None if closure is not integral."""
    B = R.algebra
    current = lattice_sum(R.basis, hnf([list(x.coords)] +
                                       [list(e.coords) for e in R.elements()]))
    for _ in range(8):
        els = [B.element(*row) for row in current.basis_rows()]
        for e in els:
            if e.reduced_trace().denominator != 1 or e.reduced_norm().denominator != 1:
                return None
        prods = []
        grew = False
        for u in els:
            for v in els:
                w = u * v
                if not current.contains(w.coords):
                    prods.append(list(w.coords))
                    grew = True
        if not grew:
            return OrderLattice(B, current, R.level, R.kind)
        current = _span_with(current, prods)
    return None


def _span_with(L: IntLatticeBasis, extra_rows) -> IntLatticeBasis:
    from .exact import _span_basis, _frac_rows
    return _span_basis(_frac_rows(list(L.basis_rows()) + list(extra_rows)))


def eichler_order(R_max: OrderLattice, N: int) -> OrderLattice:
    """An Eichler order of squarefree level N inside R_max.

    Realized as R_max cap gamma R_max gamma^{-1} for an element gamma of
    reduced norm N, searched in order of increasing size; the reduced
    discriminant certifies the level.
    """
    B = R_max.algebra
    if N == 1:
        return OrderLattice(B, R_max.basis, 1, "eichler")
    from math import gcd
    if gcd(N, B.disc) != 1:
        raise ValueError("level must be coprime to the discriminant")
    if not _is_squarefree_int(N):
        raise ValueError("only squarefree levels are supported")
    if B.split:
        rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, N, 0], [0, 0, 0, 1]]
        return OrderLattice(B, hnf(rows), N, "eichler")
    target = B.disc * N
    for gamma in _norm_candidates(R_max, N):
        conj = R_max.conjugate_by(gamma)
        inter = lattice_intersection(R_max.basis, conj.basis)
        cand = OrderLattice(B, inter, N, "eichler")
        try:
            disc = reduced_discriminant(cand)
        except ValueError:
            continue
        if disc == target:
            validate_order(cand)
            return cand
    raise ArithmeticError(f"no conjugating element of norm {N} found")


def _norm_candidates(R: OrderLattice, N: int, limit: int = 4000):
    """Elements of R with reduced norm N, in increasing embedded size."""
    from .latsum import conjugated_lattice, enumerate_points
    from .quaternion import RealEmbedding

    emb = RealEmbedding(R.algebra)
    L = conjugated_lattice(R, emb, 1j, 1j)
    bound = 4.0 * N + 8.0
    seen = 0
    while seen < limit:
        pts = list(enumerate_points(L, Fraction(N), bound))
        for pt in pts:
            seen += 1
            yield R.algebra.element(*[Fraction(c) for c in pt.coords])
        if pts:
            return
        bound *= 2


def _is_squarefree_int(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def dual_lattice(R: OrderLattice) -> OrderLattice:
    """Trace-pairing dual R* (contains R; index (d_B N)^2)."""
    gram = R.trace_gram()
    inv = mat_inverse(gram)
    rows = R.basis.basis_rows()
    dual_rows = [[sum(inv[i][k] * rows[k][j] for k in range(4)) for j in range(4)]
                 for i in range(4)]
    return OrderLattice(R.algebra, hnf(dual_rows), R.level, "dual")


def locally_dual(R: OrderLattice, d: int) -> OrderLattice:
    """The lattice R^(d) = R + (d_B N / d) R*, dual to R exactly at the
    primes dividing d; R^(1) = R and R^(d_B N) = R*."""
    M = R.algebra.disc * R.level
    if d < 1 or M % d != 0:
        raise ValueError(f"{d} does not divide d_B*N = {M}")
    m = M // d
    dual = dual_lattice(R)
    scaled = hnf([[m * x for x in row] for row in dual.basis.basis_rows()])
    merged = lattice_sum(R.basis, scaled)
    return OrderLattice(R.algebra, merged, R.level, "locally_dual", dual_divisor=d)


def covolume(d_B: int, N: int, which: str = "quaternionic") -> float:
    """Hyperbolic covolume: (pi/3) d_B N prod_{p|d_B}(1-1/p) prod_{p|N}(1+1/p)
    for the Shimura curve group, or (pi/3) d_B N prod_{p|d_B N}(1+1/p) for
    the classical Gamma_0(d_B N)."""
    from math import gcd
    if gcd(d_B, N) != 1:
        raise ValueError("d_B and N must be coprime")
    vol = pi / 3 * d_B * N
    if which == "quaternionic":
        for p in _prime_list(d_B):
            vol *= 1 - 1 / p
        for p in _prime_list(N):
            vol *= 1 + 1 / p
    elif which == "classical":
        for p in _prime_list(d_B * N):
            vol *= 1 + 1 / p
    else:
        raise ValueError("which must be 'quaternionic' or 'classical'")
    return vol


def _prime_list(n: int) -> list[int]:
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


_CURATED = "curated_orders.json"


def curated_maximal_order(d_B: int) -> OrderLattice | None:
    """Load the shipped maximal order of discriminant d_B, if present."""
    try:
        text = resources.files("shimforms.data").joinpath(_CURATED).read_text()
    except FileNotFoundError:
        return None
    table = json.loads(text)
    entry = table.get(str(d_B))
    if entry is None:
        return None
    B = QuaternionAlgebra.from_json(entry["algebra"])
    rows = [[Fraction(x) for x in row] for row in entry["basis"]]
    return order_from_basis(B, rows, level=1, kind="maximal")
