"""Small helpers for mixed double / gmpy2-mpfr numerics."""

from __future__ import annotations

from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr


def to_mpfr(x, prec: int) -> mpfr:
    """Convert exactly representable inputs (int, Fraction, float, mpfr)
    to an mpfr rounded at ``prec`` bits."""
    with gmpy2.context(precision=prec):
        if isinstance(x, Fraction):
            return mpfr(x.numerator) / x.denominator
        return mpfr(x)


def to_mpc(z, prec: int) -> mpc:
    with gmpy2.context(precision=prec):
        if isinstance(z, mpc):
            return mpc(z)
        if isinstance(z, complex):
            return mpc(z)
        return mpc(to_mpfr(z, prec), 0)


def mp_pi(prec: int) -> mpfr:
    with gmpy2.context(precision=prec):
        return gmpy2.const_pi()


def legendre_nodes(n: int, prec: int) -> tuple[list, list]:
    """Gauss-Legendre nodes and weights on [-1, 1] at ``prec`` bits.

    Double-precision nodes from numpy seed a Newton iteration on P_n,
    which converges quadratically, so a handful of steps reaches any
    working precision.
    """
    xs_d, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    with gmpy2.context(precision=prec + 20):
        for x0 in xs_d:
            x = mpfr(x0)
            for _ in range(8):
                p, dp = _legendre_eval(n, x)
                x = x - p / dp
            p, dp = _legendre_eval(n, x)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(+x)
            weights.append(+w)
    return nodes, weights


def _legendre_eval(n: int, x):
    """(P_n(x), P_n'(x)) by the three-term recurrence."""
    p0, p1 = mpfr(1), x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    return p1, dp
