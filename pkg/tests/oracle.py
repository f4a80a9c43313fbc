"""Brute-force oracles: filter every digit string of length n by the defining inequality."""

from itertools import product

import gmpy2
import numpy as np
from gmpy2 import mpfr


def all_sums(beta, n, bits):
    """Every (digits, sum e_i beta^-i) of length n, summed directly."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        beta = mpfr(beta)
        powers = [beta ** -(i + 1) for i in range(n)]
        out = []
        for d in product((0, 1), repeat=n):
            out.append((d, sum((p for e, p in zip(d, powers) if e), mpfr(0))))
        return out


def brute_prefixes(x, n, beta, bits, sums=None):
    """{digits: gap} over strings with 0 <= x - sum <= 1/(beta^n (beta - 1)).

    Both ends get the same half-precision slack the library uses.
    """
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        beta = mpfr(beta)
        x = mpfr(x)
        scale = beta ** -n
        tau = mpfr(2) ** -(bits // 2)
        hi = (1 / (beta - 1) + tau) * scale
        lo = -tau * scale
        found = {}
        for d, s in sums if sums is not None else all_sums(beta, n, bits):
            gap = x - s
            if lo <= gap <= hi:
                found[d] = gap
        return found


def random_points(c, count, seed):
    rng = np.random.default_rng(seed)
    return [float(v) * float(c) for v in rng.random(count)]
