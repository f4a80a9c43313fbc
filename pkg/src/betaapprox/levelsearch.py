"""Vectorized per-level best-approximation search.

For every depth n in a range this finds the level-n sum closest to ``x``
from below (and optionally from above). Orbit values are carried as
double-double pairs (about 104 significant bits) in numpy arrays.

Depths up to ``R`` are read directly off a breadth-first orbit walk. For
deeper levels the sum is split as ``A + beta^-h B`` with ``h = n - R``:
the walk supplies the orbit states ``y_h`` of the admissible heads ``A``
and a sorted table of all level-R sums supplies ``B``. The best tail for
a state is its predecessor (or successor) in that table.

The engine only picks witnesses. Every reported gap is recomputed from
the witness digits at the context's MPFR precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from gmpy2 import mpfr

from .errors import BudgetExceeded, DomainError
from .expansion import DEFAULT_BUDGET, BetaContext, Digits, orbit

TABLE_DEPTH = 20
MAX_HEAD_DEPTH = 63
_SPLIT = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _renorm(hi, lo):
    s = hi + lo
    return s, lo - (s - hi)


def dd_mul(ahi, alo, bhi: float, blo: float):
    p, e = _two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return _renorm(p, e)


def dd_add(ahi, alo, bhi, blo):
    s, e = _two_sum(ahi, bhi)
    e = e + (alo + blo)
    return _renorm(s, e)


def dd_from_mpfr(v: mpfr) -> tuple[float, float]:
    hi = float(v)
    lo = float(v - mpfr(hi))
    return hi, lo


def _as_key(hi, lo):
    # numpy orders complex numbers lexicographically by (real, imag).
    return hi + 1j * lo


@dataclass(frozen=True)
class _Table:
    keys: np.ndarray   # complex128, sorted
    words: np.ndarray  # uint64 digit words, first digit most significant
    depth: int


@lru_cache(maxsize=4)
def _level_table(beta_hi: float, beta_lo: float, depth: int) -> _Table:
    hi = np.zeros(1)
    lo = np.zeros(1)
    words = np.zeros(1, dtype=np.uint64)
    # beta^-j in double-double, by repeated division via mpfr for accuracy.
    b = mpfr(beta_hi) + mpfr(beta_lo)
    power = mpfr(1)
    for j in range(1, depth + 1):
        power = power / b
        phi, plo = dd_from_mpfr(power)
        ahi, alo = dd_add(hi, lo, phi, plo)
        hi = np.concatenate([hi, ahi])
        lo = np.concatenate([lo, alo])
        words = np.concatenate([words << np.uint64(1), (words << np.uint64(1)) | np.uint64(1)])
    keys = _as_key(hi, lo)
    order = np.argsort(keys, kind="stable")
    return _Table(keys[order], words[order], depth)


@dataclass(frozen=True)
class LevelGap:
    """Best level-n approximations of x; gaps are non-negative distances."""

    n: int
    below_gap: mpfr
    below_digits: Digits
    above_gap: Optional[mpfr] = None
    above_digits: Optional[Digits] = None


def _word_digits(word: int, n: int) -> Digits:
    return tuple((word >> (n - 1 - i)) & 1 for i in range(n))


class LevelSearch:
    """Lazily extended orbit walk from ``x`` answering per-level queries.

    ``two_sided=True`` keeps orbit states in ``[-c, c]`` instead of
    ``[0, c]``, which is exactly the set of heads that can lead to a
    level sum within ``c beta^-n`` of ``x`` from either side.
    """

    def __init__(self, x, ctx: BetaContext, two_sided: bool = False,
                 budget: int = DEFAULT_BUDGET, table_depth: int = TABLE_DEPTH):
        self.ctx = ctx
        with ctx.local():
            self.x = ctx.real(x)
            if not ctx.contains(self.x):
                raise DomainError(f"x = {float(self.x):.6g} lies outside [0, c]")
        self.two_sided = two_sided
        self.budget = budget
        self.table_depth = table_depth
        self.beta = dd_from_mpfr(ctx.beta)
        self.c = dd_from_mpfr(ctx.c)
        self.lower_edge = (-self.c[0], -self.c[1]) if two_sided else (0.0, 0.0)
        # Tolerance sits just above double-double resolution.
        self.tol = 2.0 ** -90 * max(1.0, self.c[0])
        hi, lo = dd_from_mpfr(self.x)
        self._layers = [(np.array([hi]), np.array([lo]), np.zeros(1, dtype=np.uint64))]
        self._nodes = 1

    def _extend(self):
        hi, lo, words = self._layers[-1]
        if len(self._layers) > MAX_HEAD_DEPTH:
            raise BudgetExceeded(f"orbit walk deeper than {MAX_HEAD_DEPTH} digits")
        bhi, blo = self.beta
        phi, plo = dd_mul(hi, lo, bhi, blo)
        # T_0 child: beta*y must not exceed c.
        over = (phi - self.c[0]) + (plo - self.c[1])
        keep0 = over <= self.tol
        h0, l0 = phi[keep0], plo[keep0]
        snap = over[keep0] > 0
        h0[snap], l0[snap] = self.c
        # T_1 child: beta*y - 1 must not fall below the lower edge.
        qhi, qlo = dd_add(phi, plo, -1.0, 0.0)
        under = (self.lower_edge[0] - qhi) + (self.lower_edge[1] - qlo)
        keep1 = under <= self.tol
        h1, l1 = qhi[keep1], qlo[keep1]
        snap = under[keep1] > 0
        h1[snap], l1[snap] = self.lower_edge
        w0 = words[keep0] << np.uint64(1)
        w1 = (words[keep1] << np.uint64(1)) | np.uint64(1)
        layer = (np.concatenate([h0, h1]), np.concatenate([l0, l1]), np.concatenate([w0, w1]))
        self._nodes += len(layer[0])
        if self._nodes > self.budget:
            raise BudgetExceeded(f"more than {self.budget} orbit states")
        self._layers.append(layer)

    def states(self, depth: int):
        while len(self._layers) <= depth:
            self._extend()
        return self._layers[depth]

    def count(self, n: int) -> int:
        """Number of orbit states at depth n (= |Sigma_n(x)| in one-sided mode)."""
        return len(self.states(n)[0])

    def _candidates(self, n: int):
        """Best below/above witnesses as (word, depth) pairs, or None."""
        if n <= self.table_depth:
            hi, lo, words = self.states(n)
            val = hi + lo
            below = above = None
            nonneg = val >= -self.tol
            if nonneg.any():
                idx = np.flatnonzero(nonneg)
                best = idx[np.argmin(val[idx])]
                below = int(words[best])
            if self.two_sided:
                nonpos = val <= self.tol
                if nonpos.any():
                    idx = np.flatnonzero(nonpos)
                    best = idx[np.argmax(val[idx])]
                    above = int(words[best])
            return below, above
        h = n - self.table_depth
        table = _level_table(self.beta[0], self.beta[1], self.table_depth)
        hi, lo, words = self.states(h)
        keys = _as_key(hi, lo)
        tk = table.keys
        below = above = None
        pos = np.searchsorted(tk, keys, side="right") - 1
        ok = pos >= 0
        if ok.any():
            idx = np.flatnonzero(ok)
            p = pos[idx]
            dhi, dlo = dd_add(hi[idx], lo[idx], -tk.real[p], -tk.imag[p])
            gaps = dhi + dlo
            # A tail just above y within tolerance counts as an exact hit.
            nxt = np.minimum(p + 1, len(tk) - 1)
            nhi, nlo = dd_add(tk.real[nxt], tk.imag[nxt], -hi[idx], -lo[idx])
            tiny = (nhi + nlo <= self.tol) & (nxt != p)
            gaps = np.where(tiny, 0.0, gaps)
            p = np.where(tiny, nxt, p)
            k = int(np.argmin(gaps))
            below = (int(words[idx[k]]) << self.table_depth) | int(table.words[p[k]])
        if self.two_sided:
            pos = np.searchsorted(tk, keys, side="left")
            ok = pos < len(tk)
            if ok.any():
                idx = np.flatnonzero(ok)
                p = pos[idx]
                dhi, dlo = dd_add(tk.real[p], tk.imag[p], -hi[idx], -lo[idx])
                gaps = dhi + dlo
                k = int(np.argmin(gaps))
                above = (int(words[idx[k]]) << self.table_depth) | int(table.words[p[k]])
        return below, above

    def level(self, n: int) -> LevelGap:
        if n < 1:
            raise ValueError("n must be >= 1")
        below_w, above_w = self._candidates(n)
        ctx = self.ctx
        with ctx.local():
            scale = ctx.beta ** (-n)
            below_gap = below_digits = above_gap = above_digits = None
            if below_w is not None:
                below_digits = _word_digits(below_w, n)
                y = orbit(self.x, below_digits, ctx)
                below_gap = max(y, mpfr(0)) * scale
            if above_w is not None:
                above_digits = _word_digits(above_w, n)
                y = orbit(self.x, above_digits, ctx)
                above_gap = max(-y, mpfr(0)) * scale
        if below_gap is None:
            raise DomainError("no level sum lies below x")
        return LevelGap(n, below_gap, below_digits, above_gap, above_digits)


def level_gaps(x, n_lo: int, n_hi: int, ctx: BetaContext, two_sided: bool = False,
               budget: int = DEFAULT_BUDGET) -> list[LevelGap]:
    """Best level-n approximations of ``x`` for every n in [n_lo, n_hi]."""
    search = LevelSearch(x, ctx, two_sided=two_sided, budget=budget)
    return [search.level(n) for n in range(n_lo, n_hi + 1)]
