"""Orbit maps, n-prefixes and digit-tree searches at MPFR precision.

A binary string is an n-prefix of ``x`` exactly when the orbit of ``x``
under ``T_0(y) = beta*y`` and ``T_1(y) = beta*y - 1`` stays in
``[0, c]``, ``c = 1/(beta - 1)``. All searches below walk that orbit, so
values stay of order one and no tiny sums are formed by subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import gmpy2
from gmpy2 import mpfr

from ._mp import to_decimal, to_mpfr, workprec
from .algebraic import (
    GarsiaCertificate,
    IntPolynomial,
    all_roots,
    parse_polynomial,
    real_roots_in_open_unit_to_two,
)
from .errors import BudgetExceeded, DomainError

DEFAULT_BUDGET = 10_000_000
DEFAULT_PRECISION = 256

Digits = tuple[int, ...]

GREEDY = "GREEDY"
LAZY = "LAZY"
UNIQUE_TO_DEPTH = "UNIQUE_TO_DEPTH"
BRANCHES_AT = "BRANCHES_AT"


def precision_for_depth(n: int) -> int:
    return max(DEFAULT_PRECISION, n + 64)


@dataclass(frozen=True)
class BetaContext:
    """A base beta in (1, 2) at a fixed working precision."""

    beta: mpfr
    c: mpfr
    precision_bits: int
    label: str = ""
    polynomial: Optional[IntPolynomial] = field(default=None, compare=False)
    certificate: Optional[GarsiaCertificate] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_value(cls, beta, precision_bits: int = DEFAULT_PRECISION, label: str | None = None):
        with workprec(precision_bits):
            b = to_mpfr(beta, precision_bits)
            if not (1 < b < 2):
                raise DomainError(f"beta must lie in (1, 2), got {beta}")
            c = 1 / (b - 1)
        return cls(b, c, precision_bits, label if label is not None else str(beta))

    @classmethod
    def from_polynomial(cls, poly, precision_bits: int = DEFAULT_PRECISION, label: str | None = None):
        """Unique real root of ``poly`` in (1, 2); no Garsia certificate implied."""
        p = parse_polynomial(poly)
        inside = real_roots_in_open_unit_to_two(all_roots(p, precision_bits))
        if len(inside) != 1:
            raise DomainError(f"{p} has {len(inside)} real roots in (1, 2)")
        with workprec(precision_bits):
            b = mpfr(inside[0].value.real)
            c = 1 / (b - 1)
        return cls(b, c, precision_bits, label or str(p), polynomial=p)

    @classmethod
    def from_certificate(cls, cert: GarsiaCertificate, label: str | None = None):
        bits = cert.precision_bits
        with workprec(bits):
            c = 1 / (cert.beta - 1)
        return cls(cert.beta, c, bits, label or str(cert.polynomial),
                   polynomial=cert.polynomial, certificate=cert)

    @property
    def tau(self) -> mpfr:
        """Boundary tolerance 2^(-precision_bits/2)."""
        return mpfr(2) ** (-(self.precision_bits // 2))

    def local(self):
        return workprec(self.precision_bits)

    def contains(self, x) -> bool:
        """x in [0, c] up to the boundary tolerance."""
        with self.local():
            return -self.tau <= x <= self.c + self.tau

    def real(self, value) -> mpfr:
        return to_mpfr(value, self.precision_bits)


def digits_str(d: Sequence[int]) -> str:
    return "".join(str(e) for e in d)


def _check_domain(x: mpfr, ctx: BetaContext):
    if not ctx.contains(x):
        raise DomainError(f"x = {float(x):.6g} lies outside [0, c = {float(ctx.c):.6g}]")


def _check_digits(d: Sequence[int]):
    for e in d:
        if e not in (0, 1):
            raise ValueError(f"digits must be 0 or 1, got {e!r}")


def orbit_step(y, digit: int, ctx: BetaContext) -> mpfr:
    """T_0(y) = beta*y, T_1(y) = beta*y - 1."""
    with ctx.local():
        return ctx.beta * ctx.real(y) - digit


def orbit(x, d: Sequence[int], ctx: BetaContext) -> mpfr:
    """Final orbit value (T_{d_n} o ... o T_{d_1})(x), without range checks."""
    with ctx.local():
        y = ctx.real(x)
        beta = ctx.beta
        for e in d:
            y = beta * y - e
        return y


class PrefixCheck(NamedTuple):
    is_prefix: bool
    gap: mpfr


def is_prefix(x, d: Sequence[int], ctx: BetaContext) -> PrefixCheck:
    """Test ``0 <= x - sum d_i beta^-i <= 1/(beta^n (beta-1))`` via the orbit.

    The gap ``x - sum`` equals ``beta^-n`` times the final orbit value.
    Both inequalities are closed and accept values within ``ctx.tau`` of
    the boundary, measured on the orbit value.
    """
    _check_digits(d)
    if len(d) < 1:
        raise ValueError("digit string must be non-empty")
    with ctx.local():
        xv = ctx.real(x)
        _check_domain(xv, ctx)
        y = orbit(xv, d, ctx)
        gap = y / ctx.beta ** len(d)
        ok = -ctx.tau <= y <= ctx.c + ctx.tau
    return PrefixCheck(bool(ok), gap)


@dataclass(frozen=True)
class PrefixEntry:
    digits: Digits
    y: mpfr
    gap: mpfr


@dataclass(frozen=True)
class PrefixSet:
    x: mpfr
    n: int
    entries: tuple[PrefixEntry, ...]
    precision_bits: int

    @property
    def count(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        bits = self.precision_bits
        return {
            "x": to_decimal(self.x, bits),
            "n": self.n,
            "count": self.count,
            "entries": [
                {"digits": digits_str(e.digits), "gap": to_decimal(e.gap, bits)} for e in self.entries
            ],
        }


def _walk(x: mpfr, n: int, ctx: BetaContext, budget: int, collect: bool):
    beta, c, tau = ctx.beta, ctx.c, ctx.tau
    hi = c + tau
    lo = -tau
    leaves = []
    count = 0
    nodes = 0
    # Explicit stack; T_1 pushed before T_0 so leaves come out lexicographically.
    stack = [(x, 0, 0)]
    while stack:
        y, depth, word = stack.pop()
        if depth == n:
            count += 1
            if collect:
                leaves.append((word, y))
            continue
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"more than {budget} tree nodes at n = {n}")
        t0 = beta * y
        t1 = t0 - 1
        if t1 >= lo:
            stack.append((t1, depth + 1, (word << 1) | 1))
        if t0 <= hi:
            stack.append((t0, depth + 1, word << 1))
    return count, leaves


def _word_to_digits(word: int, n: int) -> Digits:
    return tuple((word >> (n - 1 - i)) & 1 for i in range(n))


def enumerate_prefixes(x, n: int, ctx: BetaContext, budget: int = DEFAULT_BUDGET) -> PrefixSet:
    """All n-prefixes of ``x``, lexicographically sorted, with their gaps."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.local():
        xv = ctx.real(x)
        _check_domain(xv, ctx)
        _, leaves = _walk(xv, n, ctx, budget, collect=True)
        scale = ctx.beta ** (-n)
        entries = tuple(PrefixEntry(_word_to_digits(w, n), y, y * scale) for w, y in leaves)
    return PrefixSet(xv, n, entries, ctx.precision_bits)


def count_prefixes(x, n: int, ctx: BetaContext, budget: int = DEFAULT_BUDGET) -> int:
    """|Sigma_{beta,n}(x)| by the same walk as enumerate_prefixes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.local():
        xv = ctx.real(x)
        _check_domain(xv, ctx)
        count, _ = _walk(xv, n, ctx, budget, collect=False)
    return count


class MinGap(NamedTuple):
    gap: mpfr
    digits: Digits


def min_gap(x, n: int, ctx: BetaContext, budget: int = DEFAULT_BUDGET) -> MinGap:
    """Smallest ``x - sum d_i beta^-i`` over n-prefixes, by branch and bound.

    T_1 is explored first. From a node with value y at depth k the
    all-ones continuation ends at ``c + beta^(n-k) (y - c)``, and no
    continuation can end lower, so subtrees whose bound is not below the
    incumbent are cut.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.local():
        xv = ctx.real(x)
        _check_domain(xv, ctx)
        beta, c, tau = ctx.beta, ctx.c, ctx.tau
        hi = c + tau
        powers = [beta ** k for k in range(n + 1)]
        best = None
        best_word = 0
        nodes = 0
        stack = [(xv, 0, 0)]
        while stack:
            y, depth, word = stack.pop()
            if depth == n:
                if best is None or y < best:
                    best, best_word = y, word
                continue
            if best is not None:
                bound = c + powers[n - depth] * (y - c)
                if bound > 0 and bound >= best:
                    continue
                if best <= 0:
                    continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"more than {budget} tree nodes at n = {n}")
            t0 = beta * y
            t1 = t0 - 1
            if t0 <= hi:
                stack.append((t0, depth + 1, word << 1))
            if t1 >= -tau:
                stack.append((t1, depth + 1, (word << 1) | 1))
        gap = gmpy2.maxnum(best, mpfr(0)) / powers[n]
    return MinGap(gap, _word_to_digits(best_word, n))


def extremal_expansion(x, n: int, mode: str, ctx: BetaContext) -> Digits:
    """Greedy (lexicographically largest) or lazy (smallest) n-prefix of x."""
    mode = mode.upper()
    if mode not in (GREEDY, LAZY):
        raise ValueError(f"mode must be GREEDY or LAZY, got {mode!r}")
    with ctx.local():
        y = ctx.real(x)
        _check_domain(y, ctx)
        beta, c, tau = ctx.beta, ctx.c, ctx.tau
        out = []
        for _ in range(n):
            t0 = beta * y
            if mode == GREEDY:
                e = 1 if t0 - 1 >= -tau else 0
            else:
                e = 0 if t0 <= c + tau else 1
            y = t0 - e
            out.append(e)
    return tuple(out)


@dataclass(frozen=True)
class UniquenessVerdict:
    status: str
    branch_depth: Optional[int] = None

    def to_json(self) -> dict:
        return {"status": self.status, "branch_depth": self.branch_depth}


def unique_to_depth(x, n: int, ctx: BetaContext) -> UniquenessVerdict:
    """Follow the forced orbit; report the first depth where both digits are admissible."""
    with ctx.local():
        y = ctx.real(x)
        _check_domain(y, ctx)
        beta, c, tau = ctx.beta, ctx.c, ctx.tau
        for k in range(1, n + 1):
            t0 = beta * y
            t1 = t0 - 1
            ok0 = -tau <= t0 <= c + tau
            ok1 = -tau <= t1 <= c + tau
            if ok0 and ok1:
                return UniquenessVerdict(BRANCHES_AT, k)
            y = t0 if ok0 else t1
    return UniquenessVerdict(UNIQUE_TO_DEPTH)


def level_sums(n: int, ctx: BetaContext) -> list[tuple[Digits, mpfr]]:
    """Every level-n sum sum_{i<=n} d_i beta^-i with its digits, in digit order."""
    with ctx.local():
        sums = [((), mpfr(0))]
        p = mpfr(1)
        for _ in range(n):
            p = p / ctx.beta
            sums = [(d + (0,), s) for d, s in sums] + [(d + (1,), s + p) for d, s in sums]
    sums.sort(key=lambda t: t[0])
    return sums


def separation(n: int, ctx: BetaContext) -> mpfr:
    """Minimum distance between distinct level-n sums (all 2^n digit strings)."""
    with ctx.local():
        values = sorted(s for _, s in level_sums(n, ctx))
        return min(b - a for a, b in zip(values, values[1:]))
