import pytest
from gmpy2 import mpfr

from betaapprox.errors import BudgetExceeded
from betaapprox.expansion import BetaContext, count_prefixes, is_prefix, min_gap
from betaapprox.levelsearch import LevelSearch, dd_add, dd_from_mpfr, dd_mul, level_gaps
from oracle import all_sums, random_points


def test_double_double_product():
    ctx = BetaContext.from_polynomial("x^2-2")
    hi, lo = dd_from_mpfr(ctx.beta)
    phi, plo = dd_mul(hi, lo, hi, lo)
    with ctx.local():
        assert abs(mpfr(phi) + mpfr(plo) - 2) < mpfr(2) ** -100
    shi, slo = dd_add(hi, lo, -hi, -lo)
    assert shi == 0 and slo == 0


@pytest.mark.parametrize("source", ["x^2-2", "x^2-x-1", "x^3-2x-2"])
@pytest.mark.parametrize("table_depth", [4, 20])
def test_matches_scalar_min_gap(source, table_depth):
    ctx = BetaContext.from_polynomial(source)
    for x in random_points(ctx.c, 8, seed=1):
        search = LevelSearch(x, ctx, table_depth=table_depth)
        for n in range(1, 15):
            lg = search.level(n)
            exact = min_gap(x, n, ctx)
            with ctx.local():
                assert abs(lg.below_gap - exact.gap) < mpfr(2) ** -200
            assert is_prefix(x, lg.below_digits, ctx).is_prefix


def test_two_sided_above_matches_brute(tribo):
    bits = tribo.precision_bits
    for n in (6, 10):
        sums = all_sums(tribo.beta, n, bits)
        for x in random_points(tribo.c, 6, seed=2):
            lg = LevelSearch(x, tribo, two_sided=True).level(n)
            with tribo.local():
                xv = mpfr(x)
                above = [s - xv for _, s in sums if s >= xv]
                assert abs(lg.above_gap - min(above)) < mpfr(2) ** -200


def test_counts_match(sqrt2):
    search = LevelSearch("0.7", sqrt2)
    for n in (5, 12, 18):
        assert search.count(n) == count_prefixes("0.7", n, sqrt2)


def test_deep_levels_use_table(sqrt2):
    gaps = level_gaps("0.7", 30, 34, sqrt2)
    for lg in gaps:
        check = is_prefix("0.7", lg.below_digits, sqrt2)
        assert check.is_prefix
        with sqrt2.local():
            assert abs(check.gap - lg.below_gap) < mpfr(2) ** -200


def test_budget(sqrt2):
    with pytest.raises(BudgetExceeded):
        LevelSearch("0.7", sqrt2, budget=50, table_depth=4).level(30)
