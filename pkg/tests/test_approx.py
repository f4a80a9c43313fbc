import math

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from betaapprox.approx import (CONVERGENT_LOOKING, DIVERGENT_LOOKING, ONE_SIDED, TWO_SIDED, PsiSpec,
                               construct_expansion, decay_constant, divergence_partial_sum, hit_depths,
                               level_report, levels_to_csv, psi_eval, scaling_constant)
from betaapprox.errors import BudgetExhaustedNoMilestone, ZeroPsiError
from betaapprox.expansion import is_prefix
from oracle import all_sums, brute_prefixes

GEO2 = PsiSpec.geometric(2)


def test_psi_examples():
    assert psi_eval(GEO2, 5) == mpfr(1) / 32
    assert abs(float(psi_eval(PsiSpec.corollary(), 2)) - 1 / (8 * math.log(2))) < 1e-15
    assert abs(float(psi_eval(PsiSpec.corollary(), 2)) - 0.1803369) < 1e-7
    assert abs(float(psi_eval(GEO2.cap("0.4142"), 3)) - 0.4142 / 8) < 1e-16
    k2 = gmpy2.sqrt(mpfr(2, 256)) - 1
    assert abs(float(psi_eval(GEO2.cap(k2), 3)) - 0.0517766) < 1e-7
    assert psi_eval(GEO2.scale(4), 3) == mpfr(1) / 32
    assert psi_eval(PsiSpec.scaled_geometric(3, 2), 2) == mpfr(3) / 4
    assert psi_eval(PsiSpec.constant("0.25"), 9) == mpfr("0.25")


def test_psi_validation_and_json():
    with pytest.raises(ValueError):
        PsiSpec.geometric(-1)
    psi = PsiSpec.scaled_geometric("0.5", 3).cap("0.4").scale(2)
    assert PsiSpec.from_json(psi.to_json()) == psi
    assert psi.label() == "SCALED_GEOMETRIC(0.5,3)|cap(0.4)|scale(2)"


def test_decay_constants():
    assert decay_constant(GEO2, 3) == 8
    for m in (1, 3, 5):
        assert decay_constant(PsiSpec.corollary().scale(7), m) == decay_constant(PsiSpec.corollary(), m)
    with pytest.raises(ZeroPsiError):
        decay_constant(PsiSpec.constant(0), 1)


def test_corollary_decay_scan():
    # oracle: direct ratio scan in floats, doubled
    def f(n):
        return 1 / (2 * math.log(2)) if n == 1 else 1 / (n * 2 ** n * math.log(n))
    worst = max(f(n) / f(n + 1) for n in range(1, 65))
    assert decay_constant(PsiSpec.corollary(), 1, 64) == 2 * math.ceil(worst)


@settings(max_examples=30, deadline=None)
@given(ratio=st.sampled_from(["1.5", "2", "3", "4"]), m=st.integers(1, 8))
def test_decay_inequality(ratio, m):
    psi = PsiSpec.geometric(ratio)
    c = decay_constant(psi, m, 40)
    with gmpy2.context(gmpy2.get_context(), precision=256):
        for n in range(1, 41):
            assert psi_eval(psi, n + m) >= psi_eval(psi, n) / c


def test_partial_sums():
    ps = divergence_partial_sum(GEO2, 40)
    assert ps.value == 40 and ps.classification == DIVERGENT_LOOKING
    ps = divergence_partial_sum(PsiSpec.geometric(4), 40)
    assert abs(ps.value - (1 - mpfr(2) ** -40)) < mpfr(2) ** -200
    assert ps.classification == CONVERGENT_LOOKING
    # 2^n Psi(n) = 1/(n ln n) for n >= 2; 2 Psi(1) = 1/ln 2
    direct = 1 / math.log(2) + 1 / (2 * math.log(2)) + 1 / (3 * math.log(3)) + 1 / (4 * math.log(4))
    assert abs(float(divergence_partial_sum(PsiSpec.corollary(), 4).value) - direct) < 1e-12
    assert divergence_partial_sum(PsiSpec.corollary(), 200).classification == DIVERGENT_LOOKING


def test_cap_partial_sum(sqrt2):
    k2 = sqrt2.certificate.k2
    ps = divergence_partial_sum(GEO2.cap(k2), 50)
    with sqrt2.local():
        assert abs(ps.value - 50 * k2) < mpfr(2) ** -150


def test_hits_exact_representation(sqrt2, tribo):
    for ctx in (sqrt2, tribo):
        with ctx.local():
            x = 1 / ctx.beta
        for engine in ("fast", "exact"):
            hits = hit_depths(x, PsiSpec.constant(0), (1, 25), ONE_SIDED, ctx, engine)
            assert [h.n for h in hits] == list(range(1, 26))
            assert hits[3].digits == (1, 0, 0, 0)


def test_no_hits_at_c(sqrt2):
    assert hit_depths(sqrt2.c, GEO2, (1, 40), ONE_SIDED, sqrt2) == []


def test_hits_match_brute(sqrt2):
    bits = sqrt2.precision_bits
    expected = []
    for n in range(1, 13):
        brute = brute_prefixes("0.7", n, sqrt2.beta, bits)
        if min(brute.values()) <= psi_eval(GEO2, n, bits):
            expected.append(n)
    for engine in ("fast", "exact"):
        got = [h.n for h in hit_depths("0.7", GEO2, (1, 12), ONE_SIDED, sqrt2, engine)]
        assert got == expected


def test_constant_psi_hits_everywhere(tribo):
    hits = hit_depths("0.5", PsiSpec.constant(str(float(tribo.c) + 0.01)), (1, 30), ONE_SIDED, tribo)
    assert len(hits) == 30


def test_two_sided_engines_agree(tribo):
    psi = PsiSpec.corollary()
    fast = level_report("0.4", psi, (5, 16), TWO_SIDED, tribo, "fast")
    exact = level_report("0.4", psi, (5, 16), TWO_SIDED, tribo, "exact")
    for a, b in zip(fast, exact):
        with tribo.local():
            assert abs(a.gap - b.gap) < mpfr(2) ** -200
        assert a.hit == b.hit and a.side == b.side


def test_two_sided_above_is_brute_nearest(tribo):
    bits = tribo.precision_bits
    for n in (8, 11):
        rec = level_report("0.4", PsiSpec.constant(0), (n, n), TWO_SIDED, tribo, "exact")[0]
        with tribo.local():
            x = mpfr("0.4")
            best = min(abs(s - x) for _, s in all_sums(tribo.beta, n, bits))
            assert abs(rec.gap - best) < mpfr(2) ** -200


def test_one_sided_records_are_prefixes(sqrt2):
    for r in level_report("1.1", GEO2, (20, 30), ONE_SIDED, sqrt2):
        check = is_prefix("1.1", r.digits, sqrt2)
        assert check.is_prefix
        if r.hit:
            assert r.gap <= r.psi_n
    csv_text = levels_to_csv(level_report("1.1", GEO2, (20, 22), ONE_SIDED, sqrt2))
    assert csv_text.splitlines()[0] == "n,gap,psi_n,hit"


def test_scaling_constant_inequality(sqrt2):
    psi = PsiSpec.corollary()
    for depth in (3, 10, 25):
        c = scaling_constant(psi, depth, 60 - depth, sqrt2)
        with sqrt2.local():
            lift = sqrt2.beta ** depth
            for n in range(1, 61 - depth):
                assert psi_eval(psi, n) / (c * lift) <= psi_eval(psi, n + depth) * (1 + mpfr(2) ** -240)


def test_construct_exact_point(sqrt2):
    with sqrt2.local():
        x = 1 / sqrt2.beta
    res = construct_expansion(x, GEO2, 20, 3, sqrt2)
    assert res.digits == (1,) + (0,) * 19
    assert all(g == 0 for _, g in res.milestones)
    assert len(res.milestones) == 3 and not res.exhausted


def test_construct_fails_at_c(sqrt2):
    with pytest.raises(BudgetExhaustedNoMilestone):
        construct_expansion(sqrt2.c, GEO2, 30, 2, sqrt2)


def test_construct_example(sqrt2):
    res = construct_expansion("0.7", GEO2, 60, 3, sqrt2)
    assert len(res.milestones) >= 3
    assert len(res.digits) == 60
    for m, g in res.milestones:
        assert is_prefix("0.7", res.digits[:m], sqrt2).is_prefix
        assert 0 <= g <= mpfr(2) ** -m
    assert is_prefix("0.7", res.digits, sqrt2).is_prefix
    depths = [m for m, _ in res.milestones]
    assert depths == sorted(set(depths))
