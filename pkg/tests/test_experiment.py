import numpy as np
import pytest

from betaapprox.approx import PsiSpec
from betaapprox.experiment import contrast_summary, coverage_experiment, sample_points, summary_to_csv
from betaapprox.rng import stream, uniform_sample


def test_streams_are_keyed():
    a = stream(3, 7).random(5)
    assert np.array_equal(a, stream(3, 7).random(5))
    assert not np.array_equal(a, stream(3, 8).random(5))
    assert not np.array_equal(a, stream(4, 7).random(5))
    with pytest.raises(ValueError):
        stream(-1, 0)


def test_samples_schedule_independent(sqrt2):
    pts = sample_points(sqrt2, 50, 9)
    # any evaluation order gives the same point for index i
    assert [uniform_sample(9, i, float(sqrt2.c)) for i in reversed(range(50))] == pts[::-1]
    assert all(0 <= p < float(sqrt2.c) for p in pts)


def test_constant_psi_extremes(tribo):
    big = coverage_experiment(tribo, PsiSpec.constant(str(float(tribo.c) + 0.1)), (5, 9), 20, seed=1)
    assert big.hit_fraction == 1
    assert big.mean_hits_per_sample == 5
    zero = coverage_experiment(tribo, PsiSpec.constant(0), (5, 9), 20, seed=1)
    assert zero.hit_fraction == 0


def test_report_invariants(sqrt2):
    rep = coverage_experiment(sqrt2, PsiSpec.geometric(2), (20, 26), 40, seed=2)
    assert all(0 <= r <= 1 for _, r in rep.per_level_hit_rate)
    assert rep.mean_hits_per_sample <= 7
    assert rep.hit_fraction >= max(r for _, r in rep.per_level_hit_rate)
    again = coverage_experiment(sqrt2, PsiSpec.geometric(2), (20, 26), 40, seed=2)
    assert again == rep
    js = rep.to_json()
    assert js["seed"] == 2 and js["samples"] == 40
    assert rep.to_csv().splitlines()[0] == "n,hit_rate"


def test_summary_order(sqrt2, golden):
    psi = PsiSpec.geometric(2)
    a = coverage_experiment(sqrt2, psi, (20, 24), 30, seed=0, beta_label="sqrt2")
    b = coverage_experiment(golden, psi, (20, 24), 30, seed=0, beta_label="golden")
    rows = contrast_summary([b, a])
    assert rows[0]["beta_label"] == "sqrt2"
    one = contrast_summary([a])
    assert len(one) == 1 and one[0]["hit_fraction"] == a.hit_fraction
    tie = coverage_experiment(golden, PsiSpec.constant(0), (20, 21), 5, beta_label="b")
    tie2 = coverage_experiment(sqrt2, PsiSpec.constant(0), (20, 21), 5, beta_label="a")
    assert [r["beta_label"] for r in contrast_summary([tie, tie2])] == ["a", "b"]
    assert summary_to_csv(rows).splitlines()[0] == "beta_label,psi,n_range,hit_fraction,mean_hits_per_sample"
    with pytest.raises(ValueError):
        contrast_summary([])
