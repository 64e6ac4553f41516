import numpy as np
import pytest
from hypothesis import given, strategies as st

from coordperc.montecarlo import (
    Estimate,
    batch_rng,
    coupled_survival,
    count_many,
    estimate,
    non_oriented_estimate,
    required_trials,
    survival_curve,
    wilson,
)


def always(rng):
    return True


def coin(rng):
    return bool(rng.random() < 0.5)


def pair(rng):
    u = rng.random()
    return (u < 0.3, u < 0.6)


def test_wilson_reference_values():
    # 5/10 at z = 1.96: 0.5 +- 1.96 sqrt(0.025 + 0.000960) / 1.38416
    lo, hi = wilson(5, 10)
    assert lo == pytest.approx(0.236593, abs=1e-6)
    assert hi == pytest.approx(0.763407, abs=1e-6)
    assert wilson(0, 10)[0] == 0.0 and wilson(10, 10)[1] == pytest.approx(1.0)


@given(st.integers(1, 5000), st.data())
def test_wilson_contains_point(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson(k, n)
    assert 0 <= lo <= k / n <= hi <= 1 + 1e-12


def test_wilson_rejects_bad_counts():
    with pytest.raises(ValueError):
        wilson(3, 2)
    with pytest.raises(ValueError):
        wilson(0, 0)


def test_always_true():
    e = estimate(always, 100, 0)
    assert e.point == 1.0 and e.ci_high == pytest.approx(1.0)


def test_fair_coin_concentrates():
    inside = sum(0.47 <= estimate(coin, 10**4, s).point <= 0.53 for s in range(100))
    assert inside >= 99


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_invariance(workers):
    assert estimate(coin, 3000, 9, workers=1) == estimate(coin, 3000, 9, workers=workers)
    a = count_many(pair, 2, 1000, 4, workers=1)
    assert np.array_equal(a, count_many(pair, 2, 1000, 4, workers=workers))


def test_batches_use_independent_streams():
    a, b = batch_rng(1, 0).random(4), batch_rng(1, 1).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, batch_rng(1, 0).random(4))


def test_partial_last_batch():
    assert estimate(always, 257, 0).trials == 257


def test_verdicts():
    e = Estimate.from_counts(95, 100, 0)
    assert e.verdict(0.5) is True and e.verdict(0.99) is False and e.verdict(0.95) is None
    assert e.verdict(0.95, force_point=True) is True


def test_required_trials_grows_near_one():
    assert required_trials(0.9) < required_trials(0.99) < required_trials(0.999)


def test_disjoint_alphabets_always_survive():
    rows = survival_curve(8, [5, 20], 200, 0, x_symbols=[1, 3, 5, 7], y_symbols=[2, 4, 6, 8])
    assert all(e.point == 1.0 for _, e in rows)


def test_depth_one_is_origin_open():
    (_, e), = survival_curve(5, [1], 20000, 3)
    assert e.ci_low <= 0.8 <= e.ci_high


def test_survival_curve_monotone():
    rows = survival_curve(3, [5, 10, 20, 40], 2000, 1)
    points = [e.point for _, e in rows]
    assert points == sorted(points, reverse=True)


def test_coupled_survival_monotone_in_M():
    rows = coupled_survival([4, 8, 16], 30, 1000, 2)
    points = [e.point for _, e in rows]
    assert points == sorted(points)


def test_non_oriented_trivial_large_alphabet():
    e = non_oriented_estimate(10**6, 20, 200, 0)
    assert e.point > 0.99
