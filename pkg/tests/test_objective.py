import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscore.objective import (
    DifferentialDistribution,
    WinProbabilities,
    average_over_opponents,
    each_category_gradient,
    each_category_value,
    most_categories_gradient,
    most_categories_value,
    most_categories_value_batch,
    most_categories_value_with_stats,
    pdf_at_zero,
    tipping_point,
    tipping_points,
    tipping_points_batch,
    win_probabilities,
)


def enumerate_mc_value(w):
    """Naive oracle: all 2^C scenarios, majority wins, even splits count half."""
    n = len(w)
    total = 0.0
    for outcome in itertools.product([0, 1], repeat=n):
        prob = math.prod(w[c] if outcome[c] else 1 - w[c] for c in range(n))
        wins = sum(outcome)
        if wins * 2 > n:
            total += prob
        elif wins * 2 == n:
            total += 0.5 * prob
    return total


def enumerate_tipping(w, c1):
    """Oracle over the other categories: exact decisive-split probability mass."""
    n = len(w)
    others = [c for c in range(n) if c != c1]
    targets = {(n - 1) // 2} if n % 2 == 1 else {n // 2 - 1, n // 2}
    total = 0.0
    for outcome in itertools.product([0, 1], repeat=len(others)):
        if sum(outcome) not in targets:
            continue
        total += math.prod(
            w[c] if win else 1 - w[c] for c, win in zip(others, outcome)
        )
    return total


class TestWinProbabilities:
    def test_zero_mean_is_half(self):
        dist = DifferentialDistribution(np.zeros(9), np.full(9, 4.0))
        assert np.allclose(win_probabilities(dist).w, 0.5)

    def test_one_sigma_matches_normal_cdf(self):
        dist = DifferentialDistribution(np.array([2.0]), np.array([4.0]))
        got = win_probabilities(dist).w[0]
        assert got == pytest.approx(0.8413447460685429, abs=1e-9)

    def test_monotone_in_mean(self):
        means = np.linspace(-5, 5, 21)
        w = [
            win_probabilities(DifferentialDistribution(np.array([m]), np.array([1.0]))).w[0]
            for m in means
        ]
        assert all(w[i] < w[i + 1] for i in range(len(w) - 1))
        assert all(0.0 < x < 1.0 for x in w)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            DifferentialDistribution(np.zeros(2), np.array([1.0, 0.0]))


class TestEachCategory:
    def test_half_everywhere(self):
        assert each_category_value(np.full(9, 0.5)) == pytest.approx(4.5)

    def test_all_won(self):
        assert each_category_value(np.ones(9)) == pytest.approx(9.0)

    def test_component_sum(self, rng):
        w = rng.uniform(size=9)
        assert each_category_value(w) == pytest.approx(w.sum())

    def test_gradient_zero_jacobian(self, rng):
        dist = DifferentialDistribution(rng.normal(size=9), rng.uniform(1, 4, size=9))
        assert np.allclose(each_category_gradient(dist, np.zeros((9, 7))), 0.0)

    def test_gradient_matches_finite_differences(self, rng):
        h = 1e-6
        worst = 0.0
        for _ in range(100):
            mean = rng.normal(scale=2.0, size=9)
            var = rng.uniform(0.5, 6.0, size=9)
            d_mean = rng.normal(size=(9, 7))
            dist = DifferentialDistribution(mean, var)
            grad = each_category_gradient(dist, d_mean)
            fd = np.zeros(7)
            for p in range(7):
                up = DifferentialDistribution(mean + h * d_mean[:, p], var)
                down = DifferentialDistribution(mean - h * d_mean[:, p], var)
                fd[p] = (
                    each_category_value(win_probabilities(up).w)
                    - each_category_value(win_probabilities(down).w)
                ) / (2 * h)
            err = np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12)
            worst = max(worst, err)
        assert worst <= 1e-5

    def test_far_category_contributes_nothing(self):
        mean = np.array([50.0, 0.0])
        dist = DifferentialDistribution(mean, np.ones(2))
        coeffs = pdf_at_zero(dist)
        assert coeffs[0] == pytest.approx(0.0, abs=1e-300)
        assert coeffs[1] > 0.1


class TestMostCategoriesValue:
    def test_fair_coins_give_half(self):
        value, _ = most_categories_value_with_stats(np.full(9, 0.5))
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_single_category(self):
        assert most_categories_value(np.array([0.3])) == pytest.approx(0.3)

    def test_matches_enumeration_and_spends_634_products(self, rng):
        for _ in range(100):
            w = rng.uniform(0.01, 0.99, size=9)
            value, mults = most_categories_value_with_stats(w)
            assert value == pytest.approx(enumerate_mc_value(w), abs=1e-12)
            assert mults == 634

    @given(st.integers(1, 10), st.data())
    @settings(max_examples=60, deadline=None)
    def test_tree_equals_enumeration_all_sizes(self, n, data):
        w = np.array(
            [data.draw(st.floats(0.01, 0.99, allow_nan=False)) for _ in range(n)]
        )
        assert most_categories_value(w) == pytest.approx(enumerate_mc_value(w), abs=1e-12)

    def test_even_category_count_handles_ties(self, rng):
        for _ in range(25):
            w = rng.uniform(0.05, 0.95, size=8)
            assert most_categories_value(w) == pytest.approx(enumerate_mc_value(w), abs=1e-12)

    def test_complementarity_odd(self, rng):
        for _ in range(25):
            w = rng.uniform(0.01, 0.99, size=9)
            assert most_categories_value(w) + most_categories_value(1 - w) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_monotone_in_each_component(self, rng):
        w = rng.uniform(0.2, 0.8, size=9)
        base = most_categories_value(w)
        for c in range(9):
            up = w.copy()
            up[c] = min(0.99, up[c] + 0.05)
            assert most_categories_value(up) >= base - 1e-12

    def test_batch_matches_single(self, rng):
        w = rng.uniform(0.01, 0.99, size=(40, 9))
        batch = most_categories_value_batch(w)
        singles = np.array([most_categories_value(row) for row in w])
        assert np.allclose(batch, singles, atol=1e-12)


class TestTippingPoint:
    def test_uniform_half_is_seventy_over_256(self):
        w = np.full(9, 0.5)
        expected = math.comb(8, 4) / 2**8
        for c in range(9):
            assert tipping_point(w, c) == pytest.approx(expected, abs=1e-12)
            assert tipping_point(w, c) == pytest.approx(70 / 256, abs=1e-12)

    def test_five_certain_wins_kill_tipping(self):
        w = np.array([1.0] * 5 + [0.4, 0.4, 0.4, 0.4])
        assert tipping_point(w, 8) == pytest.approx(0.0, abs=1e-12)

    def test_matches_enumeration(self, rng):
        for _ in range(40):
            w = rng.uniform(0.01, 0.99, size=9)
            c = int(rng.integers(9))
            assert tipping_point(w, c) == pytest.approx(enumerate_tipping(w, c), abs=1e-12)

    def test_even_case_matches_enumeration(self, rng):
        for _ in range(25):
            w = rng.uniform(0.05, 0.95, size=8)
            c = int(rng.integers(8))
            assert tipping_point(w, c) == pytest.approx(enumerate_tipping(w, c), abs=1e-12)

    def test_single_category_tipping_is_one(self):
        assert tipping_point(np.array([0.7]), 0) == pytest.approx(1.0)

    def test_batch_matches_single(self, rng):
        w = rng.uniform(0.01, 0.99, size=(30, 9))
        batch = tipping_points_batch(w)
        for i, row in enumerate(w):
            assert np.allclose(batch[i], tipping_points(row), atol=1e-12)


class TestMostCategoriesGradient:
    def test_zero_tipping_zero_gradient(self):
        mean = np.array([10.0] * 5 + [0.0] * 4)  # five near-certain wins
        dist = DifferentialDistribution(mean, np.full(9, 0.01))
        grad = most_categories_gradient(dist, np.eye(9))
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_matches_finite_differences(self, rng):
        h = 1e-6
        worst = 0.0
        for _ in range(100):
            mean = rng.normal(scale=1.5, size=9)
            var = rng.uniform(0.5, 6.0, size=9)
            d_mean = rng.normal(size=(9, 6))
            dist = DifferentialDistribution(mean, var)
            grad = most_categories_gradient(dist, d_mean)
            fd = np.zeros(6)
            for p in range(6):
                up = DifferentialDistribution(mean + h * d_mean[:, p], var)
                down = DifferentialDistribution(mean - h * d_mean[:, p], var)
                fd[p] = (
                    most_categories_value(win_probabilities(up).w)
                    - most_categories_value(win_probabilities(down).w)
                ) / (2 * h)
            err = np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12)
            worst = max(worst, err)
        assert worst <= 1e-4

    def test_even_count_matches_finite_differences(self, rng):
        h = 1e-6
        mean = rng.normal(scale=1.0, size=8)
        var = rng.uniform(0.5, 4.0, size=8)
        dist = DifferentialDistribution(mean, var)
        grad = most_categories_gradient(dist, np.eye(8))
        for c in range(8):
            up = DifferentialDistribution(mean + h * np.eye(8)[c], var)
            down = DifferentialDistribution(mean - h * np.eye(8)[c], var)
            fd = (
                most_categories_value(win_probabilities(up).w)
                - most_categories_value(win_probabilities(down).w)
            ) / (2 * h)
            assert grad[c] == pytest.approx(fd, rel=1e-4, abs=1e-10)

    def test_uniform_point_equals_each_category_times_seventy_over_256(self):
        dist = DifferentialDistribution(np.zeros(9), np.full(9, 2.0))
        ec = each_category_gradient(dist, np.eye(9))
        mc = most_categories_gradient(dist, np.eye(9))
        assert np.allclose(mc, ec * (70 / 256), atol=1e-14)


class TestAverageOverOpponents:
    def test_single_opponent_identity(self):
        value, grad = average_over_opponents([0.7], [np.array([1.0, 2.0])])
        assert value == pytest.approx(0.7)
        assert np.allclose(grad, [1.0, 2.0])

    def test_identical_opponents_same_as_one(self):
        g = np.array([0.5, -0.5])
        value, grad = average_over_opponents([0.6, 0.6, 0.6], [g, g, g])
        assert value == pytest.approx(0.6)
        assert np.allclose(grad, g)

    def test_two_opponents_midpoint(self):
        value, grad = average_over_opponents(
            [0.2, 0.8], [np.array([0.0, 2.0]), np.array([4.0, 0.0])]
        )
        assert value == pytest.approx(0.5)
        assert np.allclose(grad, [2.0, 1.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            average_over_opponents([], [])


def test_win_probabilities_type_roundtrip():
    w = WinProbabilities(np.full(3, 0.25))
    assert each_category_value(w) == pytest.approx(0.75)
    assert most_categories_value(w) == pytest.approx(enumerate_mc_value(w.w), abs=1e-12)
