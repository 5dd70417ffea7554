"""Threshold calibration against a brute-force breakpoint oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacset import RiskBudget, Threshold, calibrate_threshold, empirical_error, max_failures

# n=4 with this budget affords exactly one calibration error:
# F(1; 4, 0.5) = 5/16 <= 0.5 < F(2; 4, 0.5) = 11/16.
ONE_ERROR_BUDGET = RiskBudget(0.5, 0.5)


def brute_force_tau(scores: list[float], k: int) -> float:
    """Largest breakpoint (0 or an observed score) with error count <= k."""
    candidates = sorted(set(scores) | {0.0})
    feasible = [c for c in candidates if sum(s < c for s in scores) <= k]
    return max(feasible)


class TestCalibrateThreshold:
    def test_order_statistic_example(self):
        th = calibrate_threshold([0.1, 0.3, 0.5, 0.9], ONE_ERROR_BUDGET)
        assert th.max_failures == 1
        assert th.tau == 0.3
        # the score equal to tau is still inside the set
        assert empirical_error(th, [0.1, 0.3, 0.5, 0.9]) == 0.25

    def test_infeasible_budget_returns_trivial(self):
        th = calibrate_threshold([0.7], RiskBudget(0.1, 0.01))
        assert th.tau == 0.0
        assert th.max_failures is None
        assert th.infeasible

    def test_all_equal_scores(self):
        th = calibrate_threshold([0.4, 0.4, 0.4, 0.4], ONE_ERROR_BUDGET)
        assert th.tau == 0.4

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            calibrate_threshold([], ONE_ERROR_BUDGET)

    def test_negative_scores_rejected(self):
        with pytest.raises(ValueError):
            calibrate_threshold([0.2, -0.1], ONE_ERROR_BUDGET)

    def test_input_not_mutated(self):
        scores = [0.9, 0.1, 0.5]
        calibrate_threshold(scores, ONE_ERROR_BUDGET)
        assert scores == [0.9, 0.1, 0.5]

    def test_matches_brute_force_on_random_lists(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 201))
            scores = list(np.round(rng.uniform(0, 1, size=n), 2))
            eps = float(rng.uniform(0.05, 0.6))
            delta = float(rng.uniform(0.05, 0.6))
            budget = RiskBudget(eps, delta)
            th = calibrate_threshold(scores, budget)
            k = max_failures(n, budget)
            if k is None:
                assert th.tau == 0.0
                continue
            assert th.tau == brute_force_tau(scores, k)
            assert sum(s < th.tau for s in scores) <= k


class TestEmpiricalError:
    def test_trivial_set_never_errs(self):
        assert empirical_error(0.0, [0.0, 0.2, 0.9]) == 0.0

    def test_direct_count(self):
        assert empirical_error(0.3, [0.1, 0.3, 0.5, 0.9]) == 0.25

    def test_empty_set_always_errs(self):
        assert empirical_error(math.inf, [0.1, 0.3]) == 1.0

    def test_accepts_threshold_object(self):
        th = Threshold(0.3, ONE_ERROR_BUDGET, 4, 1)
        assert empirical_error(th, [0.1, 0.3]) == 0.5

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            empirical_error(0.5, [])

    @given(
        scores=st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=50),
        taus=st.tuples(
            st.floats(min_value=0, max_value=1.2, allow_nan=False),
            st.floats(min_value=0, max_value=1.2, allow_nan=False),
        ),
    )
    @settings(max_examples=200, deadline=None)
    def test_nondecreasing_in_tau(self, scores, taus):
        lo, hi = sorted(taus)
        assert empirical_error(lo, scores) <= empirical_error(hi, scores)


@given(
    scores=st.lists(
        st.floats(min_value=0, max_value=10, allow_nan=False), min_size=2, max_size=120
    ),
    eps=st.floats(min_value=0.02, max_value=0.8),
    delta=st.floats(min_value=0.02, max_value=0.8),
)
@settings(max_examples=150, deadline=None)
def test_calibrated_error_within_allowance(scores, eps, delta):
    budget = RiskBudget(eps, delta)
    th = calibrate_threshold(scores, budget)
    if th.max_failures is None:
        assert th.tau == 0.0
        return
    assert empirical_error(th, scores) <= th.max_failures / len(scores)
