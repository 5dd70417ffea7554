"""Generic one-dimensional threshold calibration from true-label scores.

A score function maps (example, label) to a nonnegative real, and the
prediction set at threshold tau keeps every label scoring >= tau.  Given the
true-label scores of a held-out calibration set, the calibrated tau is simply
an order statistic of the sorted scores: the error count is a step function
of tau whose breakpoints are the observed scores, so no numeric search is
needed and the result is exact.

A label that was never scored is represented by the score 0.0; it errs for
any tau > 0 and is covered only by the trivial all-inclusive set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .binomial import RiskBudget, max_failures

__all__ = ["Threshold", "calibrate_threshold", "empirical_error"]


@dataclass(frozen=True)
class Threshold:
    """A calibrated score threshold plus the budget and sample that produced it.

    ``max_failures`` is None when even zero calibration errors would exceed
    the confidence budget; ``tau`` is then 0.0 (the trivial all-inclusive
    set).  Callers must not treat tau == 0 as success silently: check
    ``infeasible`` and surface it.
    """

    tau: float
    budget: RiskBudget
    n_calibration: int
    max_failures: int | None

    @property
    def infeasible(self) -> bool:
        return self.max_failures is None


def _tau_value(tau: "Threshold | float") -> float:
    if isinstance(tau, Threshold):
        return tau.tau
    return float(tau)


def _validated_scores(scores: Iterable[float]) -> list[float]:
    values = [float(s) for s in scores]
    if not values:
        raise ValueError("at least one calibration score is required")
    for s in values:
        if not (s >= 0.0 and math.isfinite(s)):
            raise ValueError(f"scores must be finite and nonnegative, got {s}")
    return values


def calibrate_threshold(scores: Iterable[float], budget: RiskBudget) -> Threshold:
    """Largest tau whose calibration error count stays within the binomial bound.

    With k = max_failures(n, budget), the answer is the (k+1)-th smallest
    score: strictly fewer than k+1 scores fall below it, and any larger tau
    drawn from the observed scores errs on at least k+1 examples.  A score
    equal to tau is inside the set (membership uses >=).  Returns the trivial
    tau = 0 when no error count is affordable.
    """
    values = _validated_scores(scores)
    n = len(values)
    k = max_failures(n, budget)
    if k is None:
        return Threshold(0.0, budget, n, None)
    values.sort()
    return Threshold(values[k], budget, n, k)


def empirical_error(tau: Threshold | float, scores: Iterable[float]) -> float:
    """Fraction of scores strictly below tau (the rate the set misses them)."""
    values = _validated_scores(scores)
    t = _tau_value(tau)
    return sum(1 for s in values if s < t) / len(values)
