"""Exact binomial tail evaluation and the error-count bound behind calibration.

Calibrating a prediction-set threshold on n examples reduces to finding the
largest number of calibration errors whose Binomial(n, epsilon) CDF stays
within the confidence budget delta.  Every calibrator in this package funnels
through the two functions here, so the CDF is evaluated exactly (term
summation in log space) rather than through a normal or Poisson
approximation, and stays stable for n up to ~10^6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

__all__ = ["RiskBudget", "binom_cdf", "max_failures"]


@dataclass(frozen=True)
class RiskBudget:
    """An (epsilon, delta) pair: error-rate bound and confidence-failure bound."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


def binom_cdf(k: int, n: int, p: float) -> float:
    """Binomial(n, p) CDF at k: sum of C(n, i) p^i (1-p)^(n-i) over i <= k.

    Terms are accumulated in log space so binomial coefficients never
    overflow and small tail values keep full precision.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, n], got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if k == n:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0  # k < n here
    i = np.arange(k + 1)
    log_terms = (
        gammaln(n + 1)
        - gammaln(i + 1)
        - gammaln(n - i + 1)
        + i * np.log(p)
        + (n - i) * np.log1p(-p)
    )
    return float(min(1.0, np.exp(logsumexp(log_terms))))


def max_failures(n: int, budget: RiskBudget) -> int | None:
    """Largest k with binom_cdf(k, n, epsilon) <= delta, or None if k=0 fails.

    The CDF is nondecreasing in k and equals 1 at k = n, so the answer is
    always < n when it exists; binary search keeps large-n calibration cheap.
    The comparison against delta is an exact <= on the computed value:
    tolerance slack here would silently weaken every downstream guarantee.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if binom_cdf(0, n, budget.epsilon) > budget.delta:
        return None
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if binom_cdf(mid, n, budget.epsilon) <= budget.delta:
            lo = mid
        else:
            hi = mid - 1
    return lo
