"""Prevalence statistics for inconsistency rates.

Sample sizing via the Cochran formula, normal-approximation (Wald) confidence
intervals with an optional Wilson variant, corpus-scale extrapolation, and
per-category rate tables. All pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import EstimationError


@dataclass(frozen=True)
class SampleEstimate:
    """Point estimate and confidence interval for a proportion."""

    successes: int
    n: int
    confidence: float
    p_hat: float
    margin: float
    interval: tuple[float, float]
    z: float
    method: str = "wald"
    degenerate: bool = False

    def to_record(self) -> dict:
        return {
            "successes": self.successes,
            "n": self.n,
            "confidence": self.confidence,
            "p_hat": self.p_hat,
            "margin": self.margin,
            "interval": list(self.interval),
            "z": self.z,
            "method": self.method,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class CategoryRate:
    confirmed: int
    total: int

    @property
    def rate(self) -> float:
        return self.confirmed / self.total


# Acklam's rational approximation to the inverse normal CDF (~1.15e-9 relative
# error), polished below with Newton steps against erfc for ~1e-15.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def inverse_normal_cdf(p: float) -> float:
    """Quantile of the standard normal distribution, accurate to ~1e-15."""
    if not 0.0 < p < 1.0:
        raise EstimationError(f"quantile argument must be in (0, 1), got {p}")
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1))
    else:
        q = math.sqrt(-2 * math.log(1 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    for _ in range(2):
        err = _norm_cdf(x) - p
        x -= err / _norm_pdf(x)
    return x


def z_for_confidence(confidence: float) -> float:
    """Two-sided z quantile for a confidence level, e.g. 0.99 -> 2.5758..."""
    if not 0.0 < confidence < 1.0:
        raise EstimationError(f"confidence must be in (0, 1), got {confidence}")
    return inverse_normal_cdf(1.0 - (1.0 - confidence) / 2.0)


def cochran_sample_size(z: float, p: float, margin: float) -> int:
    """Minimum sample size n = ceil(z^2 * p(1-p) / margin^2) for a proportion."""
    if margin <= 0:
        raise EstimationError(f"margin must be positive, got {margin}")
    if z <= 0:
        raise EstimationError(f"z must be positive, got {z}")
    if not 0.0 <= p <= 1.0:
        raise EstimationError(f"p must be in [0, 1], got {p}")
    return math.ceil(z * z * p * (1.0 - p) / (margin * margin))


def proportion_ci(
    successes: int,
    n: int,
    confidence: float,
    method: str = "wald",
) -> SampleEstimate:
    """Confidence interval for successes/n.

    The default Wald interval uses margin = z * sqrt(p(1-p)/n), clipped to
    [0, 1]. A zero-width margin at p_hat in {0, 1} is flagged degenerate;
    method="wilson" is available for small-count robustness.
    """
    if n < 1:
        raise EstimationError(f"n must be >= 1, got {n}")
    if not 0 <= successes <= n:
        raise EstimationError(f"successes must be in [0, n], got {successes}/{n}")
    z = z_for_confidence(confidence)
    p_hat = successes / n
    if method == "wald":
        margin = z * math.sqrt(p_hat * (1.0 - p_hat) / n)
        lo = max(0.0, p_hat - margin)
        hi = min(1.0, p_hat + margin)
        degenerate = margin == 0.0
    elif method == "wilson":
        denom = 1.0 + z * z / n
        center = (p_hat + z * z / (2 * n)) / denom
        margin = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4 * n * n))
        lo = max(0.0, center - margin)
        hi = min(1.0, center + margin)
        degenerate = False
    else:
        raise EstimationError(f"unknown interval method {method!r}")
    return SampleEstimate(
        successes=successes,
        n=n,
        confidence=confidence,
        p_hat=p_hat,
        margin=margin,
        interval=(lo, hi),
        z=z,
        method=method,
        degenerate=degenerate,
    )


def extrapolate(interval: tuple[float, float], total_facts: int) -> tuple[int, int]:
    """Scale a rate interval to absolute counts over a corpus of total_facts."""
    lo, hi = interval
    if not 0.0 <= lo <= hi <= 1.0:
        raise EstimationError(f"interval must satisfy 0 <= lo <= hi <= 1, got {interval}")
    if total_facts < 1:
        raise EstimationError(f"total_facts must be positive, got {total_facts}")
    return round(lo * total_facts), round(hi * total_facts)


def per_category_rates(
    sampled: Iterable[tuple[str, bool]],
) -> dict[str, CategoryRate]:
    """Confirmed-rate per category, with counts so small cells stay readable."""
    confirmed: dict[str, int] = {}
    totals: dict[str, int] = {}
    empty = True
    for category, was_confirmed in sampled:
        empty = False
        if not category:
            raise EstimationError("empty category label in sample")
        totals[category] = totals.get(category, 0) + 1
        if was_confirmed:
            confirmed[category] = confirmed.get(category, 0) + 1
    if empty:
        raise EstimationError("cannot compute rates over an empty sample")
    return {
        category: CategoryRate(confirmed=confirmed.get(category, 0), total=totals[category])
        for category in sorted(totals)
    }


# External full-scale reference rates, for context in reports only; never
# asserted by tests.
REFERENCE_CATEGORY_RATES: Mapping[str, float] = {
    "History": 0.177,
    "Everyday Life": 0.169,
    "Society & Social Sciences": 0.143,
    "Technology": 0.094,
    "Mathematics": 0.056,
}
