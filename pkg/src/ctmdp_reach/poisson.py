"""Truncated Poisson weights for uniformised transient analysis.

The number of jumps a rate-lambda uniform model performs within time T is
Poisson distributed with parameter lambda*T.  The solver truncates that
distribution at a depth N chosen so the discarded tail mass stays below
the allotted error, and weights each step count i < N by the pmf value
psi(i).

Numerics: weights are anchored at the distribution mode via a log-space
pmf evaluation and extended outward with the multiplicative recurrence
psi(i+1) = psi(i) * rt/(i+1).  Away from the mode the terms shrink
monotonically, so the recurrence never overflows and far-tail underflow
flushes harmlessly to zero.  Everything stays in 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["PoissonTruncation", "truncation_depth", "poisson_weights"]


@dataclass(frozen=True, eq=False)
class PoissonTruncation:
    """Poisson pmf values psi(0..depth-1) for parameter rate_time."""

    rate_time: float
    depth: int
    weights: np.ndarray
    tail_mass: float

    def suffix_sums(self) -> np.ndarray:
        """suffix[k] = sum of weights[k..depth-1], accumulated back to front."""
        return np.cumsum(self.weights[::-1])[::-1].copy()


def truncation_depth(rate_time: float, delta: float) -> int:
    """Step horizon beyond which the Poisson(rate_time) tail mass is < delta.

    Computed as ceil(rate_time * e^2 - ln(delta)), never less than 1.
    """
    if not (rate_time > 0 and math.isfinite(rate_time)):
        raise ValueError(f"rate_time must be positive and finite, got {rate_time}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    return max(1, math.ceil(rate_time * math.e**2 - math.log(delta)))


def _stirling_correction(n: int) -> float:
    """ln(n!) minus Stirling's approximation, for n >= 1."""
    if n <= 15:
        return math.lgamma(n + 1) - (
            n * math.log(n) - n + 0.5 * math.log(2.0 * math.pi * n)
        )
    # asymptotic series; error well below 1 ulp for n > 15
    r = 1.0 / n
    rr = r * r
    return r / 12.0 - r * rr / 360.0 + r * rr * rr / 1260.0 - r * rr**3 / 1680.0


def _deviance(x: float, mean: float) -> float:
    """x*ln(x/mean) + mean - x, evaluated without cancellation near x=mean."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2.0 * x * v
        vv = v * v
        j = 1
        while True:
            ej *= vv
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mean) + mean - x


def _pmf(rate_time: float, i: int) -> float:
    """Poisson pmf by saddle-point expansion; ~1 ulp at the mode."""
    if i == 0:
        return math.exp(-rate_time)
    exponent = -_stirling_correction(i) - _deviance(float(i), rate_time)
    if exponent < -745.0:  # exp underflows
        return 0.0
    return math.exp(exponent) / math.sqrt(2.0 * math.pi * i)


def poisson_weights(rate_time: float, depth: int) -> PoissonTruncation:
    """Poisson pmf values for i = 0..depth-1, computed without over/underflow.

    Anchored at the in-window mode and extended by the multiplicative
    recurrence; far-tail underflow flushes to zero harmlessly.  Raises
    ValueError when every weight in the window underflows, which happens
    only if rate_time is so large that the whole window sits deep in the
    left tail (the solver's rate cap is meant to stop earlier).
    """
    if not (rate_time > 0 and math.isfinite(rate_time)):
        raise ValueError(f"rate_time must be positive and finite, got {rate_time}")
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")

    weights = np.zeros(depth, dtype=np.float64)
    mode = min(int(rate_time), depth - 1)  # in-window pmf maximum
    weights[mode] = _pmf(rate_time, mode)
    for i in range(mode + 1, depth):
        weights[i] = weights[i - 1] * (rate_time / i)
    for i in range(mode - 1, -1, -1):
        weights[i] = weights[i + 1] * ((i + 1) / rate_time)

    total = math.fsum(weights)
    if total <= 0.0:
        raise ValueError(
            f"all Poisson weights underflow for rate_time={rate_time} at depth={depth}; "
            "the uniformisation rate is too large for 64-bit floats"
        )
    if total > 1.0:  # rounding pushed the truncated mass past 1; rescale
        weights /= total
        total = math.fsum(weights)
    tail = max(0.0, 1.0 - total)
    return PoissonTruncation(rate_time, depth, weights, tail)
