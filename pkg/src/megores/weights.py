"""Benchmark weight distributions and the iteration-budget calculation.

Two weight families are supported: a squashed-Gaussian family whose
concentration is controlled by a location parameter ``y`` (larger ``y``
pushes most weights toward zero, emulating particle degeneracy), and i.i.d.
gamma samples.  The iteration budget ``B`` for the Metropolis-family
resamplers is derived from the mean/max weight ratio and an error bound
``epsilon``; the companion recurrence gives the probability that a particle
adopts the maximum-weight particle as its ancestor after ``B`` rounds and
serves as an independent oracle for the resampler tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import rng

__all__ = [
    "WeightVector",
    "GaussianWeightParams",
    "GammaWeightParams",
    "IterationBudget",
    "GAUSSIAN_PEAK",
    "gen_gaussian_weights",
    "gen_gamma_weights",
    "compute_iterations",
    "estimate_ratio",
    "proposition_recurrence",
]

# Maximum attainable weight of the Gaussian family (density peak at x == y).
GAUSSIAN_PEAK = 1.0 / math.sqrt(2.0 * math.pi)

_DTYPES = {"single": np.float32, "double": np.float64}


@dataclass
class WeightVector:
    """Non-negative particle weights; normalisation is not required."""

    values: np.ndarray
    precision: str = "single"

    def __post_init__(self):
        dtype = _DTYPES.get(self.precision)
        if dtype is None:
            raise ValueError(f"precision must be 'single' or 'double', got {self.precision!r}")
        self.values = np.asarray(self.values, dtype=dtype)
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("weights must be finite")
        if np.any(self.values < 0):
            raise ValueError("weights must be non-negative")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class GaussianWeightParams:
    y: float
    n: int

    def __post_init__(self):
        if self.y < 0:
            raise ValueError(f"y must be >= 0, got {self.y}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class GammaWeightParams:
    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"alpha and beta must be > 0, got {self.alpha}, {self.beta}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class IterationBudget:
    b: int
    epsilon: float

    def __post_init__(self):
        if self.b < 1:
            raise ValueError(f"B must be >= 1, got {self.b}")


def gen_gaussian_weights(params: GaussianWeightParams, seed, precision="single") -> WeightVector:
    """w_i = exp(-(x_i - y)^2 / 2) / sqrt(2*pi) with x_i standard normal."""
    x = rng.gaussian_at(seed, np.arange(params.n), 0)
    w = np.exp(-0.5 * (x - params.y) ** 2) * GAUSSIAN_PEAK
    return WeightVector(w, precision)


def gen_gamma_weights(params: GammaWeightParams, seed, precision="single") -> WeightVector:
    """I.i.d. gamma(alpha, rate=beta) weights via inverse-CDF sampling."""
    u = rng.uniform_open01_at(seed, np.arange(params.n), 0)
    w = stats.gamma.ppf(u, a=params.alpha, scale=1.0 / params.beta)
    return WeightVector(w, precision)


def compute_iterations(epsilon: float, mean_w: float, max_w: float) -> IterationBudget:
    """Minimum comparison rounds for an error bound of ``epsilon``.

    B = ceil(ln(eps) / ln(1 - mean_w / max_w)), clamped to at least 1.  With
    all weights equal the log argument is zero and the formula degenerates;
    one round preserves the algorithm shape, so the clamp returns B = 1.
    """
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if mean_w <= 0 or max_w <= 0:
        raise ValueError("mean_w and max_w must be positive")
    if mean_w > max_w:
        raise ValueError(f"mean_w ({mean_w}) exceeds max_w ({max_w})")
    ratio = mean_w / max_w
    if ratio >= 1.0 or epsilon == 1.0:
        return IterationBudget(1, epsilon)
    b = math.ceil(math.log(epsilon) / math.log(1.0 - ratio))
    return IterationBudget(max(b, 1), epsilon)


def estimate_ratio(w: WeightVector, subset_size: int, seed) -> float:
    """Estimate mean(w)/max(w) from a random subset, avoiding a full scan.

    The subset is the first ``subset_size`` entries of a seed-determined
    permutation, so ``subset_size == len(w)`` reproduces the exact ratio.
    The subset max underestimates the population max, which biases the
    resulting iteration budget low; callers trading accuracy for speed
    accept that.
    """
    n = len(w)
    if not (1 <= subset_size <= n):
        raise ValueError(f"subset_size must be in [1, {n}], got {subset_size}")
    if subset_size == n:
        sub = np.asarray(w.values, dtype=np.float64)
    else:
        order = np.argsort(rng.uniform01_at(seed, np.arange(n), 0), kind="stable")
        sub = np.asarray(w.values, dtype=np.float64)[order[:subset_size]]
    m = float(sub.max())
    if m == 0.0:
        raise ValueError("subset contains only zero weights")
    return float(sub.mean()) / m


def proposition_recurrence(mean_w: float, max_w: float, n: int, b: int) -> float:
    """Probability a particle ends with the max-weight particle as ancestor.

    Iterates P_k = 1/N + P_{k-1} * (1 - mean_w/max_w) from P_0 = 0 for ``b``
    steps.  Used as an analytic oracle against Monte Carlo runs of the
    offset-based resampler.
    """
    if b < 0:
        raise ValueError(f"B must be >= 0, got {b}")
    if mean_w <= 0 or max_w <= 0 or mean_w > max_w:
        raise ValueError("need 0 < mean_w <= max_w")
    ratio = mean_w / max_w
    p = 0.0
    for _ in range(b):
        p = 1.0 / n + p * (1.0 - ratio)
    return p
