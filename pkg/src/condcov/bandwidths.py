"""Rate-based tuning rules for the nuisance regressors.

The rules encode how a bandwidth (or neighbor count) scales with the
training-fold size; each carries a configurable constant c (default 1)
because only rates, not constants, are pinned down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class FixedBandwidth:
    """h = value, independent of n."""

    value: float

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise ValueError(f"fixed bandwidth must be positive, got {self.value}")


@dataclass(frozen=True)
class UndersmoothedLpr:
    """h = c * (n / log n)^{-1/d}: the aggressive local-polynomial rate."""

    c: float = 1.0


@dataclass(frozen=True)
class MinimaxCda:
    """h = c * n^{-2/(2a+2b+d)}: rate-optimal for the functional when the
    covariate density is known, given nuisance smoothnesses a and b."""

    alpha: float
    beta: float
    c: float = 1.0


@dataclass(frozen=True)
class SuboptCda:
    """h = c * n^{-(2+eps)/(2a+2b+d)}, 0 < eps < 4(a+b)/d: undersmoothed past
    the rate-optimal bandwidth so the functional estimator's variance
    dominates and a normal limit holds below the root-n rate."""

    alpha: float
    beta: float
    eps: float
    c: float = 1.0


@dataclass(frozen=True)
class MseOptimalCda:
    """h = c * n^{-1/(2s+d)}: the regression-MSE-optimal rate at smoothness s."""

    s: float
    c: float = 1.0


@dataclass(frozen=True)
class KnnLogN:
    """k = max(1, round(c * log n)) neighbors."""

    c: float = 1.0


@dataclass(frozen=True)
class AdaptiveKnn10:
    """Per-query bandwidth: distance to the k-th (default 10th) nearest
    training point. Resolved at prediction time, not by resolve_bandwidth."""

    k: int = 10

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"neighbor count must be >= 1, got {self.k}")


BandwidthRule = Union[
    FixedBandwidth,
    UndersmoothedLpr,
    MinimaxCda,
    SuboptCda,
    MseOptimalCda,
    KnnLogN,
    AdaptiveKnn10,
]


def midpoint_eps(alpha: float, beta: float, d: int) -> float:
    """Midpoint of the admissible undersmoothing interval (0, 4(a+b)/d)."""
    return 2.0 * (alpha + beta) / d


def resolve_bandwidth(rule: BandwidthRule, n: int, d: int) -> float:
    """Evaluate a rule at training size n in dimension d.

    Returns a bandwidth, or a neighbor count for KnnLogN. AdaptiveKnn10 is
    query-dependent and cannot be resolved here.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if isinstance(rule, FixedBandwidth):
        return rule.value
    if isinstance(rule, UndersmoothedLpr):
        return rule.c * (n / math.log(n)) ** (-1.0 / d)
    if isinstance(rule, MinimaxCda):
        return rule.c * n ** (-2.0 / (2 * rule.alpha + 2 * rule.beta + d))
    if isinstance(rule, SuboptCda):
        hi = 4.0 * (rule.alpha + rule.beta) / d
        if not 0.0 < rule.eps < hi:
            raise ValueError(
                f"eps must lie in (0, {hi:g}) for alpha={rule.alpha}, "
                f"beta={rule.beta}, d={d}; got {rule.eps}"
            )
        return rule.c * n ** (-(2.0 + rule.eps) / (2 * rule.alpha + 2 * rule.beta + d))
    if isinstance(rule, MseOptimalCda):
        return rule.c * n ** (-1.0 / (2 * rule.s + d))
    if isinstance(rule, KnnLogN):
        return float(max(1, round(rule.c * math.log(n))))
    if isinstance(rule, AdaptiveKnn10):
        raise ValueError(
            "AdaptiveKnn10 is query-dependent; it is resolved inside "
            "local-polynomial prediction"
        )
    raise TypeError(f"unknown bandwidth rule {rule!r}")
