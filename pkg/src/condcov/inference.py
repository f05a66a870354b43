"""Standardization, Wald intervals, QQ coordinates, and the limiting
variance constant for the sub-root-n regime.

Both standardization modes divide by the same sample-variance-of-phi
estimate; the mode tag records which central limit theorem is being
invoked (the classical root-n one, or the conditional-variance one where
the bandwidth shrinks fast enough that n h^d -> 0 and the phi variance
grows like 1/(n h^d)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np
from scipy.stats import norm

from .datagen import DgpSpec
from .kernels import KernelSpec, kernel_l2_norm_sq

ROOT_N = "root_n"
CONDITIONAL_SLOW = "conditional_slow"


def normal_quantile(p: float) -> float:
    """Standard normal quantile, accurate to ~1e-15."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {p}")
    return float(norm.ppf(p))


def wald_interval(
    psi_hat: float, variance_hat: float, n: int, alpha: float
) -> Tuple[float, float]:
    """psi_hat +/- z_{1-alpha/2} sqrt(variance_hat / n)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if variance_hat < 0:
        raise ValueError(f"variance_hat must be nonnegative, got {variance_hat}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(variance_hat / n)
    return psi_hat - half, psi_hat + half


@dataclass(frozen=True)
class StandardizedStat:
    """(psi_hat - psi_true) / sqrt(variance_hat / n) with its mode tag."""

    value: float
    mode: str
    psi_true: float
    scale: float


def standardize(
    psi_hat: float,
    psi_true: float,
    variance_hat: float,
    n: int,
    mode: str = ROOT_N,
) -> StandardizedStat:
    if variance_hat <= 0:
        raise ValueError(f"variance_hat must be positive, got {variance_hat}")
    if mode not in (ROOT_N, CONDITIONAL_SLOW):
        raise ValueError(f"unknown standardization mode {mode!r}")
    scale = math.sqrt(variance_hat / n)
    return StandardizedStat(
        value=(psi_hat - psi_true) / scale, mode=mode, psi_true=psi_true, scale=scale
    )


def limiting_variance_oracle(
    dgp: DgpSpec, kernel: KernelSpec, which: str = "mu_undersmoothed"
) -> float:
    """The constant that n h^d * V{phi_hat | training} converges to.

    For the built-in designs (A = Y, uniform covariates, homoskedastic
    noise) the two expectation factors reduce to
    sigma^2 * (int g^2 + sigma^2) and int K^2, where g is the common mean
    function. The two exposure/outcome roles are symmetric here, so
    ``which`` only selects which kernel's squared norm is used by the
    caller's convention.
    """
    if which not in ("mu_undersmoothed", "pi_undersmoothed"):
        raise ValueError(f"unknown role {which!r}")
    if dgp.kind not in ("doppler", "holder"):
        raise ValueError("oracle needs a built-in dgp with known density")
    sigma2 = dgp.noise_variance
    second_moment = dgp.mean_l2sq() + sigma2  # E(Y^2) under f = 1
    return sigma2 * second_moment * kernel_l2_norm_sq(kernel)


def qq_points(values: Iterable[float]) -> List[Tuple[float, float]]:
    """(theoretical, empirical) normal QQ pairs at Hazen plotting positions."""
    arr = np.sort(np.asarray(list(values), dtype=float))
    m = len(arr)
    if m < 2:
        raise ValueError(f"need at least 2 values, got {m}")
    theo = norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    return [(float(t), float(e)) for t, e in zip(theo, arr)]
