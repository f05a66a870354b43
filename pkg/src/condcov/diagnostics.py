"""Empirical checks of the structural conditions the theory rests on:

* the expected absolute covariance of a regressor's predictions at two
  independent points, across training draws (should scale like 1/n for
  bias-variance-balanced or undersmoothed estimators),
* pointwise bias/variance profiles of a regressor,
* nearest-neighbor distance scaling n^{-1/d},
* the frequency of singular local-polynomial Gram matrices (should decay
  geometrically in n h^d).

Everything is Monte Carlo with seeded streams; reports carry standard
errors so pass/fail judgments are statistical tests, never equalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from sklearn.base import BaseEstimator, clone

from .datagen import DgpSpec
from .regressors import GRAM_SINGULAR_RTOL, LocalPolynomialRegressor


def _spawn_ints(seed: int, count: int) -> NDArray[np.uint64]:
    """Independent 63-bit seeds derived from one root seed."""
    ss = np.random.SeedSequence(seed)
    return ss.generate_state(count, dtype=np.uint64) >> np.uint64(1)


def _refit(spec: BaseEstimator, dgp: DgpSpec, n: int, seed: int) -> BaseEstimator:
    est = clone(spec)
    if "seed" in est.get_params():
        est.set_params(seed=int(seed) ^ 0x5EED)
    ds = dgp.sample(n, seed=int(seed))
    return est.fit(ds.x, ds.y)


@dataclass(frozen=True)
class CovarianceConditionResult:
    """Expected absolute prediction covariance at one sample size."""

    estimator_kind: str
    n: int
    estimate: float  # E |cov{eta_hat(X_i), eta_hat(X_j) | X_i, X_j}|
    mc_se: float
    n_pairs: int
    n_refits: int

    @property
    def n_times_estimate(self) -> float:
        return self.n * self.estimate


def estimate_covariance_condition(
    nuisance_spec: BaseEstimator,
    dgp: DgpSpec,
    n: int,
    n_pairs: int = 50,
    n_refits: int = 200,
    seed: int = 0,
) -> CovarianceConditionResult:
    """Average |cov| of predictions at independent point pairs across refits.

    Each pair gets its own block of fresh training sets, so pair-level
    estimates are independent and their spread yields the standard error.
    """
    if n_refits < 30:
        raise ValueError(f"n_refits must be >= 30, got {n_refits}")
    if n_pairs < 10:
        raise ValueError(f"n_pairs must be >= 10, got {n_pairs}")
    d = dgp.d
    pair_rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    points = pair_rng.uniform(0.0, 1.0, size=(n_pairs, 2, d))
    refit_seeds = _spawn_ints(seed ^ 0xC0FFEE, n_pairs * n_refits).reshape(
        n_pairs, n_refits
    )
    abs_covs = np.empty(n_pairs)
    for p in range(n_pairs):
        preds = np.empty((n_refits, 2))
        for r in range(n_refits):
            est = _refit(nuisance_spec, dgp, n, int(refit_seeds[p, r]))
            preds[r] = est.predict(points[p])
        c = np.cov(preds[:, 0], preds[:, 1], ddof=1)[0, 1]
        abs_covs[p] = abs(c)
    return CovarianceConditionResult(
        estimator_kind=type(nuisance_spec).__name__,
        n=n,
        estimate=float(abs_covs.mean()),
        mc_se=float(abs_covs.std(ddof=1) / math.sqrt(n_pairs)),
        n_pairs=n_pairs,
        n_refits=n_refits,
    )


@dataclass(frozen=True)
class CovarianceConditionReport:
    """Covariance-condition estimates over a sample-size grid."""

    estimator_kind: str
    n_grid: Tuple[int, ...]
    estimates: Tuple[float, ...]
    n_times_estimate: Tuple[float, ...]
    mc_se: Tuple[float, ...]

    def ratio(self) -> float:
        """n * estimate at the smallest n over the same at the largest."""
        return self.n_times_estimate[0] / self.n_times_estimate[-1]


def covariance_condition_curve(
    nuisance_spec: BaseEstimator,
    dgp: DgpSpec,
    n_grid: Sequence[int],
    n_pairs: int = 50,
    n_refits: int = 200,
    seed: int = 0,
) -> CovarianceConditionReport:
    """Run the covariance-condition estimate at each sample size in turn."""
    results = [
        estimate_covariance_condition(
            nuisance_spec, dgp, int(n), n_pairs=n_pairs, n_refits=n_refits, seed=seed
        )
        for n in sorted(n_grid)
    ]
    return CovarianceConditionReport(
        estimator_kind=type(nuisance_spec).__name__,
        n_grid=tuple(r.n for r in results),
        estimates=tuple(r.estimate for r in results),
        n_times_estimate=tuple(r.n_times_estimate for r in results),
        mc_se=tuple(r.mc_se for r in results),
    )


@dataclass(frozen=True)
class BiasProfile:
    """Pointwise bias and variance of a regressor over a query grid."""

    grid: NDArray[np.float64]
    pointwise_bias: NDArray[np.float64]
    pointwise_variance: NDArray[np.float64]
    mc_se: NDArray[np.float64]
    n_refits: int

    @property
    def sup_abs_bias(self) -> float:
        return float(np.abs(self.pointwise_bias).max())

    @property
    def sup_variance(self) -> float:
        return float(self.pointwise_variance.max())


def bias_profile(
    nuisance_spec: BaseEstimator,
    dgp: DgpSpec,
    truth: Callable[[NDArray], NDArray],
    n: int,
    n_refits: int,
    grid: NDArray[np.float64],
    seed: int = 0,
) -> BiasProfile:
    """Monte Carlo bias/variance of the regressor at each grid point."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    preds = np.empty((n_refits, grid.shape[0]))
    seeds = _spawn_ints(seed ^ 0xB1A5, n_refits)
    for r in range(n_refits):
        est = _refit(nuisance_spec, dgp, n, int(seeds[r]))
        preds[r] = est.predict(grid)
    truth_vals = np.asarray(truth(grid), dtype=float).reshape(-1)
    bias = preds.mean(axis=0) - truth_vals
    var = preds.var(axis=0, ddof=1)
    return BiasProfile(
        grid=grid,
        pointwise_bias=bias,
        pointwise_variance=var,
        mc_se=preds.std(axis=0, ddof=1) / math.sqrt(n_refits),
        n_refits=n_refits,
    )


def nn_distance_curve(
    d: int,
    n_grid: Sequence[int],
    n_reps: int = 200,
    seed: int = 0,
) -> List[Tuple[int, float, float]]:
    """Mean distance from the cube center to the nearest of n uniform draws.

    Returns (n, mean, mc_se) per sample size; the log-log slope against n
    should sit near -1/d.
    """
    if any(n < 1 for n in n_grid):
        raise ValueError("all sample sizes must be >= 1")
    x0 = np.full(d, 0.5)
    out = []
    rng = np.random.default_rng(np.random.SeedSequence([seed, d, 202]))
    for n in n_grid:
        dists = np.empty(n_reps)
        for r in range(n_reps):
            pts = rng.uniform(0.0, 1.0, size=(n, d))
            dists[r] = np.sqrt(((pts - x0) ** 2).sum(axis=1)).min()
        out.append((int(n), float(dists.mean()), float(dists.std(ddof=1) / math.sqrt(n_reps))))
    return out


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y on log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def gram_singularity_rate(
    d: int,
    h_grid: Sequence[float],
    n: int,
    n_reps: int = 200,
    seed: int = 0,
    kernel=None,
) -> List[Tuple[float, float]]:
    """Frequency of a numerically singular local Gram matrix at the center.

    Singularity uses the estimation threshold (smallest singular value
    below GRAM_SINGULAR_RTOL times the largest).
    """
    if any(h <= 0 for h in h_grid):
        raise ValueError("bandwidths must be positive")
    x0 = np.full((1, d), 0.5)
    rng = np.random.default_rng(np.random.SeedSequence([seed, d, 303]))
    out = []
    for h in h_grid:
        singular = 0
        for _ in range(n_reps):
            pts = rng.uniform(0.0, 1.0, size=(n, d))
            lpr = LocalPolynomialRegressor(bandwidth=float(h), kernel=kernel).fit(
                pts, np.zeros(n)
            )
            q = lpr.gram_matrix(x0, h=float(h))
            sv = np.linalg.svd(q, compute_uv=False)
            if sv[0] <= 0 or sv[-1] <= GRAM_SINGULAR_RTOL * sv[0]:
                singular += 1
        out.append((float(h), singular / n_reps))
    return out
