"""Cross-fit estimators of the expected conditional covariance.

The target is psi = E{cov(A, Y | X)} = E(AY) - E{pi(X) mu(X)}. Its
un-centered influence function is phi(Z) = (A - pi(X))(Y - mu(X)); every
estimator here averages estimated phi values over data independent of the
nuisance fits. Means and variances of phi values use exactly rounded
summation (math.fsum) so results are invariant to observation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from numpy.typing import NDArray
from sklearn.base import BaseEstimator, clone

from .dataset import Dataset
from .inference import wald_interval


@dataclass(frozen=True)
class ThreeFoldSplit:
    """Disjoint index sets for the outcome fit, exposure fit, and averaging."""

    fold_mu: NDArray[np.intp]
    fold_pi: NDArray[np.intp]
    fold_phi: NDArray[np.intp]

    def __post_init__(self) -> None:
        fm = np.asarray(self.fold_mu, dtype=np.intp)
        fp = np.asarray(self.fold_pi, dtype=np.intp)
        fe = np.asarray(self.fold_phi, dtype=np.intp)
        object.__setattr__(self, "fold_mu", fm)
        object.__setattr__(self, "fold_pi", fp)
        object.__setattr__(self, "fold_phi", fe)
        if min(len(fm), len(fp), len(fe)) == 0:
            raise ValueError("all three folds must be nonempty")
        allidx = np.concatenate([fm, fp, fe])
        if len(np.unique(allidx)) != len(allidx):
            raise ValueError("folds must be pairwise disjoint")

    @property
    def n(self) -> int:
        return len(self.fold_mu) + len(self.fold_pi) + len(self.fold_phi)

    def validate_for(self, ds: Dataset) -> None:
        allidx = np.concatenate([self.fold_mu, self.fold_pi, self.fold_phi])
        if self.n != ds.n or not np.array_equal(np.sort(allidx), np.arange(ds.n)):
            raise ValueError("split does not partition the dataset's indices")

    def rotate(self, r: int) -> "ThreeFoldSplit":
        """Cycle the three roles r steps: each fold takes the next role."""
        folds = (self.fold_mu, self.fold_pi, self.fold_phi)
        return ThreeFoldSplit(folds[r % 3], folds[(1 + r) % 3], folds[(2 + r) % 3])


def equal_split(n: int, seed: Optional[int] = None) -> ThreeFoldSplit:
    """Partition {0..n-1} into three folds whose sizes differ by at most 1.

    With a seed the assignment is a seeded permutation; otherwise folds are
    consecutive index blocks.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    perm = (
        np.arange(n)
        if seed is None
        else np.random.default_rng(seed).permutation(n)
    )
    cuts = [round(n / 3), round(2 * n / 3)]
    return ThreeFoldSplit(perm[: cuts[0]], perm[cuts[0] : cuts[1]], perm[cuts[1] :])


def _fsum_mean(values: NDArray[np.float64]) -> float:
    return math.fsum(values) / len(values)


def _fsum_var(values: NDArray[np.float64], mean: float) -> float:
    if len(values) < 2:
        return 0.0
    return math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)


@dataclass(frozen=True)
class EccEstimate:
    """Point estimate, influence values, and a Wald interval."""

    psi_hat: float
    eif_values: NDArray[np.float64]
    n_phi: int
    variance_hat: float
    ci_low: float
    ci_high: float
    alpha: float
    standardization: str = "root_n"  # or "conditional_slow"
    tuning: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "psi_hat": self.psi_hat,
            "variance_hat": self.variance_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "alpha": self.alpha,
            "standardization": self.standardization,
            "n_phi": self.n_phi,
            "tuning": self.tuning,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def eif_values(
    fold: Dataset, mu_hat: BaseEstimator, pi_hat: BaseEstimator
) -> NDArray[np.float64]:
    """(A_i - pi_hat(X_i)) * (Y_i - mu_hat(X_i)) over the fold, in order."""
    pi_pred = np.asarray(pi_hat.predict(fold.x), dtype=float)
    mu_pred = np.asarray(mu_hat.predict(fold.x), dtype=float)
    if pi_pred.shape != (fold.n,) or mu_pred.shape != (fold.n,):
        raise ValueError("nuisance predictions do not match the fold size")
    return (fold.a - pi_pred) * (fold.y - mu_pred)


def _describe_tuning(est: BaseEstimator) -> Dict[str, Any]:
    desc: Dict[str, Any] = {"method": type(est).__name__}
    for name in ("k", "k_n", "n_trees", "h_", "adaptive_k_"):
        if hasattr(est, name):
            val = getattr(est, name)
            if isinstance(val, (int, float)) or val is None:
                desc[name.rstrip("_")] = val
    bw = getattr(est, "bandwidth", None)
    if bw is not None:
        desc["bandwidth_rule"] = repr(bw)
    kern = getattr(est, "kernel_", None)
    if kern is not None:
        desc["kernel"] = kern.to_json()
    return desc


def _estimate_from_eif(
    phi: NDArray[np.float64],
    alpha: float,
    n_for_ci: Optional[int] = None,
    psi_override: Optional[float] = None,
    tuning: Optional[Dict[str, Any]] = None,
    standardization: str = "root_n",
) -> EccEstimate:
    psi = _fsum_mean(phi) if psi_override is None else psi_override
    var = _fsum_var(phi, _fsum_mean(phi))
    n_ci = len(phi) if n_for_ci is None else n_for_ci
    lo, hi = wald_interval(psi, var, n_ci, alpha)
    return EccEstimate(
        psi_hat=psi,
        eif_values=phi,
        n_phi=len(phi),
        variance_hat=var,
        ci_low=lo,
        ci_high=hi,
        alpha=alpha,
        standardization=standardization,
        tuning=tuning or {},
    )


def dcdr_estimate(
    data: Dataset,
    split: ThreeFoldSplit,
    mu_spec: BaseEstimator,
    pi_spec: BaseEstimator,
    alpha: float = 0.05,
) -> EccEstimate:
    """Double cross-fit estimate from one three-fold split.

    The outcome regression is fit on its own fold, the exposure regression
    on a second, and the influence values are averaged over the third, so
    the two nuisance fits are independent of each other and of the
    averaging data. The Wald interval uses the sample variance of the
    influence values over the estimation fold.

    Parameters
    ----------
    data : Dataset
        Observations (X, A, Y).
    split : ThreeFoldSplit
        Disjoint index sets partitioning the data.
    mu_spec, pi_spec : sklearn-style regressors
        Unfitted nuisance specs; they are cloned before fitting.
    alpha : float
        One minus the confidence level of the interval.
    """
    split.validate_for(data)
    mu_fold = data.subset(split.fold_mu)
    pi_fold = data.subset(split.fold_pi)
    est_fold = data.subset(split.fold_phi)
    mu_hat = clone(mu_spec).fit(mu_fold.x, mu_fold.y)
    pi_hat = clone(pi_spec).fit(pi_fold.x, pi_fold.a)
    phi = eif_values(est_fold, mu_hat, pi_hat)
    tuning = {"mu": _describe_tuning(mu_hat), "pi": _describe_tuning(pi_hat)}
    return _estimate_from_eif(phi, alpha, tuning=tuning)


def scdr_estimate(
    data: Dataset,
    train_idx: NDArray[np.intp],
    phi_idx: NDArray[np.intp],
    mu_spec: BaseEstimator,
    pi_spec: BaseEstimator,
    alpha: float = 0.05,
) -> EccEstimate:
    """Both nuisances fit on one training fold; phi averaged on the other."""
    train_idx = np.asarray(train_idx, dtype=np.intp)
    phi_idx = np.asarray(phi_idx, dtype=np.intp)
    if len(np.intersect1d(train_idx, phi_idx)) > 0:
        raise ValueError("training and estimation folds must be disjoint")
    if min(len(train_idx), len(phi_idx)) == 0:
        raise ValueError("both folds must be nonempty")
    train = data.subset(train_idx)
    est_fold = data.subset(phi_idx)
    mu_hat = clone(mu_spec).fit(train.x, train.y)
    pi_hat = clone(pi_spec).fit(train.x, train.a)
    phi = eif_values(est_fold, mu_hat, pi_hat)
    tuning = {"mu": _describe_tuning(mu_hat), "pi": _describe_tuning(pi_hat)}
    return _estimate_from_eif(phi, alpha, tuning=tuning)


def plugin_estimate(
    data: Dataset,
    train_idx: NDArray[np.intp],
    phi_idx: NDArray[np.intp],
    mu_spec: BaseEstimator,
    alpha: float = 0.05,
) -> EccEstimate:
    """mean of A_i (Y_i - mu_hat(X_i)): the single-nuisance plug-in form."""
    train_idx = np.asarray(train_idx, dtype=np.intp)
    phi_idx = np.asarray(phi_idx, dtype=np.intp)
    if len(np.intersect1d(train_idx, phi_idx)) > 0:
        raise ValueError("training and estimation folds must be disjoint")
    train = data.subset(train_idx)
    est_fold = data.subset(phi_idx)
    mu_hat = clone(mu_spec).fit(train.x, train.y)
    phi = est_fold.a * (est_fold.y - np.asarray(mu_hat.predict(est_fold.x), dtype=float))
    return _estimate_from_eif(
        phi, alpha, tuning={"mu": _describe_tuning(mu_hat), "pi": {"method": "zero"}}
    )


def cycle_folds_average(
    data: Dataset,
    mu_spec: BaseEstimator,
    pi_spec: BaseEstimator,
    alpha: float = 0.05,
    split: Optional[ThreeFoldSplit] = None,
    scdr: bool = False,
) -> EccEstimate:
    """Run the three cyclic rotations of one partition and pool the results.

    The point estimate is the mean of the three rotation estimates; the
    variance is the sample variance of the pooled phi vector (each
    observation lands in the estimation fold exactly once), and the
    interval width uses the full sample size. With ``scdr=True`` both
    nuisances are fit on the union of the two training folds per rotation.
    """
    if split is None:
        split = equal_split(data.n)
    split.validate_for(data)
    estimates = []
    phis = []
    for r in range(3):
        rot = split.rotate(r)
        if scdr:
            train_idx = np.concatenate([rot.fold_mu, rot.fold_pi])
            est = scdr_estimate(data, train_idx, rot.fold_phi, mu_spec, pi_spec, alpha)
        else:
            est = dcdr_estimate(data, rot, mu_spec, pi_spec, alpha)
        estimates.append(est)
        phis.append(est.eif_values)
    pooled = np.concatenate(phis)
    psi = _fsum_mean(np.asarray([e.psi_hat for e in estimates]))
    return _estimate_from_eif(
        pooled,
        alpha,
        n_for_ci=len(pooled),
        psi_override=psi,
        tuning={"rotations": [e.tuning for e in estimates], "scdr": scdr},
    )
