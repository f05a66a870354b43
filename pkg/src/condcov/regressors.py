"""Nuisance regressors: k-NN, local polynomial, density-adapted kernel,
centered random forest, plus oracle/constant helpers for testing.

All regressors follow the sklearn estimator contract (``fit(X, y)`` /
``predict(X)`` / ``get_params``), so any other sklearn regressor can be
dropped in as a nuisance spec. A fitted regressor never reads observations
outside the fold it was fit on, and prediction is deterministic given the
fitted state.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .bandwidths import (
    AdaptiveKnn10,
    BandwidthRule,
    FixedBandwidth,
    resolve_bandwidth,
)
from .kernels import KernelSpec, epanechnikov, eval_kernel

# Gram matrices with smallest/largest singular value below this ratio are
# treated as non-invertible (the estimator's explicit zero fallback).
GRAM_SINGULAR_RTOL = 1e-10

_CHUNK = 256  # queries per vectorized block


def _as_matrix(x: NDArray) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


class KnnRegressor(RegressorMixin, BaseEstimator):
    """Exact k-nearest-neighbor mean with lowest-index tie-breaking."""

    def __init__(self, k: int = 10):
        self.k = k

    def fit(self, X, y):
        X, y = check_X_y(_as_matrix(X), y)
        if not 1 <= self.k <= X.shape[0]:
            raise ValueError(f"k must be in [1, {X.shape[0]}], got {self.k}")
        self.X_ = X
        self.y_ = np.asarray(y, dtype=float)
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        Q = check_array(_as_matrix(X))
        if Q.shape[1] != self.X_.shape[1]:
            raise ValueError(
                f"query dimension {Q.shape[1]} != training dimension {self.X_.shape[1]}"
            )
        out = np.empty(Q.shape[0])
        n = self.X_.shape[0]
        k = self.k
        for lo in range(0, Q.shape[0], _CHUNK):
            q = Q[lo : lo + _CHUNK]
            d2 = ((q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            if k == n:
                out[lo : lo + q.shape[0]] = self.y_.mean()
                continue
            # candidate window slightly wider than k, then a stable sort by
            # (distance, training index) so exact ties break to low index
            kk = min(n, k + 8)
            part = np.argpartition(d2, kk - 1, axis=1)[:, :kk]
            cand_d = np.take_along_axis(d2, part, 1)
            order = np.lexsort((part, cand_d), axis=1)
            idx = np.take_along_axis(part, order, 1)[:, :k]
            out[lo : lo + q.shape[0]] = self.y_[idx].mean(axis=1)
        return out


def monomial_exponents(d: int, max_degree: int) -> NDArray[np.intp]:
    """All exponent vectors of total degree <= max_degree, graded lex order.

    The constant monomial comes first, so b(0) is the first unit vector.
    """
    rows = []
    for deg in range(max_degree + 1):
        block = []
        for combo in combinations_with_replacement(range(d), deg):
            e = [0] * d
            for j in combo:
                e[j] += 1
            block.append(tuple(e))
        rows.extend(sorted(block, reverse=True))
    return np.asarray(rows, dtype=np.intp)


def lpr_basis_degree(d: int) -> int:
    """Smallest integer strictly greater than d/2."""
    return d // 2 + 1


def _eval_basis(u: NDArray[np.float64], exps: NDArray[np.intp]) -> NDArray[np.float64]:
    """Monomial basis values; u has shape (..., d), result (..., p)."""
    max_deg = int(exps.max())
    pw = np.ones(u.shape + (max_deg + 1,))
    for deg in range(1, max_deg + 1):
        pw[..., deg] = pw[..., deg - 1] * u
    out = np.ones(u.shape[:-1] + (exps.shape[0],))
    for p_idx, e in enumerate(exps):
        for j, ej in enumerate(e):
            if ej:
                out[..., p_idx] = out[..., p_idx] * pw[..., j, ej]
    return out


class LocalPolynomialRegressor(RegressorMixin, BaseEstimator):
    """Local polynomial regression with total degree ceil-strict(d/2).

    The weights reproduce polynomials up to the basis degree whenever the
    local Gram matrix is invertible; a numerically singular Gram yields a
    zero prediction. ``bandwidth`` is a number, a rate rule resolved
    against the training size, or AdaptiveKnn10 (per-query distance to the
    k-th nearest training point).
    """

    def __init__(
        self,
        bandwidth: float | BandwidthRule = AdaptiveKnn10(),
        kernel: Optional[KernelSpec] = None,
    ):
        self.bandwidth = bandwidth
        self.kernel = kernel

    def fit(self, X, y):
        X, y = check_X_y(_as_matrix(X), y)
        self.X_ = X
        self.y_ = np.asarray(y, dtype=float)
        d = X.shape[1]
        self.kernel_ = self.kernel if self.kernel is not None else epanechnikov(d)
        if self.kernel_.dimension != d:
            raise ValueError(
                f"kernel dimension {self.kernel_.dimension} != data dimension {d}"
            )
        self.exponents_ = monomial_exponents(d, lpr_basis_degree(d))
        if isinstance(self.bandwidth, AdaptiveKnn10):
            self.h_ = None
            self.adaptive_k_ = min(self.bandwidth.k, X.shape[0])
        elif isinstance(self.bandwidth, (int, float)):
            if self.bandwidth <= 0:
                raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
            self.h_ = float(self.bandwidth)
        else:
            self.h_ = resolve_bandwidth(self.bandwidth, X.shape[0], d)
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        Q = check_array(_as_matrix(X))
        n, d = self.X_.shape
        if Q.shape[1] != d:
            raise ValueError(f"query dimension {Q.shape[1]} != training dimension {d}")
        max_deg = int(self.exponents_.max())
        chunk = max(1, min(_CHUNK, int(4e6 / max(1, n * d * (max_deg + 1)))))
        out = np.zeros(Q.shape[0])
        for lo in range(0, Q.shape[0], chunk):
            q = Q[lo : lo + chunk]
            m = q.shape[0]
            if self.h_ is None:
                # adaptive: only the nearest adaptive_k_ points carry kernel
                # mass (the bandwidth is the k-th neighbor distance), so
                # restrict the local fit to a neighbor window
                d2 = ((q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
                kth = min(self.adaptive_k_, n)
                if kth < n:
                    nb = np.argpartition(d2, kth - 1, axis=1)[:, :kth]
                else:
                    nb = np.broadcast_to(np.arange(n), (m, n)).copy()
                nb_d2 = np.take_along_axis(d2, nb, 1)
                h = np.maximum(np.sqrt(nb_d2.max(axis=1)), 1e-300)
                diff = self.X_[nb] - q[:, None, :]  # (m, kth, d)
                n_eff = n
            else:
                h = np.full(m, self.h_)
                diff = self.X_[None, :, :] - q[:, None, :]
                n_eff = n
            u = diff / h[:, None, None]
            kv = eval_kernel(self.kernel_, u.reshape(-1, d)).reshape(m, -1)
            B = _eval_basis(u, self.exponents_)  # (m, w, p)
            scale = 1.0 / (n_eff * h**d)
            gram = np.einsum("mnp,mn,mnq->mpq", B, kv, B) * scale[:, None, None]
            resp = self.y_[nb] if self.h_ is None else self.y_
            subscript = "mnp,mn,mn->mp" if self.h_ is None else "mnp,mn,n->mp"
            rhs = np.einsum(subscript, B, kv, resp) * scale[:, None]
            sv = np.linalg.svd(gram, compute_uv=False)
            ok = (sv[:, 0] > 0) & (sv[:, -1] > GRAM_SINGULAR_RTOL * sv[:, 0])
            preds = np.zeros(m)
            if ok.any():
                sol = np.linalg.solve(gram[ok], rhs[ok][:, :, None])[:, :, 0]
                preds[ok] = sol[:, 0]  # b(0) = e_1 in graded lex order
            out[lo : lo + m] = preds
        return out

    def gram_matrix(self, q: NDArray, h: Optional[float] = None) -> NDArray[np.float64]:
        """The local Gram matrix at a single query point (diagnostic hook)."""
        check_is_fitted(self, "X_")
        q = np.asarray(q, dtype=float).reshape(1, -1)
        n, d = self.X_.shape
        hh = float(h) if h is not None else self.h_
        if hh is None:
            raise ValueError("adaptive bandwidth requires an explicit h here")
        u = (self.X_ - q) / hh
        kv = eval_kernel(self.kernel_, u)
        B = _eval_basis(u, self.exponents_)
        return np.einsum("np,n,nq->pq", B, kv, B) / (n * hh**d)


class DensityAdaptedKernelRegressor(RegressorMixin, BaseEstimator):
    """Kernel regression normalized by the known covariate density.

    predict(q) = sum_i K((X_i - q)/h) * y_i / (n h^d f(X_i)). Not a
    weighted average: with higher-order kernels individual weights can be
    negative and they need not sum to one. ``density=None`` means the
    uniform density on the unit cube.
    """

    def __init__(
        self,
        bandwidth: float | BandwidthRule = FixedBandwidth(0.1),
        kernel: Optional[KernelSpec] = None,
        density: Optional[Callable[[NDArray], NDArray]] = None,
    ):
        self.bandwidth = bandwidth
        self.kernel = kernel
        self.density = density

    def fit(self, X, y):
        X, y = check_X_y(_as_matrix(X), y)
        self.X_ = X
        self.y_ = np.asarray(y, dtype=float)
        n, d = X.shape
        self.kernel_ = self.kernel if self.kernel is not None else epanechnikov(d)
        if self.kernel_.dimension != d:
            raise ValueError(
                f"kernel dimension {self.kernel_.dimension} != data dimension {d}"
            )
        if isinstance(self.bandwidth, (int, float)):
            if self.bandwidth <= 0:
                raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
            self.h_ = float(self.bandwidth)
        else:
            self.h_ = resolve_bandwidth(self.bandwidth, n, d)
        f_vals = (
            np.ones(n) if self.density is None else np.asarray(self.density(X), dtype=float)
        )
        if np.any(f_vals <= 0):
            raise ValueError("covariate density must be positive at every training point")
        self.scaled_y_ = self.y_ / (n * self.h_**d * f_vals)
        # every kernel here vanishes outside the sup-norm cube, so the
        # first coordinate pre-filters candidates via one sorted copy
        order = np.argsort(self.X_[:, 0], kind="stable")
        self.sort_idx_ = order
        self.sorted_x1_ = self.X_[order, 0]
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        Q = check_array(_as_matrix(X))
        n, d = self.X_.shape
        if Q.shape[1] != d:
            raise ValueError(f"query dimension {Q.shape[1]} != training dimension {d}")
        h = self.h_
        out = np.zeros(Q.shape[0])
        q1 = Q[:, 0]
        lo = np.searchsorted(self.sorted_x1_, q1 - h, side="left")
        hi = np.searchsorted(self.sorted_x1_, q1 + h, side="right")
        for i in range(Q.shape[0]):
            if hi[i] == lo[i]:
                continue
            idx = self.sort_idx_[lo[i] : hi[i]]
            u = (self.X_[idx] - Q[i]) / h
            kv = eval_kernel(self.kernel_, u if d > 1 else u[:, 0])
            out[i] = float(kv @ self.scaled_y_[idx])
        return out


class CenteredForestRegressor(RegressorMixin, BaseEstimator):
    """Average of trees whose partitions ignore the data entirely.

    Each tree runs ceil(log2(k_n)) full rounds of splitting: every node
    picks a feature uniformly at random and splits its cell at the
    midpoint, so every leaf has volume 2^{-ceil(log2 k_n)}. A tree
    predicts the mean training response in the query's leaf (zero when the
    leaf is empty); the forest averages the trees.
    """

    def __init__(self, k_n: int = 16, n_trees: int = 200, seed: int = 0):
        self.k_n = k_n
        self.n_trees = n_trees
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(_as_matrix(X), y)
        if self.k_n < 1:
            raise ValueError(f"k_n must be >= 1, got {self.k_n}")
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        self.X_ = X
        self.y_ = np.asarray(y, dtype=float)
        d = X.shape[1]
        rounds = int(math.ceil(math.log2(self.k_n))) if self.k_n > 1 else 0
        self.rounds_ = rounds
        rng = np.random.default_rng(np.random.SeedSequence([int(self.seed), d, rounds]))
        # features_[r] has shape (n_trees, 2^r): the split feature of every
        # depth-r node in every tree
        self.features_ = [
            rng.integers(0, d, size=(self.n_trees, 2**r)) for r in range(rounds)
        ]
        n_leaves = 2**rounds
        leaves = self._leaf_ids(self.X_)
        self.leaf_mean_ = np.zeros((self.n_trees, n_leaves))
        for t in range(self.n_trees):
            cnt = np.bincount(leaves[t], minlength=n_leaves)
            tot = np.bincount(leaves[t], weights=self.y_, minlength=n_leaves)
            nz = cnt > 0
            self.leaf_mean_[t, nz] = tot[nz] / cnt[nz]
        return self

    def _leaf_ids(self, pts: NDArray[np.float64]) -> NDArray[np.intp]:
        """Leaf index of every point in every tree, shape (n_trees, n_pts)."""
        n_pts, d = pts.shape
        ids = np.zeros((self.n_trees, n_pts), dtype=np.intp)
        lo = np.zeros((self.n_trees, n_pts, d))
        hi = np.ones((self.n_trees, n_pts, d))
        t_idx = np.arange(self.n_trees)[:, None]
        p_idx = np.arange(n_pts)[None, :]
        for r in range(self.rounds_):
            feat = self.features_[r][t_idx, ids]  # (n_trees, n_pts)
            cur_lo = lo[t_idx, p_idx, feat]
            cur_hi = hi[t_idx, p_idx, feat]
            mid = 0.5 * (cur_lo + cur_hi)
            right = pts[p_idx, feat] > mid
            lo[t_idx, p_idx, feat] = np.where(right, mid, cur_lo)
            hi[t_idx, p_idx, feat] = np.where(right, cur_hi, mid)
            ids = 2 * ids + right
        return ids

    def predict(self, X):
        check_is_fitted(self, "X_")
        Q = check_array(_as_matrix(X))
        if Q.shape[1] != self.X_.shape[1]:
            raise ValueError(
                f"query dimension {Q.shape[1]} != training dimension {self.X_.shape[1]}"
            )
        leaves = self._leaf_ids(Q)
        preds = np.take_along_axis(self.leaf_mean_, leaves, axis=1)
        return preds.mean(axis=0)


class OracleRegressor(RegressorMixin, BaseEstimator):
    """Predicts a known function (plus an optional constant offset).

    Used for oracle-nuisance experiments; fit is a no-op so fold contents
    never influence predictions.
    """

    def __init__(self, fn: Optional[Callable[[NDArray], NDArray]] = None, offset: float = 0.0):
        self.fn = fn
        self.offset = offset

    def fit(self, X, y=None):
        self.fitted_ = True
        return self

    def predict(self, X):
        Q = _as_matrix(check_array(_as_matrix(X)))
        if self.fn is None:
            return np.full(Q.shape[0], float(self.offset))
        vals = np.asarray(self.fn(Q), dtype=float).reshape(-1)
        return vals + self.offset


class GlobalMeanRegressor(RegressorMixin, BaseEstimator):
    """Predicts the training-response mean everywhere."""

    def fit(self, X, y):
        _, y = check_X_y(_as_matrix(X), y)
        self.mean_ = float(np.mean(y))
        return self

    def predict(self, X):
        check_is_fitted(self, "mean_")
        Q = check_array(_as_matrix(X))
        return np.full(Q.shape[0], self.mean_)
