"""Synthetic data generating processes with known conditional covariance.

Two families are built in, both with A = Y so the target functional equals
the noise variance exactly:

* a Doppler-mean design on [0, 1] (highly non-smooth regression function),
* a smoothness-controlled design whose regression function is a sum of
  compactly supported bumps, calibrated so it lies in a Holder(s) ball.

Generation is pure given (spec, seed); the generator is numpy's PCG64,
recorded in the dataset metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset

RNG_NAME = "numpy-PCG64"

# C-infinity mollifier profile exp(-1/(1-u^2)) on (-1, 1), and its integrals
# on [-1, 1] (precomputed at 30 digits; used for closed-form L2 norms).
MOLLIFIER_INTEGRAL = 0.44399381616807943782
MOLLIFIER_SQ_INTEGRAL = 0.13308612084499427156


def _mollifier(u: NDArray[np.float64]) -> NDArray[np.float64]:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def doppler(x: float | NDArray[np.float64]) -> float | NDArray[np.float64]:
    """sqrt(x(1-x)) * sin(2.1*pi / (x + 0.05)) on [0, 1]."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("doppler is defined on [0, 1]")
    out = np.sqrt(arr * (1.0 - arr)) * np.sin(2.1 * np.pi / (arr + 0.05))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass(frozen=True)
class HolderFunctionSpec:
    """Parameters of the bump-sum construction.

    s : Holder smoothness (> 0). d : dimension. n_ref : sample size the
    construction is calibrated to (sets the number of bumps per axis to
    ceil(n_ref^{1/(2s+1)})). amplitude : bump height scale. seed : drives
    the random bump signs.
    """

    s: float
    d: int = 1
    n_ref: int = 1000
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.s <= 0:
            raise ValueError(f"smoothness must be positive, got {self.s}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.n_ref < 1:
            raise ValueError(f"n_ref must be >= 1, got {self.n_ref}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")

    @property
    def n_bumps(self) -> int:
        return int(math.ceil(self.n_ref ** (1.0 / (2.0 * self.s + 1.0))))


def _holder_seminorm_of_profile(s_frac: float, n_deriv: int) -> float:
    """Holder(s_frac) seminorm of the n_deriv-th mollifier derivative.

    Evaluated numerically on a dense grid; derivative taken by central
    differences. Grid resolution is far finer than any bump feature, so the
    returned value upper-bounds the continuum seminorm up to ~1e-3, and we
    pad by 5% to make the attached constant a true bound in practice.
    """
    grid = np.linspace(-1.0, 1.0, 4001)
    vals = _mollifier(grid)
    h = grid[1] - grid[0]
    for _ in range(n_deriv):
        vals = np.gradient(vals, h)
    # seminorm sup |f(u)-f(v)| / |u-v|^s_frac over grid pairs at dyadic lags
    best = 0.0
    for lag in (1, 2, 4, 8, 16, 64, 256, 1024, 2000, 4000):
        if lag >= len(grid):
            break
        num = np.abs(vals[lag:] - vals[:-lag])
        best = max(best, float(num.max()) / (lag * h) ** s_frac)
    return 1.05 * best


@dataclass(frozen=True)
class HolderFunction:
    """Realized bump-sum function on [0, 1]^d with its smoothness constant."""

    spec: HolderFunctionSpec
    signs: NDArray[np.int8]  # shape (d, m)
    holder_constant: float

    @property
    def m(self) -> int:
        return self.signs.shape[1]

    def _axis_value(self, axis: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
        m = self.m
        scale = self.spec.amplitude * m ** (-self.spec.s)
        cells = np.clip((x * m).astype(int), 0, m - 1)
        centers = (cells + 0.5) / m
        u = 2.0 * m * (x - centers)
        return scale * self.signs[axis, cells] * _mollifier(u)

    def __call__(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate at points of shape (n, d) (or (n,) when d == 1)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if self.spec.d == 1 else x[None, :]
        if x.shape[1] != self.spec.d:
            raise ValueError(f"expected {self.spec.d} columns, got {x.shape[1]}")
        total = np.zeros(x.shape[0])
        for axis in range(self.spec.d):
            total += self._axis_value(axis, x[:, axis])
        return total

    def mean_integral(self) -> float:
        """Integral of the function over the unit cube (exact)."""
        m = self.m
        scale = self.spec.amplitude * m ** (-self.spec.s)
        per_cell = MOLLIFIER_INTEGRAL / (2.0 * m)
        return float(sum(scale * per_cell * self.signs[a].sum() for a in range(self.spec.d)))

    def l2sq_integral(self) -> float:
        """Integral of the squared function over the unit cube (exact).

        For the additive d > 1 construction this expands the square into
        per-axis L2 norms plus products of per-axis means.
        """
        m = self.m
        scale = self.spec.amplitude * m ** (-self.spec.s)
        axis_sq = scale**2 * MOLLIFIER_SQ_INTEGRAL / 2.0  # per axis, summed over cells
        axis_mean = [
            scale * MOLLIFIER_INTEGRAL / (2.0 * m) * float(self.signs[a].sum())
            for a in range(self.spec.d)
        ]
        total = self.spec.d * axis_sq
        for a in range(self.spec.d):
            for b in range(self.spec.d):
                if a != b:
                    total += axis_mean[a] * axis_mean[b]
        return float(total)


def build_holder_function(spec: HolderFunctionSpec) -> HolderFunction:
    """Construct the bump-sum function for `spec`.

    The unit interval per axis is split into m = ceil(n_ref^{1/(2s+1)})
    cells; each cell carries one mollifier bump scaled by amplitude*m^{-s}
    with a seed-determined random sign. d > 1 sums d independent univariate
    constructions, one per coordinate, each Holder(s), so the sum is too.
    """
    m = spec.n_bumps
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, spec.d, m]))
    signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=(spec.d, m))

    # Per-bump constant: rescaling u = 2m(x - c) multiplies the Holder(s)
    # seminorm of the profile's top derivative by (2m)^s * m^{-s} = 2^s.
    # Adjacent opposite-sign bumps at most double the two-point ratio.
    n_deriv = int(math.floor(spec.s)) if spec.s != int(spec.s) else int(spec.s) - 1
    s_frac = spec.s - n_deriv
    profile_semi = _holder_seminorm_of_profile(s_frac, n_deriv)
    axis_L = 2.0 * spec.amplitude * 2.0**spec.s * profile_semi
    holder_constant = spec.d * axis_L

    return HolderFunction(spec=spec, signs=signs, holder_constant=holder_constant)


@dataclass(frozen=True)
class DgpSpec:
    """Which process data comes from, and its noise level.

    kind is "doppler" or "holder" for the built-in designs (A = Y, so the
    noise variance equals the true expected conditional covariance), or
    "external" for user data with no known structure (samplers and the
    known-density oracles refuse it).
    """

    kind: str
    noise_variance: float = 0.1
    holder: Optional[HolderFunctionSpec] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("doppler", "holder", "external"):
            raise ValueError(f"unknown dgp kind {self.kind!r}")
        if self.kind != "external" and self.noise_variance <= 0:
            raise ValueError("noise_variance must be positive")
        if self.kind == "holder" and self.holder is None:
            raise ValueError("holder kind requires a HolderFunctionSpec")

    @property
    def d(self) -> int:
        if self.kind == "external":
            raise ValueError("external data carries no dimension metadata")
        return 1 if self.kind == "doppler" else self.holder.d  # type: ignore[union-attr]

    def mean_function(self) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
        """The common nuisance function (pi = mu) of the design."""
        if self.kind == "external":
            raise ValueError("external data has no known mean function")
        if self.kind == "doppler":
            return lambda x: np.asarray(doppler(np.asarray(x, dtype=float).ravel()))
        return build_holder_function(self.holder)  # type: ignore[arg-type]

    def mean_l2sq(self) -> float:
        """Integral of the squared mean function over the covariate cube."""
        if self.kind == "external":
            raise ValueError("external data has no known mean function")
        if self.kind == "doppler":
            # smooth except near 0; composite quadrature on a fine grid
            from numpy.polynomial.legendre import leggauss

            nodes, weights = leggauss(32)
            total = 0.0
            edges = np.linspace(0.0, 1.0, 513)
            for lo, hi in zip(edges[:-1], edges[1:]):
                t = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
                total += 0.5 * (hi - lo) * float(np.sum(weights * doppler(t) ** 2))
            return total
        return build_holder_function(self.holder).l2sq_integral()  # type: ignore[arg-type]

    def sample(self, n: int, seed: Optional[int] = None) -> Dataset:
        if self.kind == "external":
            raise ValueError("external data cannot be sampled")
        if self.kind == "doppler":
            return gen_doppler_dataset(
                n, self.noise_variance, self.seed if seed is None else seed
            )
        return gen_holder_dataset(
            self.holder,  # type: ignore[arg-type]
            n,
            self.noise_variance,
            self.seed if seed is None else seed,
        )


def _check_gen_args(n: int, noise_variance: float) -> None:
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if noise_variance <= 0:
        raise ValueError(f"noise_variance must be positive, got {noise_variance}")


def gen_doppler_dataset(n: int, noise_variance: float, seed: int) -> Dataset:
    """Draw a Doppler-mean dataset with known conditional covariance.

    X ~ Uniform(0, 1) iid, A = Y = doppler(X) + eps with
    eps ~ Normal(0, noise_variance). Because A and Y share the same noise,
    the expected conditional covariance equals noise_variance exactly.

    Parameters
    ----------
    n : int
        Number of observations, at least 3 (three folds must be possible).
    noise_variance : float
        Variance of the shared noise; also the true functional value.
    seed : int
        Generator seed; equal seeds give bit-identical datasets.

    Returns
    -------
    Dataset
        n rows with metadata (kind, seed, noise_variance, psi_true, rng).
    """
    _check_gen_args(n, noise_variance)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=n)
    eps = rng.normal(0.0, math.sqrt(noise_variance), size=n)
    y = np.asarray(doppler(x)) + eps
    meta = {
        "kind": "doppler",
        "seed": int(seed),
        "noise_variance": float(noise_variance),
        "psi_true": float(noise_variance),
        "rng": RNG_NAME,
    }
    return Dataset(x[:, None], y.copy(), y, meta)


def gen_holder_dataset(
    spec: HolderFunctionSpec, n: int, noise_variance: float, seed: int
) -> Dataset:
    """X ~ U([0,1]^d), A = Y = g(X) + N(0, noise_variance) with g from `spec`."""
    _check_gen_args(n, noise_variance)
    g = build_holder_function(spec)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n, spec.d))
    eps = rng.normal(0.0, math.sqrt(noise_variance), size=n)
    y = g(x) + eps
    meta = {
        "kind": "holder",
        "seed": int(seed),
        "noise_variance": float(noise_variance),
        "psi_true": float(noise_variance),
        "s": float(spec.s),
        "d": int(spec.d),
        "n_ref": int(spec.n_ref),
        "amplitude": float(spec.amplitude),
        "function_seed": int(spec.seed),
        "n_bumps": int(g.m),
        "holder_constant": float(g.holder_constant),
        "rng": RNG_NAME,
    }
    return Dataset(x, y.copy(), y, meta)
