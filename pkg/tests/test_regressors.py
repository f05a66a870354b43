import math

import numpy as np
import pytest
from sklearn.base import clone

from condcov.bandwidths import AdaptiveKnn10, FixedBandwidth, UndersmoothedLpr
from condcov.kernels import box_indicator, build_higher_order_kernel
from condcov.regressors import (
    CenteredForestRegressor,
    DensityAdaptedKernelRegressor,
    GlobalMeanRegressor,
    KnnRegressor,
    LocalPolynomialRegressor,
    OracleRegressor,
    lpr_basis_degree,
    monomial_exponents,
)

rng = np.random.default_rng(1234)


# --------------------------------------------------------------------- knn
def test_knn_k_equals_n_is_global_mean():
    X = rng.uniform(0, 1, (40, 1))
    y = rng.normal(size=40)
    m = KnnRegressor(k=40).fit(X, y)
    assert np.allclose(m.predict([[0.1], [0.9]]), y.mean())


def test_knn_k1_exact_match():
    X = np.array([[0.1], [0.4], [0.8]])
    y = np.array([1.0, 2.0, 3.0])
    m = KnnRegressor(k=1).fit(X, y)
    assert m.predict([[0.4]])[0] == 2.0


def test_knn_hand_placed_brute_force():
    # oracle: exhaustive distance sort
    X = np.array([[0.0], [0.2], [0.45], [0.7], [1.0]])
    y = np.array([5.0, -1.0, 2.0, 8.0, 0.5])
    q = np.array([[0.5]])
    dists = np.abs(X[:, 0] - 0.5)
    nearest_two = np.argsort(dists, kind="stable")[:2]
    want = y[nearest_two].mean()
    assert KnnRegressor(k=2).fit(X, y).predict(q)[0] == pytest.approx(want)


def test_knn_tie_breaks_to_lowest_index():
    X = np.array([[0.4], [0.6], [0.3]])  # 0.4 and 0.6 equidistant from 0.5
    y = np.array([10.0, 20.0, 99.0])
    m = KnnRegressor(k=1).fit(X, y)
    assert m.predict([[0.5]])[0] == 10.0


def test_knn_invalid_k():
    X = rng.uniform(0, 1, (5, 1))
    with pytest.raises(ValueError):
        KnnRegressor(k=6).fit(X, np.zeros(5))
    with pytest.raises(ValueError):
        KnnRegressor(k=0).fit(X, np.zeros(5))


def test_knn_bias_decay_rate():
    # sup-bias over a grid for a Lipschitz target decays like (n/k)^{-1}
    # in d=1; check the log-log slope within a factor-2 band
    truth = lambda x: np.sin(2 * np.pi * x)
    grid = np.linspace(0.2, 0.8, 13)[:, None]
    k = 5
    sup_bias = []
    ns = [200, 800, 3200]
    for n in ns:
        preds = np.zeros((60, len(grid)))
        for r in range(60):
            g = np.random.default_rng(1000 * n + r)
            X = g.uniform(0, 1, (n, 1))
            y = truth(X[:, 0])  # noiseless: bias isolated
            preds[r] = KnnRegressor(k=k).fit(X, y).predict(grid)
        sup_bias.append(np.abs(preds.mean(axis=0) - truth(grid[:, 0])).max())
    slope = np.polyfit(np.log(ns), np.log(sup_bias), 1)[0]
    assert -2.0 <= slope <= -0.5  # factor-2 band around -1


# ---------------------------------------------------------- local polynomial
def test_lpr_constant_reproduction():
    X = rng.uniform(0, 1, (80, 1))
    m = LocalPolynomialRegressor(bandwidth=FixedBandwidth(0.25)).fit(X, np.full(80, 3.3))
    assert m.predict([[0.5]])[0] == pytest.approx(3.3, abs=1e-10)


def test_lpr_linear_reproduction_against_wls_oracle():
    X = rng.uniform(0, 1, (60, 1))
    y = 3.0 * X[:, 0]
    q = 0.42
    h = 0.3
    m = LocalPolynomialRegressor(bandwidth=FixedBandwidth(h)).fit(X, y)
    got = m.predict([[q]])[0]
    assert got == pytest.approx(3.0 * q, abs=1e-8)
    # independent oracle: direct weighted least squares at q
    u = (X[:, 0] - q) / h
    w = np.where(np.abs(u) <= 1, 0.75 * (1 - u**2), 0.0)
    D = np.stack([np.ones_like(u), u], axis=1)
    beta = np.linalg.solve(D.T @ (w[:, None] * D), D.T @ (w * y))
    assert got == pytest.approx(beta[0], abs=1e-9)


@pytest.mark.parametrize("d", [1, 2])
def test_lpr_polynomial_reproduction_degree(d):
    n = 400 if d == 1 else 900
    X = np.random.default_rng(7 + d).uniform(0, 1, (n, d))
    deg = lpr_basis_degree(d)
    exps = monomial_exponents(d, deg)
    coef = np.arange(1, len(exps) + 1, dtype=float)
    y = sum(c * np.prod(X**e, axis=1) for c, e in zip(coef, exps))
    m = LocalPolynomialRegressor(bandwidth=FixedBandwidth(0.35)).fit(X, y)
    qs = np.random.default_rng(9).uniform(0.3, 0.7, (5, d))
    want = np.asarray([sum(c * np.prod(q**e) for c, e in zip(coef, exps)) for q in qs])
    assert np.allclose(m.predict(qs), want, atol=1e-8)


def test_lpr_empty_window_predicts_zero():
    X = rng.uniform(0, 1, (50, 1))
    y = rng.normal(size=50)
    m = LocalPolynomialRegressor(bandwidth=FixedBandwidth(1e-9)).fit(X, y)
    assert m.predict([[0.5]])[0] == 0.0


def test_lpr_adaptive_bandwidth_is_tenth_neighbor_distance():
    X = rng.uniform(0, 1, (100, 1))
    y = 2.0 - X[:, 0]
    q = np.array([[0.37]])
    h10 = np.sort(np.abs(X[:, 0] - q[0, 0]))[9]
    adaptive = LocalPolynomialRegressor(bandwidth=AdaptiveKnn10()).fit(X, y)
    fixed = LocalPolynomialRegressor(bandwidth=FixedBandwidth(h10)).fit(X, y)
    assert adaptive.predict(q)[0] == pytest.approx(fixed.predict(q)[0], abs=1e-12)


def test_lpr_basis_degree_rule():
    assert lpr_basis_degree(1) == 1
    assert lpr_basis_degree(2) == 2
    assert lpr_basis_degree(4) == 3
    assert len(monomial_exponents(1, 1)) == 2
    assert len(monomial_exponents(2, 2)) == 6
    assert len(monomial_exponents(4, 3)) == 35


def test_lpr_rate_rule_resolves_at_fit():
    X = rng.uniform(0, 1, (500, 1))
    m = LocalPolynomialRegressor(bandwidth=UndersmoothedLpr()).fit(X, np.zeros(500))
    assert m.h_ == pytest.approx(math.log(500) / 500)


# ---------------------------------------------------- density-adapted kernel
def test_cda_direct_sum_oracle():
    X = rng.uniform(0, 1, (120, 1))
    y = rng.normal(size=120)
    m = DensityAdaptedKernelRegressor(bandwidth=1.0, kernel=box_indicator(1)).fit(X, y)
    got = m.predict([[0.5]])[0]
    # direct summation of the defining formula
    u = (X[:, 0] - 0.5) / 1.0
    want = np.sum(np.where(np.abs(u) <= 1, 0.5, 0.0) * y) / (120 * 1.0 * 1.0)
    assert got == pytest.approx(want, abs=1e-12)
    assert got == pytest.approx(y.mean() / 2, abs=1e-12)  # every point in window


def test_cda_zero_response():
    X = rng.uniform(0, 1, (50, 2))
    m = DensityAdaptedKernelRegressor(bandwidth=0.4).fit(X, np.zeros(50))
    assert np.all(m.predict(rng.uniform(0, 1, (7, 2))) == 0.0)


def test_cda_expectation_matches_convolution_quadrature():
    # E[mu_hat(q)] = (1/h) int K((t-q)/h) mu(t) dt for f = 1; Monte Carlo
    # over 500 refits against Gauss-Legendre quadrature of the convolution
    mu = lambda t: np.sin(2 * np.pi * t)
    h, q, n = 0.2, 0.45, 300
    preds = np.empty(500)
    for r in range(500):
        g = np.random.default_rng(r)
        X = g.uniform(0, 1, (n, 1))
        y = mu(X[:, 0]) + g.normal(0, 0.3, n)
        preds[r] = DensityAdaptedKernelRegressor(bandwidth=h).fit(X, y).predict([[q]])[0]
    nodes, weights = np.polynomial.legendre.leggauss(80)
    t = q + h * nodes  # u-substitution over the kernel support
    want = float(np.sum(weights * 0.75 * (1 - nodes**2) * mu(t)))
    se = preds.std(ddof=1) / math.sqrt(500)
    assert abs(preds.mean() - want) <= 4 * se + 1e-9


def test_cda_polynomial_unbiasedness_as_h_shrinks():
    # response a polynomial of degree < kernel order, f = 1: the smoothing
    # bias vanishes as h -> 0 (3-sigma Monte Carlo bands per bandwidth)
    kern = build_higher_order_kernel(4, 1)
    poly = lambda t: 1.0 + 2.0 * t - 1.5 * t**2 + 0.5 * t**3
    q = 0.5
    biases = []
    for h in (0.4, 0.2, 0.1):
        preds = np.empty(300)
        for r in range(300):
            g = np.random.default_rng(10_000 + r)
            X = g.uniform(0, 1, (400, 1))
            y = poly(X[:, 0])
            m = DensityAdaptedKernelRegressor(bandwidth=h, kernel=kern).fit(X, y)
            preds[r] = m.predict([[q]])[0]
        se = preds.std(ddof=1) / math.sqrt(300)
        biases.append((abs(preds.mean() - poly(q)), se))
    # order-4 kernel annihilates the cubic exactly: every band covers zero
    for bias, se in biases:
        assert bias <= 3 * se + 1e-9


def test_cda_not_weighted_average_with_higher_order_kernel():
    kern = build_higher_order_kernel(4, 1)
    X = np.linspace(0.05, 0.95, 60)[:, None]
    y = np.ones(60)
    m = DensityAdaptedKernelRegressor(bandwidth=0.3, kernel=kern).fit(X, y)
    u = (X[:, 0] - 0.5) / 0.3
    from condcov.kernels import eval_kernel

    w = eval_kernel(kern, u) / (60 * 0.3)
    assert w.min() < 0  # negative weights exist
    assert m.predict([[0.5]])[0] == pytest.approx(w.sum(), abs=1e-12)


def test_cda_validation():
    X = rng.uniform(0, 1, (20, 1))
    with pytest.raises(ValueError):
        DensityAdaptedKernelRegressor(bandwidth=-0.1).fit(X, np.zeros(20))
    with pytest.raises(ValueError):
        DensityAdaptedKernelRegressor(
            bandwidth=0.2, density=lambda x: np.zeros(len(x))
        ).fit(X, np.zeros(20))


# ------------------------------------------------------------ centered forest
def test_forest_single_leaf_is_global_mean():
    X = rng.uniform(0, 1, (30, 1))
    y = rng.normal(size=30)
    m = CenteredForestRegressor(k_n=1, n_trees=4, seed=2).fit(X, y)
    assert np.allclose(m.predict([[0.1], [0.7]]), y.mean())


def test_forest_d1_kn2_hand_partition():
    X = np.array([[0.1], [0.3], [0.6], [0.9]])
    y = np.array([1.0, 3.0, 10.0, 20.0])
    m = CenteredForestRegressor(k_n=2, n_trees=6, seed=0).fit(X, y)
    assert m.predict([[0.2]])[0] == pytest.approx(2.0)  # mean of {1, 3}
    assert m.predict([[0.8]])[0] == pytest.approx(15.0)


def test_forest_leaf_volume_and_empty_leaf():
    # k_n = 4 in d=1: leaves are the four dyadic quarters (volume 2^-2)
    X = np.array([[0.1], [0.3], [0.6]])
    y = np.array([1.0, 3.0, 10.0])
    m = CenteredForestRegressor(k_n=4, n_trees=3, seed=1).fit(X, y)
    assert m.rounds_ == 2
    assert m.predict([[0.8]])[0] == 0.0  # empty leaf contributes zero


def test_forest_partition_independent_of_responses():
    X = rng.uniform(0, 1, (50, 2))
    y = rng.normal(size=50)
    m1 = CenteredForestRegressor(k_n=8, n_trees=10, seed=5).fit(X, y)
    m2 = CenteredForestRegressor(k_n=8, n_trees=10, seed=5).fit(X, np.random.default_rng(0).permutation(y))
    for a, b in zip(m1.features_, m2.features_):
        assert np.array_equal(a, b)


def test_forest_validation():
    X = rng.uniform(0, 1, (10, 1))
    with pytest.raises(ValueError):
        CenteredForestRegressor(k_n=0).fit(X, np.zeros(10))
    with pytest.raises(ValueError):
        CenteredForestRegressor(k_n=2, n_trees=0).fit(X, np.zeros(10))


# ----------------------------------------------------------------- generic
def test_fold_isolation():
    # perturbing responses outside the training fold leaves predictions
    # unchanged, for every regressor
    X = rng.uniform(0, 1, (90, 1))
    y = rng.normal(size=90)
    fold = np.arange(30)
    others = np.arange(30, 90)
    qs = rng.uniform(0, 1, (11, 1))
    specs = [
        KnnRegressor(k=5),
        LocalPolynomialRegressor(bandwidth=FixedBandwidth(0.2)),
        DensityAdaptedKernelRegressor(bandwidth=0.2),
        CenteredForestRegressor(k_n=4, n_trees=8, seed=3),
        GlobalMeanRegressor(),
    ]
    y_perturbed = y.copy()
    y_perturbed[others] += 100.0
    for spec in specs:
        a = clone(spec).fit(X[fold], y[fold]).predict(qs)
        b = clone(spec).fit(X[fold], y_perturbed[fold]).predict(qs)
        assert np.array_equal(a, b), type(spec).__name__


def test_prediction_determinism_and_finiteness():
    X = rng.uniform(0, 1, (60, 2))
    y = rng.normal(size=60)
    qs = rng.uniform(0, 1, (50, 2))
    for spec in (
        KnnRegressor(k=7),
        LocalPolynomialRegressor(bandwidth=FixedBandwidth(0.3)),
        DensityAdaptedKernelRegressor(bandwidth=0.25),
        CenteredForestRegressor(k_n=4, n_trees=5, seed=9),
    ):
        m = clone(spec).fit(X, y)
        p1, p2 = m.predict(qs), m.predict(qs)
        assert np.array_equal(p1, p2)
        assert np.isfinite(p1).all()


def test_oracle_regressor():
    m = OracleRegressor(fn=lambda X: X[:, 0] ** 2, offset=0.5).fit(None, None)
    assert m.predict([[2.0]])[0] == pytest.approx(4.5)
    z = OracleRegressor().fit(None, None)
    assert np.all(z.predict([[1.0], [2.0]]) == 0.0)


def test_dimension_mismatch_errors():
    X = rng.uniform(0, 1, (30, 2))
    y = np.zeros(30)
    for spec in (KnnRegressor(k=3), DensityAdaptedKernelRegressor(bandwidth=0.3)):
        m = clone(spec).fit(X, y)
        with pytest.raises(ValueError):
            m.predict(np.zeros((4, 3)))
