import math

import pytest

from condcov.bandwidths import (
    AdaptiveKnn10,
    FixedBandwidth,
    KnnLogN,
    MinimaxCda,
    MseOptimalCda,
    SuboptCda,
    UndersmoothedLpr,
    midpoint_eps,
    resolve_bandwidth,
)


def test_undersmoothed_lpr_value():
    # direct arithmetic: (1000 / log 1000)^{-1}
    want = math.log(1000.0) / 1000.0
    assert resolve_bandwidth(UndersmoothedLpr(), 1000, 1) == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(0.006907755, abs=1e-8)


def test_minimax_cda_value():
    want = 1000.0 ** (-2.0 / 2.4)
    got = resolve_bandwidth(MinimaxCda(alpha=0.35, beta=0.35), 1000, 1)
    assert got == pytest.approx(want, rel=1e-12)
    assert got == pytest.approx(0.0031623, rel=1e-4)


def test_knn_logn_at_exact_exponential():
    n = round(math.e**5)
    assert resolve_bandwidth(KnnLogN(), n, 1) == 5


def test_mse_optimal_rate():
    got = resolve_bandwidth(MseOptimalCda(s=0.6), 512, 1)
    assert got == pytest.approx(512.0 ** (-1.0 / 2.2), rel=1e-12)


def test_subopt_eps_validation():
    ok = SuboptCda(alpha=0.1, beta=0.1, eps=0.2)
    assert resolve_bandwidth(ok, 100, 1) == pytest.approx(100.0 ** (-2.2 / 1.4), rel=1e-12)
    with pytest.raises(ValueError):
        resolve_bandwidth(SuboptCda(alpha=0.1, beta=0.1, eps=0.9), 100, 1)
    with pytest.raises(ValueError):
        resolve_bandwidth(SuboptCda(alpha=0.1, beta=0.1, eps=0.0), 100, 1)


def test_midpoint_eps_is_admissible():
    for a, b, d in [(0.1, 0.1, 1), (0.6, 0.6, 4), (2.5, 2.5, 4)]:
        eps = midpoint_eps(a, b, d)
        assert 0 < eps < 4 * (a + b) / d


def test_monotone_decreasing_in_n():
    rules = [
        UndersmoothedLpr(),
        MinimaxCda(0.3, 0.4),
        SuboptCda(0.3, 0.4, 0.5),
        MseOptimalCda(0.5),
    ]
    ns = [100, 400, 1600, 6400]
    for rule in rules:
        hs = [resolve_bandwidth(rule, n, 2) for n in ns]
        assert all(a > b for a, b in zip(hs, hs[1:]))


def test_constant_scales_output():
    base = resolve_bandwidth(UndersmoothedLpr(c=1.0), 500, 1)
    assert resolve_bandwidth(UndersmoothedLpr(c=2.5), 500, 1) == pytest.approx(2.5 * base)


def test_adaptive_rule_not_resolvable():
    with pytest.raises(ValueError):
        resolve_bandwidth(AdaptiveKnn10(), 100, 1)


def test_fixed_validation():
    with pytest.raises(ValueError):
        FixedBandwidth(0.0)
    assert resolve_bandwidth(FixedBandwidth(0.2), 10, 3) == 0.2
