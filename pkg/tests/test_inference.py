import pytest
from scipy.stats import norm

from condcov.datagen import DgpSpec, HolderFunctionSpec
from condcov.inference import (
    CONDITIONAL_SLOW,
    ROOT_N,
    limiting_variance_oracle,
    normal_quantile,
    qq_points,
    standardize,
    wald_interval,
)
from condcov.kernels import box_indicator, epanechnikov


def test_wald_zero_variance_degenerate():
    lo, hi = wald_interval(0.7, 0.0, 50, 0.05)
    assert lo == hi == 0.7


def test_wald_frozen_values():
    lo, hi = wald_interval(0.0, 1.0, 100, 0.05)
    assert hi == pytest.approx(0.1959964, abs=1e-7)
    lo, hi = wald_interval(1.0, 4.0, 4, 0.32)
    assert hi - 1.0 == pytest.approx(0.9944579, abs=1e-7)
    assert 1.0 - lo == pytest.approx(0.9944579, abs=1e-7)


def test_wald_invalid_alpha():
    with pytest.raises(ValueError):
        wald_interval(0.0, 1.0, 10, 1.5)
    with pytest.raises(ValueError):
        wald_interval(0.0, 1.0, 10, 0.0)


def test_quantile_inverts_cdf():
    for x in (-3.0, -1.0, 0.0, 1.0, 3.0):
        assert abs(normal_quantile(norm.cdf(x)) - x) < 1e-9


def test_standardize_centered_is_zero():
    assert standardize(1.0, 1.0, 2.0, 10).value == 0.0


def test_standardize_arithmetic():
    st = standardize(1.1, 1.0, 4.0, 400)
    assert st.value == pytest.approx(1.0, rel=1e-12)
    assert st.scale == pytest.approx(0.1, rel=1e-12)


def test_standardize_scaling_law():
    a = standardize(1.3, 1.0, 1.0, 100).value
    b = standardize(1.3, 1.0, 4.0, 100).value
    assert abs(b) == pytest.approx(abs(a) / 2, rel=1e-12)


def test_standardize_modes_share_formula():
    a = standardize(1.2, 1.0, 2.0, 50, ROOT_N)
    b = standardize(1.2, 1.0, 2.0, 50, CONDITIONAL_SLOW)
    assert a.value == b.value
    assert b.mode == CONDITIONAL_SLOW
    with pytest.raises(ValueError):
        standardize(1.0, 0.0, 0.0, 10)


def test_qq_three_points():
    pts = qq_points([1.0, -1.0, 0.0])
    theo = [p[0] for p in pts]
    emp = [p[1] for p in pts]
    assert emp == [-1.0, 0.0, 1.0]
    assert theo[0] == pytest.approx(norm.ppf(1 / 6), abs=1e-12)
    assert theo[1] == 0.0
    assert theo[2] == pytest.approx(norm.ppf(5 / 6), abs=1e-12)


def test_qq_permutation_invariant_and_constant():
    a = qq_points([3.0, 1.0, 2.0, 0.5])
    b = qq_points([0.5, 2.0, 3.0, 1.0])
    assert a == b
    c = qq_points([2.0, 2.0, 2.0])
    assert all(p[1] == 2.0 for p in c)
    with pytest.raises(ValueError):
        qq_points([1.0])


def test_limiting_variance_zero_signal():
    # g = 0, sigma^2 = 10, int K^2 = 0.6: the constant is 10 * 10 * 0.6
    spec = HolderFunctionSpec(s=0.5, d=1, n_ref=100, amplitude=0.0)
    dgp = DgpSpec("holder", 10.0, holder=spec)
    got = limiting_variance_oracle(dgp, epanechnikov(1))
    assert got == pytest.approx(60.0, rel=1e-9)


def test_limiting_variance_linear_in_kernel_norm():
    spec = HolderFunctionSpec(s=0.5, d=1, n_ref=100, amplitude=0.0)
    dgp = DgpSpec("holder", 10.0, holder=spec)
    epan = limiting_variance_oracle(dgp, epanechnikov(1))
    box = limiting_variance_oracle(dgp, box_indicator(1))
    assert epan / box == pytest.approx(0.6 / 0.5, rel=1e-9)


def test_limiting_variance_shrinks_with_noise():
    spec = HolderFunctionSpec(s=0.5, d=1, n_ref=100, amplitude=0.0)
    big = limiting_variance_oracle(DgpSpec("holder", 10.0, holder=spec), epanechnikov(1))
    small = limiting_variance_oracle(DgpSpec("holder", 1e-6, holder=spec), epanechnikov(1))
    assert small == pytest.approx(0.0, abs=1e-9)
    assert big > small


def test_limiting_variance_role_validation():
    dgp = DgpSpec("doppler", 0.1)
    with pytest.raises(ValueError):
        limiting_variance_oracle(dgp, epanechnikov(1), which="nope")


def test_limiting_variance_external_unsupported():
    with pytest.raises(ValueError):
        limiting_variance_oracle(DgpSpec("external"), epanechnikov(1))
