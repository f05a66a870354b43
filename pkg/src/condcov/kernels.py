"""Compactly supported kernels: Epanechnikov, box, and arbitrary even order.

All kernels live on [-1, 1]^d (zero outside), integrate to one, and have
finite squared L2 norm. Higher-order kernels are per-coordinate products of
a univariate polynomial built from orthonormal Legendre polynomials: the
degree-(order-1) truncation of the reproducing kernel at zero, which
annihilates moments 1..order-1. Orders above 2 necessarily take negative
values somewhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly
from numpy.typing import NDArray

GL_NODES = 64  # Gauss-Legendre nodes per dimension; exact for the
# polynomial integrands below (degree <= 127)
_gl_x, _gl_w = np.polynomial.legendre.leggauss(GL_NODES)

EPANECHNIKOV_L2_1D = 0.6  # int (3/4)^2 (1-u^2)^2 du on [-1,1]


def _sphere_surface(d: int) -> float:
    """Surface measure of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel plus the facts the estimators need about it.

    form is one of "epanechnikov" (ball support c_d(1-||x||^2)+),
    "product" (per-coordinate polynomial, coefficients in `coeffs`), or
    "box" (2^{-d} on the cube). `order` is the first non-vanishing moment.
    """

    form: str
    order: int
    dimension: int
    continuous: bool
    coeffs: Optional[Tuple[float, ...]] = None  # power-basis, univariate factor
    normalizer: float = 1.0  # c_d for the ball Epanechnikov
    sup_bound: float = field(default=1.0)
    l2_norm_sq: float = field(default=1.0)

    def __call__(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        return eval_kernel(self, u)

    def to_json(self) -> Dict:
        return {
            "form": self.form,
            "order": self.order,
            "dimension": self.dimension,
            "continuous": self.continuous,
            "coeffs": list(self.coeffs) if self.coeffs is not None else None,
            "normalizer": self.normalizer,
        }

    @staticmethod
    def from_json(obj: Dict) -> "KernelSpec":
        form = obj["form"]
        if form == "epanechnikov":
            return epanechnikov(obj["dimension"])
        if form == "box":
            return box_indicator(obj["dimension"])
        if form == "product":
            return build_higher_order_kernel(obj["order"], obj["dimension"])
        raise ValueError(f"unknown kernel form {form!r}")


def epanechnikov(d: int = 1) -> KernelSpec:
    """c_d (1 - ||x||^2) on the unit ball; order 2, continuous.

    c_1 = 3/4. For d > 1 the normalizer comes from the radial integral
    S_d * int_0^1 (1-r^2) r^{d-1} dr = S_d * 2/(d(d+2)).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    c_d = d * (d + 2) / (2.0 * _sphere_surface(d))
    # int K^2 = c_d^2 * S_d * int_0^1 (1-r^2)^2 r^{d-1} dr
    radial = 1.0 / d - 2.0 / (d + 2) + 1.0 / (d + 4)
    l2 = c_d**2 * _sphere_surface(d) * radial
    return KernelSpec(
        form="epanechnikov",
        order=2,
        dimension=d,
        continuous=True,
        normalizer=c_d,
        sup_bound=c_d,
        l2_norm_sq=l2,
    )


def box_indicator(d: int = 1) -> KernelSpec:
    """Uniform kernel 2^{-d} on [-1, 1]^d; order 2, discontinuous."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return KernelSpec(
        form="box",
        order=2,
        dimension=d,
        continuous=False,
        sup_bound=0.5**d,
        l2_norm_sq=0.25**d * 2.0**d,
    )


def build_higher_order_kernel(order: int, d: int = 1) -> KernelSpec:
    """Product kernel of the requested (even) moment order on [-1, 1]^d.

    The univariate factor is sum_{m even < order} phi_m(0) phi_m(u) with
    phi_m the orthonormal Legendre polynomials on [-1, 1]; its polynomial
    coefficients are stored on the spec. An odd request is promoted to the
    next even order (symmetric kernels have all odd moments zero, so the
    declared order must be even to be the first non-vanishing moment).
    """
    if order < 2:
        raise ValueError(f"kernel order must be >= 2, got {order}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if order % 2 == 1:
        order += 1
    leg_coeffs = np.zeros(order)
    l2_1d = 0.0
    for m in range(0, order, 2):
        basis = np.zeros(m + 1)
        basis[m] = 1.0
        phi_m_0 = npleg.legval(0.0, basis) * math.sqrt((2 * m + 1) / 2.0)
        leg_coeffs[m] = phi_m_0 * math.sqrt((2 * m + 1) / 2.0)
        l2_1d += phi_m_0**2  # orthonormality: int K^2 = sum phi_m(0)^2
    if order > 8:
        warnings.warn(
            f"order-{order} kernel has squared L2 norm {l2_1d:.3g}; "
            "variance constants degrade at high order",
            stacklevel=2,
        )
    poly = npleg.leg2poly(leg_coeffs)
    grid = np.linspace(-1.0, 1.0, 2001)
    sup_1d = float(np.abs(nppoly.polyval(grid, poly)).max())
    return KernelSpec(
        form="product",
        order=order,
        dimension=d,
        continuous=False,
        coeffs=tuple(float(c) for c in poly),
        sup_bound=sup_1d**d,
        l2_norm_sq=l2_1d**d,
    )


def eval_kernel(spec: KernelSpec, u: NDArray[np.float64]) -> NDArray[np.float64]:
    """K(u) for points of shape (n, d) or (n,) when d == 1; zero off-support."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    if u.ndim <= 1 and spec.dimension == 1:
        u = np.atleast_1d(u)[:, None]
    elif u.ndim == 1:
        u = u[None, :]
    if u.shape[1] != spec.dimension:
        raise ValueError(
            f"kernel is {spec.dimension}-dimensional, got points with {u.shape[1]} columns"
        )
    inside = (np.abs(u) <= 1.0).all(axis=1)
    out = np.zeros(u.shape[0])
    if spec.form == "epanechnikov":
        rsq = (u**2).sum(axis=1)
        out = np.where(rsq <= 1.0, spec.normalizer * (1.0 - rsq), 0.0)
    elif spec.form == "box":
        out = np.where(inside, 0.5**spec.dimension, 0.0)
    elif spec.form == "product":
        vals = nppoly.polyval(u, np.asarray(spec.coeffs))
        out = np.where(inside, vals.prod(axis=1), 0.0)
    else:
        raise ValueError(f"unknown kernel form {spec.form!r}")
    return float(out[0]) if scalar else out


def kernel_moment(spec: KernelSpec, j: int, axis: int = 0) -> float:
    """int u_axis^j K(u) du, exact via Gauss-Legendre (radial rule for the
    ball-support form, per-coordinate tensor rule otherwise)."""
    if spec.form == "epanechnikov":
        if j % 2 == 1:
            return 0.0
        d = spec.dimension
        if d == 1:
            vals = spec.normalizer * (1.0 - _gl_x**2)
            return float(np.sum(_gl_w * _gl_x**j * vals))
        # int x_1^j c_d (1 - r^2) over the ball: x_1^j averaged over the
        # sphere of radius r is r^j * E[w_1^j] with w uniform on S^{d-1}
        sphere_mom = math.gamma((j + 1) / 2.0) * math.gamma(d / 2.0) / (
            math.gamma((j + d) / 2.0) * math.gamma(0.5)
        )
        r = 0.5 * (_gl_x + 1.0)  # radial nodes on [0, 1]
        radial = float(np.sum(0.5 * _gl_w * r ** (j + d - 1) * (1.0 - r**2)))
        return spec.normalizer * _sphere_surface(d) * sphere_mom * radial
    if spec.form == "box":
        one_dim = float(np.sum(_gl_w * _gl_x**j * 0.5))
        return one_dim  # off-axis factors integrate to one
    if spec.form == "product":
        vals = nppoly.polyval(_gl_x, np.asarray(spec.coeffs))
        on_axis = float(np.sum(_gl_w * _gl_x**j * vals))
        return on_axis  # off-axis factors integrate to one by construction
    raise ValueError(f"unknown kernel form {spec.form!r}")


def kernel_integral(spec: KernelSpec) -> float:
    """int K(u) du over [-1, 1]^d."""
    if spec.form == "epanechnikov":
        if spec.dimension == 1:
            return float(np.sum(_gl_w * spec.normalizer * (1.0 - _gl_x**2)))
        r = 0.5 * (_gl_x + 1.0)
        radial = float(np.sum(0.5 * _gl_w * r ** (spec.dimension - 1) * (1.0 - r**2)))
        return spec.normalizer * _sphere_surface(spec.dimension) * radial
    if spec.form == "box":
        return 1.0
    if spec.form == "product":
        vals = nppoly.polyval(_gl_x, np.asarray(spec.coeffs))
        return float(np.sum(_gl_w * vals)) ** spec.dimension
    raise ValueError(f"unknown kernel form {spec.form!r}")


def kernel_l2_norm_sq(spec: KernelSpec) -> float:
    """int K(u)^2 du over the support."""
    return spec.l2_norm_sq


def kernel_abs_moment(spec: KernelSpec, p: float) -> float:
    """int ||u||^p |K(u)| du, via the radial rule (ball) or a fine composite
    per-coordinate grid (product forms; |K| is only piecewise polynomial)."""
    d = spec.dimension
    if spec.form == "epanechnikov":
        r = 0.5 * (_gl_x + 1.0)
        radial = float(np.sum(0.5 * _gl_w * r ** (p + d - 1) * (1.0 - r**2)))
        return spec.normalizer * _sphere_surface(d) * radial
    # Monte Carlo-free composite midpoint grid; integrand bounded, d <= 4
    pts = 2049 if d == 1 else 65
    grid = np.linspace(-1.0, 1.0, pts)
    mids = 0.5 * (grid[:-1] + grid[1:])
    cell = (grid[1] - grid[0]) ** d
    mesh = np.stack(np.meshgrid(*([mids] * d), indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.abs(eval_kernel(spec, mesh)) * np.linalg.norm(mesh, axis=1) ** p
    return float(vals.sum() * cell)
