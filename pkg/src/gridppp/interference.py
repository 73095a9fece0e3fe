"""Laplace transforms of the interference seen by the typical user.

Two sources interfere: the PPP outside an exclusion disc, and the shifted
grid.  Grid quantities are computed in grid-normalised coordinates, where a
station at offset ``u + s z`` contributes ``c |u/s + z|^-alpha`` with
``c = xi p_g s^-alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from . import lattice
from .distributions import square_minus_disc_area
from .quadrature import DEFAULT_QUAD, QuadratureSpec, cubature

__all__ = [
    "LatticeWindow",
    "LaplaceValue",
    "laplace_ppp_excl",
    "laplace_grid_given_grid_assoc",
    "laplace_grid_excl",
    "laplace_grid_bounds_assoc",
    "laplace_grid_bounds_excl",
    "psi_tail",
    "ppp_interference_factor",
    "log_interference_integral",
    "lattice_product",
    "region_integral",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LatticeWindow:
    """Square window ``|z|_inf <= n`` of lattice offsets.

    ``n=None`` lets pointwise operations grow the window (doubling, up to
    ``max_n``) until the certified tail bound drops below ``target``.  Region
    integrals use ``default_n`` instead, since a huge window on every
    quadrature node is unaffordable.  ``n=0`` keeps only the central cell.
    """

    n: int | None = None
    target: float = 1e-8
    max_n: int = 512
    default_n: int = 12

    def __post_init__(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 0):
            raise ValueError("window size n must be a non-negative integer")
        if self.max_n < 1 or self.default_n < 1:
            raise ValueError("max_n and default_n must be >= 1")

    def resolve(self, c: float, alpha: float) -> int:
        """Window size for a pointwise product with coupling ``c``."""
        if self.n is not None:
            return int(self.n)
        n = 8
        while n < self.max_n and -math.expm1(-c * lattice.ring_bound(n, alpha)) > self.target:
            n *= 2
        return min(n, self.max_n)

    def for_regions(self) -> int:
        return int(self.n) if self.n is not None else self.default_n


@dataclass(frozen=True)
class LaplaceValue:
    value: float
    truncation_error_bound: float = 0.0
    quad_error: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0 + 1e-12):
            raise ValueError(f"Laplace value {self.value} outside [0, 1]")
        if self.truncation_error_bound < 0:
            raise ValueError("error bound must be non-negative")


def _check_alpha(alpha):
    if not alpha > 2:
        raise ValueError("alpha must exceed 2")


# ---------------------------------------------------------------------------
# PPP interference


def laplace_ppp_excl(xi, r_excl, lambda_p, p_p, alpha, r_outer=math.inf, quad: QuadratureSpec | None = None):
    """``E exp(-xi I)`` for a PPP with Rayleigh fading outside ``B(0, r_excl)``.

    ``r_outer`` truncates the interferer field to an annulus, which is what a
    finite simulation window sees.
    """
    _check_alpha(alpha)
    if xi < 0 or r_excl < 0 or lambda_p < 0 or p_p <= 0:
        raise ValueError("need xi >= 0, r_excl >= 0, lambda_p >= 0, p_p > 0")
    if xi == 0 or lambda_p == 0 or r_outer <= r_excl:
        return LaplaceValue(1.0)
    quad = quad or DEFAULT_QUAD
    k = p_p * xi

    def integrand(u):
        return k * u / (u**alpha + k)

    val, err = sp_integrate.quad(integrand, r_excl, r_outer, epsabs=quad.abs_tol * 1e-2,
                                 epsrel=quad.rel_tol, limit=200)
    expo = 2 * math.pi * lambda_p * val
    return LaplaceValue(math.exp(-expo), 0.0, math.exp(-expo) * 2 * math.pi * lambda_p * err)


def psi_tail(x, alpha):
    """``int_x^inf dy / (1 + y^(alpha/2))`` for ``x >= 0``."""
    p = alpha / 2.0
    x = np.asarray(x, dtype=float)
    full = (math.pi / p) / math.sin(math.pi / p)
    xs = np.where(x > 1, 1.0, x)
    xl = np.where(x > 1, x, 2.0)
    small = full - xs * special.hyp2f1(1.0, 1.0 / p, 1.0 + 1.0 / p, -xs**p)
    b = (p - 1.0) / p
    large = xl ** (1.0 - p) / (p - 1.0) * special.hyp2f1(1.0, b, 1.0 + b, -xl ** (-p))
    out = np.where(x > 1, large, small)
    return float(out) if out.ndim == 0 else out


def ppp_interference_factor(t, alpha):
    """``F(T) = T^(2/alpha) int_{T^(-2/alpha)}^inf dy / (1 + y^(alpha/2))``.

    A PPP of intensity ``lambda`` beyond the serving distance ``r`` gives the
    Laplace factor ``exp(-pi lambda r^2 F(T))``.
    """
    _check_alpha(alpha)
    if t <= 0:
        return 0.0
    d = 2.0 / alpha
    return t**d * psi_tail(t ** (-d), alpha)


def log_interference_integral(c, a, alpha):
    """``int_a^inf v log(1 + c v^-alpha) dv`` in closed form."""
    _check_alpha(alpha)
    if c <= 0:
        return 0.0
    d = 2.0 / alpha
    cd = c**d
    out = alpha / 4.0 * cd * psi_tail(a * a / cd, alpha)
    if a > 0:
        out -= 0.5 * a * a * math.log1p(c * a ** (-alpha))
    return out


# ---------------------------------------------------------------------------
# Grid interference


def lattice_product(c, ux, uy, alpha, n, include_origin, mode="truncated"):
    """Lattice Laplace product in normalised coordinates with an error bound.

    ``mode``:
      * ``"truncated"``: product over the window; the full product lies in
        ``[value - bound, value]``.
      * ``"corrected"``: window times the estimated tail factor; the full
        product lies within ``bound`` of ``value``.
      * ``"lower"``: ``exp(-sum c |u+z|^-alpha)`` over the full lattice with the
        tail replaced by its certified upper bound; a certified lower bound on
        the product (bound is 0).
    """
    c = np.atleast_1d(np.asarray(c, float))
    if mode == "lower":
        s = lattice.window_logsum(c, ux, uy, alpha, n, include_origin, linear=True)
        return np.exp(-(s + c * lattice.ring_bound(n, alpha))), np.zeros_like(s)
    window, est, res, bound = lattice.log_laplace(c, ux, uy, alpha, n, include_origin)
    if mode == "truncated":
        v = np.exp(-window)
        return v, -v * np.expm1(-bound)
    if mode == "corrected":
        v = np.exp(-(window + est))
        return v, v * np.expm1(res)
    raise ValueError(f"unknown mode {mode!r}")


def region_integral(fun, a, spec: QuadratureSpec = DEFAULT_QUAD, ncomp=1, strict=True):
    """Integrate ``fun(ux, uy)`` over ``[-1/2, 1/2]^2`` minus ``B(0, a)``.

    ``fun`` must be invariant under the symmetries of the square; the region
    is folded onto the polar lobe ``theta in [theta0, pi/4]``,
    ``r in [a, sec(theta)/2]`` and the result multiplied by 8.  Past ``a = 1/2``
    the disc crosses the edges and ``theta0 = arccos(1/(2a))``.
    """
    if a < 0:
        raise ValueError("exclusion radius must be non-negative")
    if a >= 1 / SQRT2:
        return (0.0 if ncomp == 1 else np.zeros(ncomp)), 0.0
    theta0 = math.acos(0.5 / a) if a > 0.5 else 0.0

    def g(theta, t):
        hi = 0.5 / np.cos(theta)
        r = a + (hi - a) * t
        jac = r * (hi - a)
        vals = np.asarray(fun(r * np.cos(theta), r * np.sin(theta)), dtype=float)
        return vals * jac

    sub = QuadratureSpec(spec.abs_tol / 8, spec.rel_tol, spec.max_depth)
    val, err = cubature(g, theta0, math.pi / 4, 0.0, 1.0, spec=sub, strict=strict, ncomp=ncomp)
    return val * 8, err * 8


def _grid_c(xi, s, p_g, alpha):
    if xi < 0:
        raise ValueError("xi must be non-negative")
    if s <= 0 or p_g <= 0:
        raise ValueError("s and p_g must be positive")
    _check_alpha(alpha)
    return xi * p_g * s ** (-alpha)


def _check_in_cell(u, s):
    ux, uy = float(u[0]) / s, float(u[1]) / s
    if abs(ux) > 0.5 + 1e-12 or abs(uy) > 0.5 + 1e-12:
        raise ValueError("u must lie in the central cell [-s/2, s/2]^2")
    return ux, uy


def laplace_grid_given_grid_assoc(xi, u, s, p_g, alpha, win: LatticeWindow | None = None):
    """Grid interference Laplace transform when the user is served by the grid station at ``u``.

    Product over all other grid stations, truncated to the window; the
    reported bound covers the omitted factors.
    """
    c = _grid_c(xi, s, p_g, alpha)
    ux, uy = _check_in_cell(u, s)
    if c == 0:
        return LaplaceValue(1.0)
    win = win or LatticeWindow()
    n = win.resolve(c, alpha)
    v, b = lattice_product(c, ux, uy, alpha, n, include_origin=False)
    return LaplaceValue(float(v[0]), float(b[0]), 0.0, {"n": n})


def _excl_setup(xi, r_excl, s, p_g, alpha):
    c = _grid_c(xi, s, p_g, alpha)
    if r_excl < 0:
        raise ValueError("r_excl must be non-negative")
    a = r_excl / s
    if a >= 1 / SQRT2:
        raise ValueError("exclusion disc covers the whole cell: conditioning event is empty")
    return c, a, float(square_minus_disc_area(a))


def laplace_grid_excl(xi, r_excl, s, p_g, alpha, win: LatticeWindow | None = None,
                      quad: QuadratureSpec | None = None, mode="truncated"):
    """Grid interference Laplace transform with the shift uniform on the cell minus ``B(0, r_excl)``.

    Every grid station interferes (the user is served by the PPP).
    """
    c, a, area = _excl_setup(xi, r_excl, s, p_g, alpha)
    if c == 0:
        return LaplaceValue(1.0)
    win = win or LatticeWindow()
    quad = quad or QuadratureSpec(abs_tol=1e-7)
    n = win.for_regions()

    def fun(ux, uy):
        v, b = lattice_product(c, ux, uy, alpha, n, include_origin=True, mode=mode)
        return np.vstack([v, b])

    (val, bnd), err = region_integral(fun, a, quad, ncomp=2)
    return LaplaceValue(min(float(val) / area, 1.0), float(bnd) / area, err / area, {"n": n, "area": area})


def laplace_grid_bounds_assoc(xi, u, s, p_g, alpha, win: LatticeWindow | None = None):
    """``(lower, upper)``: full-lattice Jensen-type bound and the windowed product."""
    c = _grid_c(xi, s, p_g, alpha)
    ux, uy = _check_in_cell(u, s)
    if c == 0:
        return LaplaceValue(1.0), LaplaceValue(1.0)
    n = (win or LatticeWindow(n=1)).n
    n = 1 if n is None else int(n)
    lo, _ = lattice_product(c, ux, uy, alpha, n, include_origin=False, mode="lower")
    up, _ = lattice_product(c, ux, uy, alpha, n, include_origin=False)
    return LaplaceValue(float(lo[0])), LaplaceValue(float(up[0]), 0.0, 0.0, {"n": n})


def laplace_grid_bounds_excl(xi, r_excl, s, p_g, alpha, win: LatticeWindow | None = None,
                             quad: QuadratureSpec | None = None):
    """``(lower, upper)`` for :func:`laplace_grid_excl`.

    The lower bound applies Jensen's inequality to the log of the product and
    evaluates the mean log-sum with Campbell's formula over the plane outside
    ``B(0, r_excl)``; the upper bound is the windowed product integral.
    """
    c, a, area = _excl_setup(xi, r_excl, s, p_g, alpha)
    if c == 0:
        return LaplaceValue(1.0), LaplaceValue(1.0)
    j = log_interference_integral(c, a, alpha)
    lower = LaplaceValue(math.exp(-2 * math.pi * j / area), 0.0, 0.0, {"J": j})
    n = (win or LatticeWindow(n=1)).n
    upper = laplace_grid_excl(xi, r_excl, s, p_g, alpha, LatticeWindow(n=1 if n is None else n), quad)
    return lower, upper
