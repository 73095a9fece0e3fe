"""Nearest-distance laws of the grid, the PPP and their superposition.

The grid CDF is the area fraction of the central cell ``[-s/2, s/2]^2``
covered by the disc of radius ``r``.  Between ``s/2`` and ``s/sqrt(2)`` the
disc sticks out through all four sides, so four circular segments are cut
off; this is the branch whose derivative is the familiar
``2 pi r / s^2 - (8 r / s^2) arccos(s / 2r)`` density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureSpec, integrate

__all__ = [
    "DistanceLaw",
    "grid_nearest_cdf",
    "grid_nearest_pdf",
    "grid_nearest_sf_normalized",
    "ppp_nearest_cdf",
    "ppp_nearest_pdf",
    "superposition_nearest_cdf",
    "superposition_nearest_pdf",
    "square_minus_disc_area",
    "area_fraction_ppp",
    "area_fraction_grid",
]

SQRT2 = math.sqrt(2.0)


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def square_minus_disc_area(a):
    """Area of ``[-1/2, 1/2]^2`` minus the disc of radius ``a`` (unit square)."""
    a = np.asarray(a, dtype=float)
    a_safe = np.where(a > 0.5, a, 1.0)
    mid = (
        1.0
        - math.pi * a_safe**2
        + 4 * a_safe**2 * np.arccos(0.5 / a_safe)
        - np.sqrt(np.maximum(4 * a_safe**2 - 1, 0.0))
    )
    out = np.where(a <= 0.5, 1.0 - math.pi * np.maximum(a, 0.0) ** 2, mid)
    out = np.where(a >= 1 / SQRT2, 0.0, out)
    return np.clip(out, 0.0, 1.0)


def grid_nearest_cdf(r, s):
    """CDF of the distance from the origin to the nearest shifted-grid point."""
    if s <= 0:
        raise ValueError("grid spacing must be positive")
    r_arr = np.asarray(r, dtype=float)
    out = 1.0 - square_minus_disc_area(r_arr / s)
    out = np.where(r_arr <= 0, 0.0, out)
    return _out(out, r)


def grid_nearest_sf_normalized(x):
    """``P(R_g > x s / 2)`` in the doubled-radius variable used by the association integral.

    For ``1 < x <= sqrt 2`` this is ``1 - pi x^2/4 + x^2 arccos(1/x) - sqrt(x^2 - 1)``.
    """
    x = np.asarray(x, dtype=float)
    return _out(square_minus_disc_area(x / 2.0), x)


def grid_nearest_pdf(r, s):
    if s <= 0:
        raise ValueError("grid spacing must be positive")
    r_arr = np.asarray(r, dtype=float)
    rs = np.where(r_arr > s / 2, r_arr, s)
    base = 2 * math.pi * r_arr / s**2
    mid = base - 8 * r_arr / s**2 * np.arccos(s / (2 * rs))
    out = np.where(r_arr <= s / 2, base, mid)
    out = np.where((r_arr < 0) | (r_arr > s / SQRT2), 0.0, out)
    return _out(out, r)


def ppp_nearest_cdf(r, lambda_p):
    if lambda_p < 0:
        raise ValueError("intensity must be non-negative")
    r_arr = np.maximum(np.asarray(r, dtype=float), 0.0)
    return _out(-np.expm1(-math.pi * lambda_p * r_arr**2), r)


def ppp_nearest_pdf(r, lambda_p):
    if lambda_p < 0:
        raise ValueError("intensity must be non-negative")
    r_arr = np.asarray(r, dtype=float)
    out = np.where(r_arr < 0, 0.0, 2 * math.pi * lambda_p * r_arr * np.exp(-math.pi * lambda_p * r_arr**2))
    return _out(out, r)


def _check_components(s, lambda_p):
    if s is None and not lambda_p:
        raise ValueError("at least one component (grid or PPP) must be active")


def superposition_nearest_cdf(r, s, lambda_p):
    """CDF of the distance to the nearest point of grid ∪ PPP.

    ``s=None`` disables the grid.
    """
    _check_components(s, lambda_p)
    r_arr = np.asarray(r, dtype=float)
    sg = 1.0 - (grid_nearest_cdf(r_arr, s) if s is not None else 0.0)
    sp = 1.0 - ppp_nearest_cdf(r_arr, lambda_p)
    return _out(1.0 - sg * sp, r)


def superposition_nearest_pdf(r, s, lambda_p):
    _check_components(s, lambda_p)
    r_arr = np.asarray(r, dtype=float)
    if s is None:
        return _out(ppp_nearest_pdf(r_arr, lambda_p), r)
    sg = 1.0 - grid_nearest_cdf(r_arr, s)
    sp = 1.0 - ppp_nearest_cdf(r_arr, lambda_p)
    out = grid_nearest_pdf(r_arr, s) * sp + ppp_nearest_pdf(r_arr, lambda_p) * sg
    return _out(out, r)


@dataclass(frozen=True)
class DistanceLaw:
    """Nearest-distance law: ``kind`` is ``"grid"``, ``"ppp"`` or ``"superposition"``."""

    kind: str
    s: float | None = None
    lambda_p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("grid", "ppp", "superposition"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind in ("grid", "superposition") and not (self.s and self.s > 0):
            raise ValueError("grid spacing must be positive")
        if self.kind in ("ppp", "superposition") and not self.lambda_p > 0:
            raise ValueError("PPP intensity must be positive")

    def cdf(self, r):
        if self.kind == "grid":
            return grid_nearest_cdf(r, self.s)
        if self.kind == "ppp":
            return ppp_nearest_cdf(r, self.lambda_p)
        return superposition_nearest_cdf(r, self.s, self.lambda_p)

    def pdf(self, r):
        if self.kind == "grid":
            return grid_nearest_pdf(r, self.s)
        if self.kind == "ppp":
            return ppp_nearest_pdf(r, self.lambda_p)
        return superposition_nearest_pdf(r, self.s, self.lambda_p)


def area_fraction_ppp(rho_lambda, quad: QuadratureSpec | None = None) -> float:
    """Mean share of the plane covered by Voronoi cells of PPP points.

    ``E[1{R_g > R_p}]`` written in the doubled-radius variable ``x``:
    ``int_0^sqrt2 P(R_g > x s/2) f(x) dx`` with
    ``f(x) = 2 pi (rho/4) x exp(-pi (rho/4) x^2)``.
    """
    if not rho_lambda > 0:
        raise ValueError("rho_lambda must be positive")
    return _association_integral(rho_lambda, quad)


def area_fraction_grid(rho_lambda, quad: QuadratureSpec | None = None) -> float:
    return 1.0 - area_fraction_ppp(rho_lambda, quad)


def _association_integral(rho, quad):
    quad = quad or QuadratureSpec()
    k = math.pi * rho / 4.0

    def integrand(x):
        return grid_nearest_sf_normalized(x) * 2 * k * x * np.exp(-k * x * x)

    val, _ = integrate(integrand, 0.0, SQRT2, breakpoints=(1.0,), spec=quad)
    return val
