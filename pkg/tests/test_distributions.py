import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridppp.distributions import (
    DistanceLaw,
    area_fraction_grid,
    area_fraction_ppp,
    grid_nearest_cdf,
    grid_nearest_pdf,
    grid_nearest_sf_normalized,
    ppp_nearest_cdf,
    ppp_nearest_pdf,
    superposition_nearest_cdf,
    superposition_nearest_pdf,
)
from gridppp.quadrature import integrate


def _cdf_by_area(r, s, n=2001):
    # midpoint-rule area of the disc inside the cell, an independent oracle
    x = (np.arange(n) + 0.5) / n * s - s / 2
    X, Y = np.meshgrid(x, x)
    return np.mean(X**2 + Y**2 <= r * r)


@pytest.mark.parametrize("r", [0.1, 0.45, 0.5, 0.55, 0.65, 0.7])
def test_grid_cdf_matches_pixel_area(r):
    assert grid_nearest_cdf(r, 1.0) == pytest.approx(_cdf_by_area(r, 1.0), abs=2e-3)


def test_grid_cdf_branches_continuous():
    s = 2.0
    for r0 in (s / 2, s / math.sqrt(2)):
        lo, hi = grid_nearest_cdf(r0 - 1e-9, s), grid_nearest_cdf(r0 + 1e-9, s)
        assert abs(hi - lo) < 1e-7
    assert grid_nearest_cdf(s / 2, s) == pytest.approx(math.pi / 4)
    assert grid_nearest_cdf(s, s) == 1.0
    assert grid_nearest_cdf(0.0, s) == 0.0


def test_grid_pdf_normalised():
    v, _ = integrate(lambda r: grid_nearest_pdf(r, 1.3), 0, 1.3 / math.sqrt(2), breakpoints=(0.65,))
    assert v == pytest.approx(1.0, abs=1e-9)


def test_grid_pdf_is_derivative():
    r = np.linspace(0.02, 0.69, 200)
    h = 1e-6
    num = (grid_nearest_cdf(r + h, 1.0) - grid_nearest_cdf(r - h, 1.0)) / (2 * h)
    mask = np.abs(r - 0.5) > 2 * h
    assert np.max(np.abs(num - grid_nearest_pdf(r, 1.0))[mask]) < 1e-6


def test_normalised_survival_middle_branch():
    x = 1.2
    ref = 1 - math.pi * x * x / 4 + x * x * math.acos(1 / x) - math.sqrt(x * x - 1)
    assert grid_nearest_sf_normalized(x) == pytest.approx(ref, abs=1e-15)


def test_ppp_laws():
    assert ppp_nearest_cdf(1.0, 1.0) == pytest.approx(1 - math.exp(-math.pi))
    v, _ = integrate(lambda r: ppp_nearest_pdf(r, 2.0), 0, 5)
    assert v == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.2, 3.0), st.floats(0.05, 5.0))
def test_superposition_is_product_of_survivals(r, s, lam):
    sf = (1 - grid_nearest_cdf(r, s)) * (1 - ppp_nearest_cdf(r, lam))
    assert superposition_nearest_cdf(r, s, lam) == pytest.approx(1 - sf, abs=1e-14)


def test_superposition_pdf_normalised():
    v, _ = integrate(lambda r: superposition_nearest_pdf(r, 1.0, 0.7), 0, 1 / math.sqrt(2),
                     breakpoints=(0.5,))
    tail = 1 - superposition_nearest_cdf(1 / math.sqrt(2), 1.0, 0.7)
    assert v + tail == pytest.approx(1.0, abs=1e-9)


def test_superposition_grid_disabled():
    assert superposition_nearest_cdf(0.4, None, 2.0) == pytest.approx(ppp_nearest_cdf(0.4, 2.0))
    with pytest.raises(ValueError):
        superposition_nearest_cdf(0.4, None, 0.0)


def test_distance_law_dispatch():
    law = DistanceLaw("superposition", 1.0, 1.0)
    assert law.cdf(0.3) == superposition_nearest_cdf(0.3, 1.0, 1.0)
    with pytest.raises(ValueError):
        DistanceLaw("grid", None, 0)


@pytest.mark.parametrize("rl", [0.1, 0.5, 1.0, 2.0, 8.0])
def test_area_fraction_matches_gaussian_closed_form(rl):
    # E[exp(-pi rho |U|^2)] over the unit cell equals erf(sqrt(pi rho)/2)^2 / rho
    ref = math.erf(math.sqrt(math.pi * rl) / 2) ** 2 / rl
    assert area_fraction_grid(rl) == pytest.approx(ref, abs=1e-9)
    assert area_fraction_ppp(rl) + area_fraction_grid(rl) == pytest.approx(1.0)
