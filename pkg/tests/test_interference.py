import math

import numpy as np
import pytest

from gridppp.interference import (
    LatticeWindow,
    laplace_grid_bounds_assoc,
    laplace_grid_bounds_excl,
    laplace_grid_excl,
    laplace_grid_given_grid_assoc,
    laplace_ppp_excl,
    log_interference_integral,
    ppp_interference_factor,
    region_integral,
)
from gridppp.distributions import square_minus_disc_area


def test_ppp_trivial_cases():
    assert laplace_ppp_excl(0.0, 1.0, 1.0, 1.0, 4).value == 1.0
    assert laplace_ppp_excl(1.0, 1.0, 0.0, 1.0, 4).value == 1.0


@pytest.mark.parametrize("k,r", [(1.0, 1.0), (3.0, 0.5), (0.2, 2.0)])
def test_ppp_alpha4_arctan_closed_form(k, r):
    # int_r^inf k u/(u^4 + k) du = sqrt(k)/2 (pi/2 - arctan(r^2/sqrt(k)))
    ref = math.exp(-2 * math.pi * 1.3 * math.sqrt(k) / 2 * (math.pi / 2 - math.atan(r * r / math.sqrt(k))))
    assert laplace_ppp_excl(k, r, 1.3, 1.0, 4).value == pytest.approx(ref, abs=1e-9)


def test_ppp_monotone():
    xs = [laplace_ppp_excl(x, 1.0, 1.0, 1.0, 3.5).value for x in (0.1, 0.5, 1, 2, 5)]
    assert np.all(np.diff(xs) < 0)
    rs = [laplace_ppp_excl(1.0, r, 1.0, 1.0, 3.5).value for r in (0.2, 0.5, 1, 2)]
    assert np.all(np.diff(rs) > 0)


def test_ppp_monte_carlo():
    rng = np.random.default_rng(7)
    r0, r1, lam, n = 1.0, 6.0, 1.0, 20000
    area = math.pi * (r1 * r1 - r0 * r0)
    vals = np.empty(n)
    for i in range(n):
        k = rng.poisson(lam * area)
        rad = np.sqrt(rng.uniform(r0 * r0, r1 * r1, k))
        vals[i] = math.exp(-np.sum(rng.exponential(size=k) * rad ** -4.0))
    ref = laplace_ppp_excl(1.0, r0, lam, 1.0, 4, r_outer=r1).value
    se = vals.std() / math.sqrt(n)
    assert abs(vals.mean() - ref) < 3 * se


def test_interference_factor_alpha4():
    for t in (0.1, 1.0, 10.0):
        ref = math.sqrt(t) * (math.pi / 2 - math.atan(1 / math.sqrt(t)))
        assert ppp_interference_factor(t, 4) == pytest.approx(ref, abs=1e-13)


@pytest.mark.parametrize("c,a,alpha", [(1.0, 0.3, 4), (5.0, 0.0, 4), (0.2, 0.6, 3), (2.0, 0.1, 5.5)])
def test_log_interference_integral(c, a, alpha):
    from scipy.integrate import quad

    ref = quad(lambda v: v * math.log1p(c * v ** -alpha), a, np.inf, limit=200)[0]
    assert log_interference_integral(c, a, alpha) == pytest.approx(ref, rel=1e-8)


def test_grid_assoc_trivial():
    for n in (1, 5, 20):
        assert laplace_grid_given_grid_assoc(0.0, (0.1, 0.2), 1.0, 1.0, 4, LatticeWindow(n)).value == 1.0


def test_grid_assoc_origin_product():
    k = np.arange(-50, 51)
    X, Y = np.meshgrid(k, k)
    d2 = (X**2 + Y**2).astype(float)
    d2 = d2[d2 > 0]
    ref = np.prod(1 / (1 + d2**-2))
    v50 = laplace_grid_given_grid_assoc(1.0, (0, 0), 1.0, 1.0, 4, LatticeWindow(50))
    v100 = laplace_grid_given_grid_assoc(1.0, (0, 0), 1.0, 1.0, 4, LatticeWindow(100))
    assert v50.value == pytest.approx(ref, rel=1e-12)
    assert abs(v50.value - v100.value) <= v50.truncation_error_bound
    assert v100.value <= v50.value


@pytest.mark.parametrize("u", [(0.0, 0.0), (0.25, -0.1), (0.5, 0.5)])
@pytest.mark.parametrize("n", [4, 16])
def test_grid_truncation_self_consistency(u, n):
    a = laplace_grid_given_grid_assoc(0.7, u, 1.0, 1.0, 3.5, LatticeWindow(n))
    b = laplace_grid_given_grid_assoc(0.7, u, 1.0, 1.0, 3.5, LatticeWindow(2 * n))
    assert 0 <= a.value - b.value <= a.truncation_error_bound


def test_grid_assoc_scaling():
    # xi p_g s^-alpha is the only combination that matters
    a = laplace_grid_given_grid_assoc(1.0, (0.2, 0.1), 1.0, 1.0, 4, LatticeWindow(10))
    b = laplace_grid_given_grid_assoc(16.0, (0.4, 0.2), 2.0, 1.0, 4, LatticeWindow(10))
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_adaptive_window_reaches_target():
    v = laplace_grid_given_grid_assoc(0.01, (0.1, 0.1), 1.0, 1.0, 4, LatticeWindow(None, target=1e-6))
    assert v.truncation_error_bound <= 1e-6


def test_grid_assoc_fading_monte_carlo():
    rng = np.random.default_rng(3)
    n, draws, c = 6, 20000, 0.8
    u = np.array([0.2, -0.3])
    k = np.arange(-n, n + 1)
    Z = np.array([(i, j) for i in k for j in k if (i, j) != (0, 0)], float)
    g = np.sum((u + Z) ** 2, axis=1) ** -2.0
    h = rng.exponential(size=(draws, len(g)))
    vals = np.exp(-c * h @ g)
    ref = laplace_grid_given_grid_assoc(c, tuple(u), 1.0, 1.0, 4, LatticeWindow(n)).value
    assert abs(vals.mean() - ref) < 3 * vals.std() / math.sqrt(draws)


def test_region_integral_area():
    for a in (0.0, 0.3, 0.5, 0.6, 0.7):
        v, _ = region_integral(lambda x, y: np.ones_like(x), a)
        assert v == pytest.approx(float(square_minus_disc_area(a)), abs=1e-10)


def test_grid_excl_trivial_and_errors():
    assert laplace_grid_excl(0.0, 0.3, 1.0, 1.0, 4).value == 1.0
    with pytest.raises(ValueError):
        laplace_grid_excl(1.0, 0.75, 1.0, 1.0, 4)


def test_grid_excl_no_exclusion_is_cell_average():
    from gridppp.quadrature import cubature
    from gridppp.interference import lattice_product

    n = 4
    f = lambda x, y: lattice_product(0.5, x, y, 4, n, True)[0]
    ref, _ = cubature(f, 0.0, 0.5, 0.0, 0.5)
    v = laplace_grid_excl(0.5, 0.0, 1.0, 1.0, 4, LatticeWindow(n))
    assert v.value == pytest.approx(4 * ref, abs=1e-7)


def test_grid_excl_rejection_monte_carlo():
    from gridppp.interference import lattice_product

    rng = np.random.default_rng(11)
    n, r0 = 6, 0.3
    pts = rng.uniform(-0.5, 0.5, size=(400000, 2))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > r0][:200000]
    vals = lattice_product(1.0, pts[:, 0], pts[:, 1], 4, n, True)[0]
    ref = laplace_grid_excl(1.0, r0, 1.0, 1.0, 4, LatticeWindow(n)).value
    assert abs(vals.mean() - ref) < 3 * vals.std() / math.sqrt(len(vals))


def test_bounds_assoc_sandwich_and_tightening():
    for xi in (0.1, 1.0, 5.0):
        for u in ((0.0, 0.0), (0.3, 0.1), (-0.5, 0.45)):
            ref = laplace_grid_given_grid_assoc(xi, u, 1.0, 1.0, 4, LatticeWindow(100)).value
            lo1, up1 = laplace_grid_bounds_assoc(xi, u, 1.0, 1.0, 4, LatticeWindow(1))
            _, up3 = laplace_grid_bounds_assoc(xi, u, 1.0, 1.0, 4, LatticeWindow(3))
            assert lo1.value <= ref <= up3.value <= up1.value
    lo, up = laplace_grid_bounds_assoc(0.0, (0.1, 0.1), 1.0, 1.0, 4)
    assert lo.value == up.value == 1.0


def test_bounds_excl_sandwich():
    for xi in (0.2, 1.0, 4.0):
        for r in (0.0, 0.2, 0.45, 0.6):
            ref = laplace_grid_excl(xi, r, 1.0, 1.0, 4, LatticeWindow(30)).value
            lo, up = laplace_grid_bounds_excl(xi, r, 1.0, 1.0, 4, LatticeWindow(1))
            assert lo.value <= ref <= up.value
