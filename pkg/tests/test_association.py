import math

import numpy as np
import pytest

from gridppp.association import (
    assoc_bounds,
    assoc_prob_grid,
    assoc_prob_ppp,
    assoc_prob_ppp_closed_form,
    association,
    erf,
)
from gridppp.quadrature import QuadratureSpec

# 1 - erf(sqrt(pi)/2)^2, evaluated independently of the radial integral
P_PPP_RHO1 = 0.3760444122464658


def _erf_series(z, terms=80):
    total, term = 0.0, z
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -z * z / (n + 1)
    return 2 / math.sqrt(math.pi) * total


def test_erf_against_series():
    assert erf(1.0) == pytest.approx(0.842700792949715, abs=1e-10)
    for z in np.linspace(-3, 3, 25):
        assert abs(erf(z) - _erf_series(z)) < 1e-10


def test_erf_symmetry_and_limit():
    assert erf(0.0) == 0.0
    assert erf(-0.7) == -erf(0.7)
    assert abs(erf(6.0) - 1) < 1e-15


def test_unit_ratio_value():
    assert assoc_prob_ppp(1.0, 1.0, 4.0) == pytest.approx(P_PPP_RHO1, abs=1e-9)


@pytest.mark.parametrize("rho", [0.05, 0.3, 1.0, 2.5, 7.0, 30.0])
def test_matches_closed_form(rho):
    assert assoc_prob_ppp(rho) == pytest.approx(float(assoc_prob_ppp_closed_form(rho)), abs=1e-9)


def test_limits():
    assert assoc_prob_ppp(1e-6) < 1e-5
    assert assoc_prob_ppp(1e4) > 0.999


def test_rho_sufficiency():
    a = assoc_prob_ppp(0.7, eta=3.0, alpha=3.5)
    b = assoc_prob_ppp(0.7 * 3.0 ** (2 / 3.5), 1.0, 3.5)
    assert a == pytest.approx(b, abs=1e-9)


def test_monotone():
    vals = [assoc_prob_ppp(r) for r in np.linspace(0.05, 6, 40)]
    assert np.all(np.diff(vals) > 0)


def test_complement_and_result():
    r = association(1.3)
    assert r.p_assoc_ppp + r.p_assoc_grid == pytest.approx(1.0, abs=1e-15)
    assert assoc_prob_grid(1.3) == pytest.approx(r.p_assoc_grid)


@pytest.mark.parametrize("bad", [dict(rho_lambda=0), dict(rho_lambda=1, eta=0), dict(rho_lambda=1, alpha=2)])
def test_preconditions(bad):
    with pytest.raises(ValueError):
        assoc_prob_ppp(**bad)


def test_bounds_sandwich_and_gap():
    for rho in np.round(np.arange(0.1, 5.01, 0.1), 10):
        lo, up = assoc_bounds(rho)
        ex = assoc_prob_ppp(rho)
        assert lo.p_assoc_ppp <= ex <= up.p_assoc_ppp
        gamma = 0.0956 * (math.exp(-math.pi * rho / 4) - math.exp(-math.pi * rho / 2))
        assert up.meta["raw"] - lo.meta["raw"] == pytest.approx(gamma, abs=1e-15)


def test_bounds_at_one():
    lo, up = assoc_bounds(1.0)
    assert lo.p_assoc_ppp < P_PPP_RHO1 < up.p_assoc_ppp
    assert up.p_assoc_ppp - lo.p_assoc_ppp < 0.03


def test_bounds_large_rho():
    lo, up = assoc_bounds(200.0)
    assert lo.p_assoc_ppp == pytest.approx(1.0, abs=1e-2)
    assert up.p_assoc_ppp == pytest.approx(1.0, abs=1e-2)


def test_bounds_clamped_metadata():
    lo, up = assoc_bounds(1e-4)
    for b in (lo, up):
        assert 0.0 <= b.p_assoc_ppp <= 1.0
        assert b.meta["clamped"] == (b.meta["raw"] != b.p_assoc_ppp)


def test_custom_quadrature():
    v = assoc_prob_ppp(1.0, quad=QuadratureSpec(abs_tol=1e-12, rel_tol=1e-13))
    assert v == pytest.approx(P_PPP_RHO1, abs=1e-11)
