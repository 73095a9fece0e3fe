import math

import numpy as np
import pytest

from gridppp import lattice
from gridppp.quadrature import QuadratureError, QuadratureSpec, cubature, integrate


def test_exponential():
    v, e = integrate(np.exp, 0.0, 1.0)
    assert v == pytest.approx(math.e - 1, abs=1e-14)
    assert e < 1e-9


def test_kink_with_breakpoint():
    v, _ = integrate(lambda x: np.abs(x - 0.3) ** 0.5, 0.0, 1.0, breakpoints=(0.3,))
    ref = (0.3**1.5 + 0.7**1.5) / 1.5
    assert v == pytest.approx(ref, abs=1e-9)


def test_reversed_limits():
    v, _ = integrate(np.sin, math.pi, 0.0)
    assert v == pytest.approx(-2.0, abs=1e-12)


def test_nonconvergence_reports_achieved_error():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=0, max_depth=4)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: 1 / np.sqrt(x + 1e-300), 0.0, 1.0, spec=spec)
    assert info.value.achieved > 1e-14
    assert info.value.value is not None


def test_cubature_gaussian_corner():
    (v, first), err = cubature(lambda x, y: np.vstack([np.exp(-50 * (x * x + y * y)), x]),
                               0, 1, 0, 1, ncomp=2)
    assert v == pytest.approx(math.pi / 200 * math.erf(math.sqrt(50)) ** 2, abs=1e-10)
    assert first == pytest.approx(0.5, abs=1e-12)


def test_ring_bound_dominates_tail():
    # reference tail at a few points from a large window
    for u in [(0.0, 0.0), (0.5, 0.5), (0.3, -0.1)]:
        s_small = lattice.window_logsum(1.0, u[0], u[1], 4, 6, False, linear=True)[0]
        s_big = lattice.window_logsum(1.0, u[0], u[1], 4, 300, False, linear=True)[0]
        assert s_big - s_small <= lattice.ring_bound(6, 4)


@pytest.mark.parametrize("alpha", [3.0, 4.0])
@pytest.mark.parametrize("c", [0.5, 5.0])
def test_tail_estimate_within_residual(alpha, c):
    n, big = 6, 200
    ux, uy = np.array([0.0, 0.4, -0.2]), np.array([0.0, 0.45, 0.3])
    w_small, est, res, bound = lattice.log_laplace(c, ux, uy, alpha, n, False)
    w_big, est_big, res_big, _ = lattice.log_laplace(c, ux, uy, alpha, big, False)
    # the big window plus its own (tiny) estimate is the reference
    ref = w_big + est_big
    assert np.all(np.abs(w_small + est - ref) <= res + res_big)
    assert np.all(ref - w_small <= bound)
