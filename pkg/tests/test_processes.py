import math

import numpy as np
import pytest
from scipy import stats

from gridppp.distributions import grid_nearest_cdf
from gridppp.model import ModelConfig
from gridppp.processes import (
    Label,
    LabeledPointSet,
    SimWindow,
    nearest,
    sample_grid,
    sample_ppp,
    sample_superposition,
)


def rng(seed):
    return np.random.default_rng(seed)


def test_grid_count_and_determinism():
    a = sample_grid(1.0, SimWindow(3), rng(5))
    b = sample_grid(1.0, SimWindow(3), rng(5))
    assert len(a) == 9
    np.testing.assert_array_equal(a.xy, b.xy)


def test_grid_single_shared_shift():
    ps = sample_grid(2.0, SimWindow(5), rng(1))
    u = np.array([ps.shift.ux, ps.shift.uy])
    k = (ps.xy - u) / 2.0
    # every point is u + s k modulo the torus
    frac = np.abs(k - np.round(k))
    assert np.all(frac < 1e-9)


def test_grid_repulsion():
    ps = sample_grid(1.5, SimWindow(6), rng(2))
    d = np.hypot(*(ps.xy[:, None, :] - ps.xy[None, :, :]).transpose(2, 0, 1))
    d = d[~np.eye(len(d), dtype=bool)]
    assert d.min() >= 1.5 - 1e-9


def test_shift_uniform_chi2():
    s = 1.0
    us = np.array([[p.shift.ux, p.shift.uy] for p in
                   (sample_grid(s, SimWindow(3), rng(i)) for i in range(10000))])
    h, _, _ = np.histogram2d(us[:, 0], us[:, 1], bins=4, range=[[-0.5, 0.5], [-0.5, 0.5]])
    assert stats.chisquare(h.ravel()).pvalue > 0.001


def test_ppp_empty_and_mean():
    assert len(sample_ppp(0.0, SimWindow(4), rng(0), 1.0)) == 0
    counts = np.array([len(sample_ppp(0.7, SimWindow(4), rng(i), 1.0)) for i in range(10000)])
    mean = 0.7 * 16
    assert abs(counts.mean() - mean) < 3 * math.sqrt(mean / 10000)


def test_ppp_disjoint_counts_uncorrelated():
    left, right = [], []
    for i in range(10000):
        ps = sample_ppp(1.0, SimWindow(4), rng(i), 1.0)
        left.append(np.sum(ps.xy[:, 0] < -0.5))
        right.append(np.sum(ps.xy[:, 0] > 0.5))
    assert abs(np.corrcoef(left, right)[0, 1]) < 0.05


def test_superposition_labels_and_counts():
    cfg = ModelConfig(1.0, 0.0)
    ps = sample_superposition(cfg, SimWindow(4), rng(0))
    assert len(ps) == 16 and np.all(ps.labels == Label.GRID)
    pure = sample_superposition(ModelConfig(0.0, 1.0), SimWindow(4), rng(0))
    assert np.all(pure.labels == Label.PPP)
    counts = [len(sample_superposition(ModelConfig(1.0, 0.5), SimWindow(4), rng(i))) for i in range(10000)]
    assert abs(np.mean(counts) - 1.5 * 16) < 3 * math.sqrt(0.5 * 16 / 10000)


def test_nearest_examples():
    ps = LabeledPointSet([[3.0, 4.0]], [Label.PPP], 100.0)
    assert nearest(ps) == (5.0, Label.PPP)
    ps = LabeledPointSet([[11.0, 0.0]], [Label.GRID], 12.0)
    assert nearest(ps)[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        nearest(LabeledPointSet(np.empty((0, 2)), [], 10.0))


def test_nearest_tie_breaking():
    ps = LabeledPointSet([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], [Label.PPP, Label.GRID, Label.GRID], 10.0)
    d, lab = nearest(ps)
    assert d == 1.0 and lab == Label.GRID


def test_grid_nearest_distribution():
    s = 1.0
    d = [nearest(sample_grid(s, SimWindow(3), rng(i)))[0] for i in range(20000)]
    ks = stats.kstest(d, lambda r: grid_nearest_cdf(r, s)).statistic
    assert ks < 0.015


def test_stationarity_offset_origin():
    cfg = ModelConfig(1.0, 1.0)
    a = [nearest(sample_superposition(cfg, SimWindow(4), rng(i)))[0] for i in range(5000)]
    b = [nearest(sample_superposition(cfg, SimWindow(4), rng(10**6 + i)), (1.3, -0.7))[0] for i in range(5000)]
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_point_set_immutable():
    ps = sample_grid(1.0, SimWindow(3), rng(0))
    with pytest.raises(ValueError):
        ps.xy[0, 0] = 5.0
