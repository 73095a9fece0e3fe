"""Fit the grid + PPP model to observed station coordinates.

The model's pair correlation is the constant ``kappa = 1 - 1/(1 + rho_lambda)^2``
away from the lattice lags, so an averaged estimate of the pair correlation
at short range identifies ``rho_lambda``.

The estimator is the usual kernel estimator with translation edge
correction over a rectangular observation window.  Windows may be rotated;
when none is supplied the minimum-area rectangle enclosing the points is
used, which keeps the estimate invariant under rigid motions of the data.
"""
from __future__ import annotations

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

__all__ = [
    "EARTH_RADIUS_KM",
    "MIN_POINTS",
    "RectWindow",
    "DeploymentData",
    "PcfEstimate",
    "FittedModel",
    "AttractivePatternError",
    "kappa_from_rho",
    "rho_from_kappa",
    "project_latlon",
    "read_deployment_csv",
    "min_area_rectangle",
    "estimate_pcf",
    "fit_model",
    "synthetic_deployment",
]

EARTH_RADIUS_KM = 6371.0
MIN_POINTS = 30


class AttractivePatternError(ValueError):
    """Raised when the averaged pair correlation is >= 1 (clustering)."""


def kappa_from_rho(rho_lambda: float) -> float:
    if rho_lambda < 0:
        raise ValueError("rho_lambda must be non-negative")
    return 1.0 - 1.0 / (1.0 + rho_lambda) ** 2


def rho_from_kappa(kappa: float) -> float:
    """Inverse of :func:`kappa_from_rho`; negative ``kappa`` is clamped to 0 with a warning."""
    if kappa >= 1:
        raise AttractivePatternError(
            f"attractive pattern, model inapplicable (average pair correlation {kappa:.4g} >= 1)"
        )
    if kappa < 0:
        warnings.warn(f"average pair correlation {kappa:.4g} < 0 clamped to 0", RuntimeWarning,
                      stacklevel=2)
        kappa = 0.0
    return 1.0 / math.sqrt(1.0 - kappa) - 1.0


@dataclass(frozen=True)
class RectWindow:
    """Rectangle of size ``width x height`` centred at ``center``, rotated by ``angle`` radians."""

    center: tuple[float, float]
    width: float
    height: float
    angle: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("degenerate window: zero area")

    @classmethod
    def from_bounds(cls, xmin, ymin, xmax, ymax):
        return cls(((xmin + xmax) / 2, (ymin + ymax) / 2), xmax - xmin, ymax - ymin, 0.0)

    @property
    def area(self) -> float:
        return self.width * self.height

    def _axes(self):
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, s], [-s, c]])

    def to_local(self, xy):
        """Coordinates in the rectangle's own frame (origin at its centre)."""
        return (np.asarray(xy, float) - np.asarray(self.center)) @ self._axes().T

    def rotate_vectors(self, v):
        return np.asarray(v, float) @ self._axes().T

    def contains(self, xy, tol=1e-9):
        loc = self.to_local(xy)
        return (np.abs(loc[:, 0]) <= self.width / 2 + tol) & (np.abs(loc[:, 1]) <= self.height / 2 + tol)

    def inflate(self, d: float) -> "RectWindow":
        return RectWindow(self.center, self.width + 2 * d, self.height + 2 * d, self.angle)

    def overlap(self, dx, dy):
        """Area of ``W`` intersected with ``W`` translated by the (global-frame) vector ``(dx, dy)``."""
        loc = self.rotate_vectors(np.column_stack([dx, dy]))
        return (np.maximum(self.width - np.abs(loc[:, 0]), 0.0)
                * np.maximum(self.height - np.abs(loc[:, 1]), 0.0))


def min_area_rectangle(xy) -> RectWindow:
    """Smallest-area rectangle containing the points (one side is flush with a hull edge)."""
    xy = np.asarray(xy, float)
    try:
        hull = xy[ConvexHull(xy).vertices]
    except Exception as exc:  # collinear or too few points
        raise ValueError("degenerate window: points do not span an area") from exc
    edges = np.diff(np.vstack([hull, hull[:1]]), axis=0)
    angles = np.unique(np.mod(np.arctan2(edges[:, 1], edges[:, 0]), math.pi / 2))
    best = None
    for a in angles:
        c, s = math.cos(a), math.sin(a)
        loc = hull @ np.array([[c, -s], [s, c]])
        lo, hi = loc.min(axis=0), loc.max(axis=0)
        area = float(np.prod(hi - lo))
        if best is None or area < best[0]:
            mid = (lo + hi) / 2
            center = (c * mid[0] - s * mid[1], s * mid[0] + c * mid[1])
            best = (area, RectWindow(center, hi[0] - lo[0], hi[1] - lo[1], a))
    return best[1]


@dataclass(frozen=True, eq=False)
class DeploymentData:
    """Planar station coordinates.

    ``window=None`` means the observation window is unknown and is derived
    from the points (minimum-area enclosing rectangle).
    """

    points: np.ndarray
    window: RectWindow | None = None
    source_crs: str = "planar"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")
        if self.source_crs not in ("planar", "latlon"):
            raise ValueError(f"unknown source_crs {self.source_crs!r}")
        if self.window is not None and len(pts) and not np.all(self.window.contains(pts)):
            raise ValueError("points lie outside the observation window")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)


def project_latlon(records, meta=None) -> DeploymentData:
    """Equirectangular projection (km) about the centroid of ``(lat, lon)`` records (degrees)."""
    ll = np.asarray(records, float).reshape(-1, 2)
    if len(ll) == 0:
        raise ValueError("no records")
    if np.any(np.abs(ll[:, 0]) >= 89):
        raise ValueError("latitudes must satisfy |lat| < 89 degrees")
    lat0, lon0 = ll.mean(axis=0)
    k = math.pi / 180
    x = EARTH_RADIUS_KM * math.cos(lat0 * k) * (ll[:, 1] - lon0) * k
    y = EARTH_RADIUS_KM * (ll[:, 0] - lat0) * k
    m = {"lat0": float(lat0), "lon0": float(lon0), "units": "km"}
    m.update(meta or {})
    return DeploymentData(np.column_stack([x, y]), None, "latlon", m)


def read_deployment_csv(source, coords: str | None = None) -> DeploymentData:
    """Parse a station CSV with header ``lat,lon`` or ``x,y``.

    ``source`` is a path or a text stream.  ``#`` comment lines and blank
    lines are skipped.  Every malformed row is reported with its line number.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    header = None
    rows, bad = [], []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = next(csv.reader([line]))
        fields = [f.strip() for f in fields]
        if header is None:
            header = [f.lower() for f in fields]
            if header not in (["lat", "lon"], ["x", "y"]):
                raise ValueError(f"line {lineno}: expected header 'lat,lon' or 'x,y', got {line!r}")
            continue
        try:
            if len(fields) != 2:
                raise ValueError
            vals = (float(fields[0]), float(fields[1]))
            if not all(math.isfinite(v) for v in vals):
                raise ValueError
            rows.append(vals)
        except ValueError:
            bad.append(f"line {lineno}: malformed row {line!r}")
    if header is None:
        raise ValueError("missing header")
    if bad:
        raise ValueError("; ".join(bad))
    kind = "latlon" if header == ["lat", "lon"] else "planar"
    if coords is not None and coords != kind:
        raise ValueError(f"file has {kind} columns but coords={coords!r} was requested")
    if kind == "latlon":
        return project_latlon(rows)
    return DeploymentData(np.asarray(rows, float).reshape(-1, 2), None, "planar")


@dataclass(frozen=True)
class PcfEstimate:
    r_grid: np.ndarray
    g_hat: np.ndarray
    bandwidth: float
    kappa_avg: float
    lambda_hat: float
    averaging_range: tuple[float, float]
    window: RectWindow


def _epanechnikov(x, h):
    u = x / h
    return np.where(np.abs(u) < 1, 0.75 * (1 - u * u) / h, 0.0)


def estimate_pcf(data: DeploymentData, bandwidth: float | None = None, r_grid=None) -> PcfEstimate:
    """Kernel pair-correlation estimate and its short-range average ``kappa_avg``.

    ``g_hat`` uses an Epanechnikov kernel with translation edge correction.
    ``kappa_avg`` is the ratio of edge-corrected pair counts in the annulus
    ``[h, 1/sqrt(lambda) - h]`` to the count expected under complete
    randomness, i.e. the ``r``-weighted mean of the pair correlation there.
    The upper end stays below the smallest lattice lag, which is at least
    ``1/sqrt(lambda)``.
    """
    pts = data.points
    n = len(pts)
    if n < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points, got {n}")
    if data.window is None:
        raw = min_area_rectangle(pts)
        h = bandwidth if bandwidth is not None else 0.15 / math.sqrt(n / raw.area)
        win = raw.inflate(h / 2)
    else:
        win = data.window
        h = bandwidth if bandwidth is not None else 0.15 / math.sqrt(n / win.area)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    lam = n / win.area
    scale = 1 / math.sqrt(lam)
    if r_grid is None:
        r_grid = np.linspace(h, 1.25 * scale, 30)
    r_grid = np.asarray(r_grid, float)
    r1, r2 = h, scale - h
    rmax = max(float(r_grid.max()) + h, r2)

    tree = cKDTree(pts)
    pairs = tree.query_pairs(rmax, output_type="ndarray")
    dxy = pts[pairs[:, 1]] - pts[pairs[:, 0]]
    d = np.hypot(dxy[:, 0], dxy[:, 1])
    ov = win.overlap(dxy[:, 0], dxy[:, 1])
    w = np.where(ov > 0, 2.0 / np.where(ov > 0, ov, 1.0), 0.0)  # ordered pairs

    g_hat = np.empty_like(r_grid)
    for k, r in enumerate(r_grid):
        near = np.abs(d - r) < h
        g_hat[k] = np.sum(w[near] * _epanechnikov(r - d[near], h)) / (2 * math.pi * r * lam * lam)
    g_hat = np.maximum(g_hat, 0.0)

    if r2 <= r1:
        raise ValueError("bandwidth too large for the averaging range")
    inside = (d >= r1) & (d <= r2)
    kappa = float(np.sum(w[inside]) / (lam * lam * math.pi * (r2 * r2 - r1 * r1)))
    return PcfEstimate(r_grid, g_hat, h, kappa, lam, (r1, r2), win)


@dataclass(frozen=True)
class FittedModel:
    kappa_avg: float
    rho_lambda_hat: float
    lambda_hat: float
    lambda_g_hat: float
    lambda_p_hat: float
    pcf: PcfEstimate | None = None

    def model_config(self, alpha: float = 4.0, eta: float = 1.0):
        from .model import ModelConfig

        return ModelConfig(self.lambda_g_hat, self.lambda_p_hat, 1.0, eta, alpha)

    def predict_coverage(self, t_grid_db, alpha: float = 4.0, eta: float = 1.0, method="exact",
                         threads: int = 1):
        from .coverage import CoverageQuery, coverage_curve

        q = CoverageQuery(self.rho_lambda_hat, eta, alpha)
        return coverage_curve(q, t_grid_db, method, threads=threads)

    def to_dict(self):
        return {
            "kappa_avg": self.kappa_avg,
            "rho_lambda_hat": self.rho_lambda_hat,
            "lambda_hat": self.lambda_hat,
            "lambda_g_hat": self.lambda_g_hat,
            "lambda_p_hat": self.lambda_p_hat,
            "bandwidth": self.pcf.bandwidth if self.pcf else None,
        }


def fit_model(data: DeploymentData, bandwidth: float | None = None) -> FittedModel:
    """Estimate ``kappa``, invert it to ``rho_lambda`` and split the intensity between tiers."""
    pcf = estimate_pcf(data, bandwidth)
    rho = rho_from_kappa(pcf.kappa_avg)
    lam = pcf.lambda_hat
    return FittedModel(pcf.kappa_avg, rho, lam, lam / (1 + rho), lam * rho / (1 + rho), pcf)


def synthetic_deployment(rho_lambda: float, n: int, seed: int = 0, lambda_total: float = 1.0,
                         grid: bool = True) -> DeploymentData:
    """Grid + PPP sample in a square window holding about ``n`` stations.

    The square side is a multiple of the grid spacing, so the torus sample is
    also a faithful planar sample of the window.  ``rho_lambda=inf`` or
    ``grid=False`` gives a pure PPP; ``rho_lambda=0`` a pure grid.
    """
    from .model import ModelConfig
    from .processes import SimWindow, sample_superposition

    rng = np.random.default_rng(seed)
    if not grid or math.isinf(rho_lambda):
        lam_g, lam_p = 0.0, lambda_total
    else:
        lam_g = lambda_total / (1 + rho_lambda)
        lam_p = lambda_total - lam_g
    cfg = ModelConfig(lam_g, lam_p)
    m = max(3, int(round(math.sqrt(n / (lambda_total * cfg.reference_spacing**2)))))
    ps = sample_superposition(cfg, SimWindow(m), rng)
    win = RectWindow((0.0, 0.0), ps.side, ps.side)
    return DeploymentData(ps.xy, win, "planar", {"rho_lambda": rho_lambda, "side": ps.side,
                                                 "labels": ps.labels})
