"""Samplers for the shifted grid, the PPP and their superposition on a torus.

The simulation window is the square ``[-L/2, L/2)^2`` with ``L = m s`` and
opposite sides identified, so every distance is a minimum-image distance.
Because ``L`` is a multiple of the grid spacing the shifted grid tiles the
torus exactly with ``m^2`` points.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import ModelConfig

__all__ = [
    "Label",
    "GridShift",
    "SimWindow",
    "LabeledPointSet",
    "sample_grid",
    "sample_ppp",
    "sample_superposition",
    "nearest",
    "torus_delta",
]


class Label(enum.IntEnum):
    GRID = 0
    PPP = 1

    def __str__(self):
        return "grid" if self is Label.GRID else "ppp"


@dataclass(frozen=True)
class GridShift:
    ux: float
    uy: float
    s: float

    def __post_init__(self):
        h = self.s / 2 * (1 + 1e-12)
        if abs(self.ux) > h or abs(self.uy) > h:
            raise ValueError("grid shift must lie in [-s/2, s/2]^2")


@dataclass(frozen=True)
class SimWindow:
    """Torus of side ``m`` reference spacings."""

    m: int = 12

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise ValueError("window needs m >= 3")

    def side(self, spacing: float) -> float:
        return self.m * spacing


@dataclass(frozen=True, eq=False)
class LabeledPointSet:
    """Points ``xy`` (shape ``(N, 2)``) with per-point :class:`Label` codes."""

    xy: np.ndarray
    labels: np.ndarray
    side: float
    shift: GridShift | None = None
    window: SimWindow | None = None

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if len(xy) != len(labels):
            raise ValueError("points and labels differ in length")
        xy.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.xy)

    def subset(self, label: Label) -> "LabeledPointSet":
        keep = self.labels == int(label)
        return LabeledPointSet(self.xy[keep], self.labels[keep], self.side, self.shift, self.window)

    def union(self, other: "LabeledPointSet") -> "LabeledPointSet":
        if other.side != self.side:
            raise ValueError("point sets live on different tori")
        return LabeledPointSet(
            np.concatenate([self.xy, other.xy]),
            np.concatenate([self.labels, other.labels]),
            self.side,
            self.shift if self.shift is not None else other.shift,
            self.window or other.window,
        )

    def rows(self):
        """``(x, y, label)`` tuples, label as text."""
        return [(float(x), float(y), str(Label(int(l)))) for (x, y), l in zip(self.xy, self.labels)]


def _wrap(v, side):
    return (v + side / 2) % side - side / 2


def torus_delta(xy, origin, side):
    """Minimum-image displacement from ``origin`` to each point."""
    return _wrap(np.asarray(xy, float) - np.asarray(origin, float), side)


def sample_grid(s: float, window: SimWindow, rng: np.random.Generator, shift=None) -> LabeledPointSet:
    """Square grid of spacing ``s`` translated by one uniform shift shared by all points.

    ``shift`` pins the translation (a test hook).
    """
    if not s > 0:
        raise ValueError("grid spacing must be positive")
    if shift is None:
        ux, uy = rng.uniform(-s / 2, s / 2, size=2)
    else:
        ux, uy = float(shift[0]), float(shift[1])
    gs = GridShift(ux, uy, s)
    side = window.side(s)
    k = (np.arange(window.m) - window.m // 2) * s
    gx, gy = np.meshgrid(k + ux, k + uy, indexing="ij")
    xy = _wrap(np.column_stack([gx.ravel(), gy.ravel()]), side)
    return LabeledPointSet(xy, np.full(len(xy), Label.GRID, dtype=np.int8), side, gs, window)


def sample_ppp(lambda_p: float, window: SimWindow, rng: np.random.Generator, spacing: float,
               label: Label = Label.PPP) -> LabeledPointSet:
    """Homogeneous PPP of intensity ``lambda_p`` on the torus of side ``m * spacing``."""
    if lambda_p < 0:
        raise ValueError("intensity must be non-negative")
    side = window.side(spacing)
    n = rng.poisson(lambda_p * side * side) if lambda_p > 0 else 0
    xy = rng.uniform(-side / 2, side / 2, size=(n, 2))
    return LabeledPointSet(xy, np.full(n, label, dtype=np.int8), side, None, window)


def sample_superposition(config: ModelConfig, window: SimWindow, rng: np.random.Generator,
                         shift=None) -> LabeledPointSet:
    """One realisation of grid ∪ PPP.

    Draw order within ``rng`` is fixed: grid shift, then the PPP.  With
    ``grid_kind="ppp"`` the grid is replaced by a second PPP of intensity
    ``lambda_g`` that keeps the grid label and power.
    """
    spacing = config.reference_spacing
    side = window.side(spacing)
    if not config.grid_enabled:
        base = LabeledPointSet(np.empty((0, 2)), np.empty(0), side, None, window)
    elif config.grid_kind == "grid":
        base = sample_grid(config.s, window, rng, shift)
    else:
        base = sample_ppp(config.lambda_g, window, rng, spacing, Label.GRID)
    return base.union(sample_ppp(config.lambda_p, window, rng, spacing))


def nearest(ps: LabeledPointSet, origin=(0.0, 0.0)):
    """Torus distance to the closest point and its label.

    Ties go to the grid, then to the lexicographically smallest ``(x, y)``.
    """
    if len(ps) == 0:
        raise ValueError("empty point set")
    d = np.hypot(*torus_delta(ps.xy, origin, ps.side).T)
    best = d.min()
    cand = np.flatnonzero(d == best)
    if len(cand) > 1:
        order = np.lexsort((ps.xy[cand, 1], ps.xy[cand, 0], ps.labels[cand]))
        cand = cand[order]
    i = cand[0]
    return float(best), Label(int(ps.labels[i]))
