"""Model parameters, path-loss laws and SIR thresholds.

All geometry is in abstract length units.  The grid spacing ``s`` is never
configured directly; it follows from the grid intensity as ``1/sqrt(lambda_g)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelConfig",
    "PowerLaw",
    "BoundedSingleSlope",
    "DualSlope",
    "SirThreshold",
    "derive_ratios",
    "path_gain",
]


@dataclass(frozen=True)
class ModelConfig:
    """Grid + PPP base-station model.

    ``lambda_g = 0`` disables the grid (pure PPP).  ``grid_kind="ppp"`` replaces
    the shifted grid by an independent PPP of the same intensity and power,
    which gives the two-PPP comparison network.
    """

    lambda_g: float
    lambda_p: float
    p_g: float = 1.0
    p_p: float = 1.0
    alpha: float = 4.0
    grid_kind: str = "grid"

    def __post_init__(self):
        if self.lambda_g < 0 or self.lambda_p < 0:
            raise ValueError("intensities must be non-negative")
        if self.lambda_g == 0 and self.lambda_p == 0:
            raise ValueError("at least one of lambda_g, lambda_p must be positive")
        if self.p_g <= 0 or self.p_p <= 0:
            raise ValueError("transmit powers must be positive")
        if not self.alpha > 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if self.grid_kind not in ("grid", "ppp"):
            raise ValueError(f"unknown grid_kind {self.grid_kind!r}")

    @property
    def grid_enabled(self) -> bool:
        return self.lambda_g > 0

    @property
    def s(self) -> float:
        if not self.grid_enabled:
            raise ValueError("grid disabled (lambda_g = 0): model is a pure PPP")
        return 1.0 / math.sqrt(self.lambda_g)

    @property
    def rho_lambda(self) -> float:
        if not self.grid_enabled:
            raise ValueError("grid disabled (lambda_g = 0): rho_lambda is infinite")
        return self.lambda_p / self.lambda_g

    @property
    def eta(self) -> float:
        return self.p_p / self.p_g

    @property
    def rho(self) -> float:
        return self.rho_lambda * self.eta ** (2.0 / self.alpha)

    @property
    def reference_spacing(self) -> float:
        """Grid spacing, or ``1/sqrt(lambda_p)`` when the grid is disabled."""
        if self.grid_enabled:
            return self.s
        return 1.0 / math.sqrt(self.lambda_p)


def derive_ratios(config: ModelConfig) -> tuple[float, float, float, float]:
    """Return ``(rho_lambda, eta, rho, s)`` for a grid-enabled configuration."""
    return config.rho_lambda, config.eta, config.rho, config.s


# ---------------------------------------------------------------------------
# Path loss
#
# Every variant exposes the path *gain* g(r) and the radial tail integral
# int_rho^inf g(r) r dr, which the simulator uses for its far-field term.


@dataclass(frozen=True)
class PowerLaw:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")

    def gain(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("power-law gain is singular at r = 0")
        return r ** (-self.alpha)

    def radial_tail(self, rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):  # diverges at 0
            return rho ** (2 - self.alpha) / (self.alpha - 2)

    @property
    def scale_free(self) -> bool:
        return True


@dataclass(frozen=True)
class BoundedSingleSlope:
    """``g(r) = min(C0, r^-alpha)``: received power bounded near the transmitter."""

    c0: float
    alpha: float

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("C0 must be positive")
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")

    @property
    def r_cap(self) -> float:
        return self.c0 ** (-1.0 / self.alpha)

    def gain(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("negative distance")
        with np.errstate(divide="ignore"):
            return np.minimum(self.c0, r ** (-self.alpha))

    def radial_tail(self, rho):
        rho = np.asarray(rho, dtype=float)
        rc = self.r_cap
        a = self.alpha
        far = np.maximum(rho, rc) ** (2 - a) / (a - 2)
        near = np.where(rho < rc, self.c0 * (rc**2 - np.minimum(rho, rc) ** 2) / 2, 0.0)
        return far + near

    @property
    def scale_free(self) -> bool:
        return False


@dataclass(frozen=True)
class DualSlope:
    """Two-slope bounded path gain, continuous at the breakpoint ``r1``.

    ``g(r) = min(C0, r^-alpha1)`` below ``r1`` and ``min(C1 r^-alpha1, C2 r^-alpha2)``
    above it.  ``C1`` and ``C2`` are derived so both branches meet at ``r1``.
    """

    c0: float
    r1: float
    alpha1: float
    alpha2: float
    c1: float = field(init=False)
    c2: float = field(init=False)

    def __post_init__(self):
        if self.c0 <= 0 or self.r1 <= 0:
            raise ValueError("C0 and r1 must be positive")
        if not (self.alpha2 >= self.alpha1 > 2):
            raise ValueError("need alpha2 >= alpha1 > 2")
        g1 = min(self.c0, self.r1 ** (-self.alpha1))
        object.__setattr__(self, "c1", g1 * self.r1**self.alpha1)
        object.__setattr__(self, "c2", g1 * self.r1**self.alpha2)

    @property
    def alpha(self) -> float:
        return self.alpha2

    def gain(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("negative distance")
        with np.errstate(divide="ignore"):
            near = np.minimum(self.c0, r ** (-self.alpha1))
            far = np.minimum(self.c1 * r ** (-self.alpha1), self.c2 * r ** (-self.alpha2))
        return np.where(r < self.r1, near, far)

    def radial_tail(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.empty_like(rho)
        a1, a2 = self.alpha1, self.alpha2
        # beyond r1 the c2 branch is the active minimum (alpha2 >= alpha1)
        for i, x in enumerate(rho):
            lo = max(x, self.r1)
            total = self.c2 * lo ** (2 - a2) / (a2 - 2)
            if x < self.r1:
                rc = min(self.c0 ** (-1.0 / a1), self.r1)
                hi = self.r1
                b = max(x, rc)
                if b < hi:
                    total += (b ** (2 - a1) - hi ** (2 - a1)) / (a1 - 2)
                if x < rc:
                    total += self.c0 * (rc**2 - x**2) / 2
            out[i] = total
        return out if out.size > 1 else out[0]

    @property
    def scale_free(self) -> bool:
        return False


def path_gain(model, r):
    """Path gain of ``model`` at distance ``r`` (scalar or array)."""
    g = model.gain(r)
    return float(g) if np.ndim(g) == 0 else g


@dataclass(frozen=True)
class SirThreshold:
    t_linear: float

    def __post_init__(self):
        if not self.t_linear > 0:
            raise ValueError("SIR threshold must be positive")

    @classmethod
    def from_db(cls, t_db: float) -> "SirThreshold":
        return cls(10.0 ** (t_db / 10.0))

    @property
    def t_db(self) -> float:
        return 10.0 * math.log10(self.t_linear)
