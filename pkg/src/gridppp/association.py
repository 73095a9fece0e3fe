"""Probability that the typical user is served by a PPP or a grid base station."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .distributions import _association_integral
from .quadrature import QuadratureSpec

__all__ = ["AssociationResult", "erf", "assoc_prob_ppp", "assoc_prob_grid", "assoc_bounds", "association",
           "assoc_prob_ppp_closed_form"]

# Slope of the chord of g(x) = x^2 arccos(1/x) - sqrt(x^2 - 1) over [1, sqrt 2],
# and the offset of the parallel line touching g from below.
_CHORD_SLOPE = (math.pi / 2 - 1) / (math.sqrt(2) - 1)
_TANGENT_OFFSET = 0.0956


@dataclass(frozen=True)
class AssociationResult:
    p_assoc_ppp: float
    p_assoc_grid: float
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("exact", "lower", "upper"):
            raise ValueError(f"unknown method {self.method!r}")


def erf(z):
    """Error function (scipy's Cephes implementation)."""
    return special.erf(z)


def assoc_prob_ppp(rho_lambda, eta=1.0, alpha=4.0, quad: QuadratureSpec | None = None) -> float:
    """P(typical user is served by a PPP station); depends only on ``rho_lambda * eta^(2/alpha)``."""
    if not rho_lambda > 0:
        raise ValueError("rho_lambda must be positive")
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not alpha > 2:
        raise ValueError("alpha must exceed 2")
    return _association_integral(rho_lambda * eta ** (2.0 / alpha), quad)


def assoc_prob_grid(rho_lambda, eta=1.0, alpha=4.0, quad: QuadratureSpec | None = None) -> float:
    return 1.0 - assoc_prob_ppp(rho_lambda, eta, alpha, quad)


def _raw_bounds(rho):
    e2 = math.exp(-math.pi * rho / 2)
    e4 = math.exp(-math.pi * rho / 4)
    beta = float(erf(math.sqrt(math.pi * rho / 2)) - erf(math.sqrt(math.pi * rho / 4)))
    gamma = _TANGENT_OFFSET * (e4 - e2)
    upper = 1 + (e2 - 1) / rho + _CHORD_SLOPE / math.sqrt(rho) * beta
    return upper - gamma, upper


def assoc_bounds(rho) -> tuple[AssociationResult, AssociationResult]:
    """Closed-form lower and upper bounds on the PPP association probability.

    The bounds replace the convex segment term of the association integral by
    its chord (upper) and a parallel supporting line (lower).  Results are
    clamped to [0, 1]; the unclamped values are kept in ``meta["raw"]``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    lo, up = _raw_bounds(rho)
    out = []
    for method, raw in (("lower", lo), ("upper", up)):
        val = min(max(raw, 0.0), 1.0)
        out.append(AssociationResult(val, 1.0 - val, method, {"raw": raw, "clamped": val != raw}))
    return out[0], out[1]


def association(rho_lambda, eta=1.0, alpha=4.0, quad=None) -> AssociationResult:
    p = assoc_prob_ppp(rho_lambda, eta, alpha, quad)
    return AssociationResult(p, 1.0 - p, "exact", {"rho": rho_lambda * eta ** (2.0 / alpha)})


def assoc_prob_ppp_closed_form(rho):
    """``1 - erf(sqrt(pi rho)/2)^2 / rho``: the same probability via ``E[exp(-pi rho |U|^2)]``.

    Used as an independent cross-check of the radial integral.
    """
    rho = np.asarray(rho, dtype=float)
    return 1.0 - special.erf(np.sqrt(np.pi * rho) / 2) ** 2 / rho
