"""Sums over the unit square lattice with certified truncation control.

Everything here works in grid-normalised coordinates (spacing 1).  For a
query point ``u`` in the central cell and a coupling ``c >= 0`` the central
object is the log-sum

    L(u) = sum_z log(1 + c |u + z|^-alpha)

over ``z`` in Z^2 (optionally without the origin).  It is split into the
exact window ``|z|_inf <= n`` and a tail.  For the tail we provide

* a certified upper bound  ``c * ring_bound(n)``  (tail >= 0 trivially), and
* a midpoint-rule estimate ``c * outside_square_integral(u, n + 1/2)`` with a
  certified residual bound (second-derivative remainder plus the
  log-linearisation error).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .quadrature import gauss_legendre

__all__ = [
    "offsets",
    "window_logsum",
    "ring_bound",
    "outside_square_integral",
    "tail_residual",
    "log_laplace",
]

_DIRECT_RINGS = 64


@lru_cache(maxsize=32)
def offsets(n: int, include_origin: bool):
    """Lattice offsets ``z`` with ``|z|_inf <= n`` as two flat arrays."""
    k = np.arange(-n, n + 1, dtype=float)
    zx, zy = np.meshgrid(k, k, indexing="ij")
    zx, zy = zx.ravel(), zy.ravel()
    if not include_origin:
        keep = (zx != 0) | (zy != 0)
        zx, zy = zx[keep], zy[keep]
    zx.setflags(write=False)
    zy.setflags(write=False)
    return zx, zy


def window_logsum(c, ux, uy, alpha, n, include_origin, linear=False, chunk=4096):
    """``sum_{|z|_inf <= n} log(1 + c |u+z|^-alpha)`` for each query point.

    ``c``, ``ux`` and ``uy`` broadcast to a common 1-D shape.  With ``linear``
    the summand is ``c |u+z|^-alpha`` instead.
    """
    c, ux, uy = np.broadcast_arrays(
        np.atleast_1d(np.asarray(c, float)),
        np.atleast_1d(np.asarray(ux, float)),
        np.atleast_1d(np.asarray(uy, float)),
    )
    zx, zy = offsets(int(n), bool(include_origin))
    out = np.empty(c.shape, dtype=float)
    half = -0.5 * alpha
    for start in range(0, c.size, chunk):
        sl = slice(start, start + chunk)
        dx = ux[sl, None] + zx[None, :]
        dy = uy[sl, None] + zy[None, :]
        with np.errstate(divide="ignore"):
            t = c[sl, None] * (dx * dx + dy * dy) ** half
        out[sl] = t.sum(axis=1) if linear else np.log1p(t).sum(axis=1)
    return out


def _ring_sum(n, term, tail_integral):
    """sum_{k > n} term(k), first rings directly, rest by integral comparison."""
    k = np.arange(n + 1, n + 1 + _DIRECT_RINGS, dtype=float)
    return float(np.sum(term(k))) + tail_integral(n + _DIRECT_RINGS)


def ring_bound(n: int, alpha: float) -> float:
    """Certified bound on ``sum_{|z|_inf > n} |u+z|^-alpha`` for ``u`` in the central cell.

    Ring ``k`` holds ``8k`` offsets, each at distance at least ``k - 1/2``.
    """
    a = alpha

    def tail(m):
        y = m - 0.5
        return 8.0 * (y ** (2 - a) / (a - 2) + 0.5 * y ** (1 - a) / (a - 1))

    return _ring_sum(n, lambda k: 8.0 * k * (k - 0.5) ** (-a), tail)


def _midpoint_constant(alpha):
    # |d^2/dx_i dx_j r^-alpha| <= alpha (alpha+2) r^(-alpha-2); the remainder of the
    # unit-cell midpoint rule is at most half that bound times (1/12 + 1/12 + 2/16).
    return 0.5 * alpha * (alpha + 2) * (1.0 / 6.0 + 1.0 / 16.0)


def _midpoint_rings(n, alpha):
    """sum_{k > n} 8k (k-1)^(-alpha-2), needs n >= 1."""
    b = alpha + 2

    def tail(m):
        y = m - 1.0
        return 8.0 * (y ** (2 - b) / (b - 2) + y ** (1 - b) / (b - 1))

    return _ring_sum(n, lambda k: 8.0 * k * (k - 1.0) ** (-b), tail)


def tail_residual(c, n, alpha):
    """Certified bound on ``|tail - c * outside_square_integral|`` (needs ``n >= 1``)."""
    if n < 1:
        raise ValueError("tail estimate needs n >= 1")
    c = np.asarray(c, float)
    mid = _midpoint_constant(alpha) * _midpoint_rings(n, alpha)
    quad = 0.5 * ring_bound(n, 2 * alpha)
    return c * mid + c * c * quad


@lru_cache(maxsize=8)
def _angle_rule(order):
    return gauss_legendre(order)


def outside_square_integral(ux, uy, half_width, alpha, order=24):
    """``int_{R^2 minus (Q+u)} |y|^-alpha dy`` with ``Q = [-N, N]^2``.

    Polar integration from the origin: each side of the shifted square at
    perpendicular distance ``d`` contributes
    ``d^(2-alpha)/(alpha-2) * int cos(phi)^(alpha-2) dphi`` over the angles it
    subtends, evaluated by Gauss-Legendre.
    """
    ux, uy = np.broadcast_arrays(np.atleast_1d(np.asarray(ux, float)),
                                 np.atleast_1d(np.asarray(uy, float)))
    N = float(half_width)
    t, w = _angle_rule(order)
    total = np.zeros(ux.shape)
    # (distance to side, tangential extent lo, hi)
    sides = (
        (N + ux, uy - N, uy + N),
        (N - ux, -uy - N, -uy + N),
        (N + uy, -ux - N, -ux + N),
        (N - uy, ux - N, ux + N),
    )
    for d, lo, hi in sides:
        p0 = np.arctan2(lo, d)
        p1 = np.arctan2(hi, d)
        phi = p0[:, None] + (p1 - p0)[:, None] * t[None, :]
        ang = (np.cos(phi) ** (alpha - 2)) @ w * (p1 - p0)
        total += d ** (2 - alpha) * ang
    return total / (alpha - 2)


def log_laplace(c, ux, uy, alpha, n, include_origin):
    """Truncated log-sum, tail estimate and certified bounds.

    Returns ``(window, tail_estimate, residual, tail_bound)`` where the full
    log-sum lies in ``[window, window + tail_bound]`` and within ``residual``
    of ``window + tail_estimate``.
    """
    c = np.atleast_1d(np.asarray(c, float))
    window = window_logsum(c, ux, uy, alpha, n, include_origin)
    bound = c * ring_bound(n, alpha)
    if n >= 1:
        est = c * outside_square_integral(ux, uy, n + 0.5, alpha)
        res = tail_residual(c, n, alpha)
        # the true tail lies in [0, bound]; clip the estimate accordingly
        est = np.clip(est, 0.0, bound)
        res = np.minimum(res, bound)
    else:
        est = 0.5 * bound
        res = 0.5 * bound
    return window, est, res, bound
