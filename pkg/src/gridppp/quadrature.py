"""Vectorised adaptive quadrature.

The 1-D integrator is a Gauss-Kronrod (7, 15) rule with global interval
bisection.  Integrands receive every node of every active interval in one
array, so a single numpy call evaluates a whole refinement sweep.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureSpec", "QuadratureError", "integrate", "cubature", "gauss_legendre", "DEFAULT_QUAD"]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


class QuadratureError(RuntimeError):
    """Raised when refinement stops before the requested tolerance is met."""

    def __init__(self, message, value=None, achieved=None):
        super().__init__(message)
        self.value = value
        self.achieved = achieved


# Kronrod 15-point nodes on [-1, 1]; the odd-indexed ones are the Gauss 7-point nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_batch(f, a, b):
    """Apply G7/K15 to each interval ``[a_i, b_i]``; return (kronrod, |K - G|)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = h * (y @ _KW)
    g = h * (y @ _GW)
    return k, np.abs(k - g)


def integrate(f, a, b, breakpoints=(), spec: QuadratureSpec = DEFAULT_QUAD, strict=True):
    """Integrate vectorised ``f`` over the finite interval ``[a, b]``.

    Returns ``(value, error_estimate)``.  ``breakpoints`` inside ``(a, b)`` are
    used as initial subdivision points (kinks of the integrand).  With
    ``strict`` a :class:`QuadratureError` carrying the achieved error is raised
    when the tolerance is not reached within ``spec.max_depth`` bisections.
    """
    if b < a:
        v, e = integrate(f, b, a, breakpoints, spec, strict)
        return -v, e
    if a == b:
        return 0.0, 0.0
    edges = np.unique(np.concatenate([[a], [p for p in breakpoints if a < p < b], [b]]))
    lo, hi = edges[:-1], edges[1:]
    vals, errs = _gk_batch(f, lo, hi)
    # heap of (-err, lo, hi, val, depth)
    heap = [(-e, l, h, v, 0) for l, h, v, e in zip(lo, hi, vals, errs)]
    heapq.heapify(heap)
    total = float(np.sum(vals))
    err = float(np.sum(errs))
    while err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        # split every interval carrying a sizeable share of the error
        thresh = -heap[0][0] / 4
        batch = []
        while heap and -heap[0][0] >= thresh:
            batch.append(heapq.heappop(heap))
        if any(item[4] >= spec.max_depth for item in batch):
            for item in batch:
                heapq.heappush(heap, item)
            if strict:
                raise QuadratureError(
                    f"quadrature did not converge: error estimate {err:.3g}", total, err
                )
            break
        blo = np.array([it[1] for it in batch])
        bhi = np.array([it[2] for it in batch])
        mid = 0.5 * (blo + bhi)
        nlo = np.concatenate([blo, mid])
        nhi = np.concatenate([mid, bhi])
        nv, ne = _gk_batch(f, nlo, nhi)
        depth = [it[4] + 1 for it in batch] * 2
        total -= sum(it[3] for it in batch)
        err -= sum(-it[0] for it in batch)
        total += float(np.sum(nv))
        err += float(np.sum(ne))
        for l, h, v, e, d in zip(nlo, nhi, nv, ne, depth):
            heapq.heappush(heap, (-e, l, h, v, d))
        # re-sum to avoid drift from the running updates
        total = float(sum(it[3] for it in heap))
        err = float(sum(-it[0] for it in heap))
    return total, err


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gk2_batch(f, x0, x1, y0, y1, ncomp):
    """Tensor G7/K15 on rectangles; returns (kronrod[m, R], err, err_x, err_y)."""
    cx, hx = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    cy, hy = 0.5 * (y0 + y1), 0.5 * (y1 - y0)
    xs = cx[:, None] + hx[:, None] * _NODES[None, :]
    ys = cy[:, None] + hy[:, None] * _NODES[None, :]
    X = np.broadcast_to(xs[:, :, None], (len(x0), 15, 15))
    Y = np.broadcast_to(ys[:, None, :], (len(x0), 15, 15))
    vals = np.asarray(f(X.ravel(), Y.ravel()), dtype=float)
    vals = vals.reshape((ncomp, len(x0), 15, 15))
    area = hx * hy
    kk = np.einsum("mrij,i,j->mr", vals, _KW, _KW) * area
    gk = np.einsum("rij,i,j->r", vals[0], _GW, _KW) * area
    kg = np.einsum("rij,i,j->r", vals[0], _KW, _GW) * area
    gg = np.einsum("rij,i,j->r", vals[0], _GW, _GW) * area
    return kk, np.abs(kk[0] - gg), np.abs(kk[0] - gk), np.abs(kk[0] - kg)


def cubature(f, x0, x1, y0, y1, spec: QuadratureSpec = DEFAULT_QUAD, strict=True, ncomp=1):
    """Adaptive tensor Gauss-Kronrod cubature over ``[x0, x1] x [y0, y1]``.

    ``f(x, y)`` receives flat node arrays and returns either a flat array or,
    with ``ncomp > 1``, an ``(ncomp, N)`` array.  Refinement is driven by the
    first component; the others ride along on the same nodes.  Each split
    halves a rectangle along the axis with the larger one-dimensional error
    indicator.  Returns ``(values, error_estimate)`` where ``values`` is a
    float for ``ncomp == 1`` and an array otherwise.
    """
    if x1 <= x0 or y1 <= y0:
        return (0.0 if ncomp == 1 else np.zeros(ncomp)), 0.0

    def run(rx0, rx1, ry0, ry1):
        return _gk2_batch(f, rx0, rx1, ry0, ry1, ncomp)

    boxes = np.array([[x0, x1, y0, y1]], dtype=float)
    kk, err, ex, ey = run(*boxes.T)
    depth = np.zeros(1, dtype=int)
    while True:
        total = kk.sum(axis=1)
        etot = float(err.sum())
        if etot <= max(spec.abs_tol, spec.rel_tol * abs(total[0])):
            break
        sel = err >= err.max() / 4
        if np.any(depth[sel] >= spec.max_depth):
            if strict:
                raise QuadratureError(
                    f"cubature did not converge: error estimate {etot:.3g}", total[0], etot
                )
            break
        b = boxes[sel]
        split_x = ex[sel] >= ey[sel]
        mx = 0.5 * (b[:, 0] + b[:, 1])
        my = 0.5 * (b[:, 2] + b[:, 3])
        first = b.copy()
        second = b.copy()
        first[split_x, 1] = mx[split_x]
        second[split_x, 0] = mx[split_x]
        first[~split_x, 3] = my[~split_x]
        second[~split_x, 2] = my[~split_x]
        new = np.concatenate([first, second])
        nk, ne, nex, ney = run(*new.T)
        keep = ~sel
        boxes = np.concatenate([boxes[keep], new])
        kk = np.concatenate([kk[:, keep], nk], axis=1)
        err = np.concatenate([err[keep], ne])
        ex = np.concatenate([ex[keep], nex])
        ey = np.concatenate([ey[keep], ney])
        nd = depth[sel] + 1
        depth = np.concatenate([depth[keep], nd, nd])
    total = kk.sum(axis=1)
    return (float(total[0]) if ncomp == 1 else total), etot
