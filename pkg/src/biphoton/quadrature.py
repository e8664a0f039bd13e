"""Vectorized, globally adaptive Gauss-Kronrod (7/15) quadrature in one and two dimensions.

Integrands receive node arrays and return values with the node shape leading
and an optional trailing component axis, so vector-valued integrands (all the
entries of a density matrix at once) share one adaptive mesh.  The error of a
vector integral is the largest componentwise error.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "integrate_1d",
    "integrate_2d",
    "feature_breakpoints",
    "gk15_nodes",
]

# 15-point Kronrod abscissae on [0, 1] (descending) and weights, QUADPACK qk15
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])


def gk15_nodes():
    """Nodes on [-1, 1] with Kronrod weights and embedded Gauss weights (zero off the Gauss nodes)."""
    nodes = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
    wk = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
    wg_half = np.zeros(8)
    wg_half[1::2] = _WG
    wg = np.concatenate([wg_half[:-1], [wg_half[-1]], wg_half[-2::-1]])
    return nodes, wk, wg


_NODES, _WK, _WG_FULL = gk15_nodes()
_WDIFF = _WK - _WG_FULL


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    window_halfwidth: float | None = None
    max_subdivisions: int = 20000
    # extrapolate spectral integrals to an infinite window (three windows W, 2W, 4W)
    tail_extrapolation: bool = False

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError("rel_tol must lie in (0, 1e-3]")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    def window(self, *scales: float, factor: float = 50.0) -> float:
        """Detuning half-window: the explicit one, else ``factor`` times the largest feature scale."""
        minimum = 20.0 * max(1.0, *(abs(s) for s in scales))
        if self.window_halfwidth is not None:
            if self.window_halfwidth < minimum:
                raise ValueError(f"window half-width must be at least {minimum:g}")
            return float(self.window_halfwidth)
        return factor * max(1.0, *(abs(s) for s in scales))


@dataclass
class QuadResult:
    value: np.ndarray | complex | float
    error: float
    converged: bool
    n_regions: int = 0
    n_evals: int = 0
    message: str = field(default="")


def feature_breakpoints(lo: float, hi: float, features) -> np.ndarray:
    """Sorted breakpoints in [lo, hi], refined geometrically around each (center, width) feature."""
    pts = [lo, hi]
    span = hi - lo
    for center, width in features:
        pts.append(center)
        w = max(abs(width), 1e-12)
        while w < span:
            pts.extend((center - w, center + w))
            w *= 4.0
    arr = np.unique(np.clip(np.asarray(pts, float), lo, hi))
    # drop points closer than a relative hair to their neighbour
    keep = np.concatenate([[True], np.diff(arr) > 1e-13 * max(1.0, span)])
    arr = arr[keep]
    arr[-1] = hi
    return arr


def _tolerance(total, spec: QuadratureSpec) -> float:
    return max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(total))) if np.size(total) else 0.0)


def _rule_1d(f, a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x))
    comp = y.shape[2:]
    y = y.reshape(len(a), 15, -1)
    val = np.einsum("n,inc->ic", _WK, y) * half[:, None]
    err = np.einsum("n,inc->ic", _WDIFF, y) * half[:, None]
    return val, np.max(np.abs(err), axis=1), comp


def integrate_1d(f, lo: float, hi: float, spec: QuadratureSpec | None = None, breakpoints=()) -> QuadResult:
    """Adaptive integral of a vectorized ``f`` over [lo, hi].

    ``f`` maps an array of abscissae to values of the same leading shape,
    optionally with trailing component axes.
    """
    spec = spec or QuadratureSpec()
    if not hi > lo:
        raise ValueError("need hi > lo")
    edges = np.unique(np.concatenate([[lo, hi], np.clip(np.asarray(breakpoints, float), lo, hi)]))
    a, b = edges[:-1], edges[1:]
    vals, errs, comp = _rule_1d(f, a, b)
    n_evals = 15 * len(a)
    heap = [(-errs[i], i) for i in range(len(a))]
    heapq.heapify(heap)
    intervals = {i: (a[i], b[i], vals[i], errs[i]) for i in range(len(a))}
    next_id = len(a)
    total = vals.sum(axis=0)
    total_err = float(errs.sum())
    converged = total_err <= _tolerance(total, spec)
    while not converged and len(intervals) < spec.max_subdivisions:
        # split a batch of the worst intervals together to amortize the numpy overhead
        batch = []
        budget = total_err - 0.5 * _tolerance(total, spec)
        while heap and len(batch) < 64:
            neg_err, idx = heapq.heappop(heap)
            batch.append(idx)
            budget += neg_err
            if budget <= 0:
                break
        olds = [intervals.pop(i) for i in batch]
        aa = np.array([o[0] for o in olds])
        bb = np.array([o[1] for o in olds])
        mid = 0.5 * (aa + bb)
        new_a = np.concatenate([aa, mid])
        new_b = np.concatenate([mid, bb])
        nv, ne, _ = _rule_1d(f, new_a, new_b)
        n_evals += 15 * len(new_a)
        for o in olds:
            total = total - o[2]
            total_err -= o[3]
        for k in range(len(new_a)):
            intervals[next_id] = (new_a[k], new_b[k], nv[k], ne[k])
            heapq.heappush(heap, (-ne[k], next_id))
            next_id += 1
        total = total + nv.sum(axis=0)
        total_err += float(ne.sum())
        # recompute the sums now and then to shed accumulated rounding
        if next_id % 4096 < 2 * len(batch):
            total = np.sum([v[2] for v in intervals.values()], axis=0)
            total_err = float(sum(v[3] for v in intervals.values()))
        converged = total_err <= _tolerance(total, spec)
    value = total.reshape(comp) if comp else total.reshape(())[()]
    msg = "" if converged else f"1D quadrature not converged: error {total_err:.3g} after {len(intervals)} intervals"
    return QuadResult(value, total_err, converged, len(intervals), n_evals, msg)


def _rule_2d(f, x0, x1, y0, y1, chunk: int = 2048):
    """Tensor GK15 rule on rectangles: value, total error and per-axis error indicators."""
    vals, errs, ex, ey = [], [], [], []
    comp = ()
    for s in range(0, len(x0), chunk):
        sl = slice(s, s + chunk)
        hx = 0.5 * (x1[sl] - x0[sl])
        hy = 0.5 * (y1[sl] - y0[sl])
        xs = 0.5 * (x0[sl] + x1[sl])[:, None] + hx[:, None] * _NODES
        ys = 0.5 * (y0[sl] + y1[sl])[:, None] + hy[:, None] * _NODES
        X = np.broadcast_to(xs[:, :, None], (len(hx), 15, 15))
        Y = np.broadcast_to(ys[:, None, :], (len(hx), 15, 15))
        z = np.asarray(f(X, Y))
        comp = z.shape[3:]
        z = z.reshape(len(hx), 15, 15, -1)
        area = (hx * hy)[:, None]
        kx = np.einsum("m,rmnc->rnc", _WK, z)
        gx = np.einsum("m,rmnc->rnc", _WG_FULL, z)
        kk = np.einsum("n,rnc->rc", _WK, kx) * area
        gk = np.einsum("n,rnc->rc", _WK, gx) * area
        kg = np.einsum("n,rnc->rc", _WG_FULL, kx) * area
        e_x = np.max(np.abs(kk - gk), axis=1)
        e_y = np.max(np.abs(kk - kg), axis=1)
        vals.append(kk)
        errs.append(e_x + e_y)
        ex.append(e_x)
        ey.append(e_y)
    return np.concatenate(vals), np.concatenate(errs), np.concatenate(ex), np.concatenate(ey), comp


def integrate_2d(
    f,
    x_lo: float,
    x_hi: float,
    y_lo: float,
    y_hi: float,
    spec: QuadratureSpec | None = None,
    x_breaks=(),
    y_breaks=(),
) -> QuadResult:
    """Adaptive integral of a vectorized ``f(X, Y)`` over a rectangle.

    The initial mesh is the tensor product of the breakpoints; each round the
    rectangles carrying the largest errors are halved along the axis whose
    embedded-rule difference is larger.
    """
    spec = spec or QuadratureSpec()
    xe = np.unique(np.concatenate([[x_lo, x_hi], np.clip(np.asarray(x_breaks, float), x_lo, x_hi)]))
    ye = np.unique(np.concatenate([[y_lo, y_hi], np.clip(np.asarray(y_breaks, float), y_lo, y_hi)]))
    gx0, gy0 = np.meshgrid(xe[:-1], ye[:-1], indexing="ij")
    gx1, gy1 = np.meshgrid(xe[1:], ye[1:], indexing="ij")
    x0, x1, y0, y1 = (g.ravel().copy() for g in (gx0, gx1, gy0, gy1))
    vals, errs, ex, ey, comp = _rule_2d(f, x0, x1, y0, y1)
    n_evals = 225 * len(x0)
    converged = False
    while True:
        total = vals.sum(axis=0)
        total_err = float(errs.sum())
        tol = _tolerance(total, spec)
        if total_err <= tol:
            converged = True
            break
        if len(x0) >= spec.max_subdivisions:
            break
        order = np.argsort(errs)[::-1]
        # smallest set of worst rectangles whose removal would meet the tolerance
        cum = np.cumsum(errs[order])
        n_split = int(np.searchsorted(cum, total_err - 0.5 * tol)) + 1
        n_split = max(1, min(n_split, len(order), spec.max_subdivisions - len(x0), 4096))
        pick = order[:n_split]
        keep = np.ones(len(x0), bool)
        keep[pick] = False
        px0, px1, py0, py1 = x0[pick], x1[pick], y0[pick], y1[pick]
        along_x = ex[pick] >= ey[pick]
        xm = 0.5 * (px0 + px1)
        ym = 0.5 * (py0 + py1)
        # children: first and second halves
        c_x0 = np.concatenate([px0, np.where(along_x, xm, px0)])
        c_x1 = np.concatenate([np.where(along_x, xm, px1), px1])
        c_y0 = np.concatenate([py0, np.where(along_x, py0, ym)])
        c_y1 = np.concatenate([np.where(along_x, py1, ym), py1])
        nv, ne, nex, ney, _ = _rule_2d(f, c_x0, c_x1, c_y0, c_y1)
        n_evals += 225 * len(c_x0)
        x0 = np.concatenate([x0[keep], c_x0])
        x1 = np.concatenate([x1[keep], c_x1])
        y0 = np.concatenate([y0[keep], c_y0])
        y1 = np.concatenate([y1[keep], c_y1])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        ex = np.concatenate([ex[keep], nex])
        ey = np.concatenate([ey[keep], ney])
    total = vals.sum(axis=0)
    value = total.reshape(comp) if comp else total.reshape(())[()]
    msg = "" if converged else f"2D quadrature not converged: error {total_err:.3g} after {len(x0)} rectangles"
    return QuadResult(value, total_err, converged, len(x0), n_evals, msg)
