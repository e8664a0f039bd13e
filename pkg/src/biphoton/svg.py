"""Minimal SVG heatmap writer (one rect per cell, linear or log color ramp)."""
from __future__ import annotations

import math

import numpy as np

# viridis-like ramp endpoints and midpoint
_RAMP = np.array([[68, 1, 84], [33, 145, 140], [253, 231, 37]], float)


def _color(t: float) -> str:
    if not math.isfinite(t):
        return "#808080"
    t = min(max(t, 0.0), 1.0)
    seg = min(int(t * 2), 1)
    local = t * 2 - seg
    rgb = _RAMP[seg] * (1 - local) + _RAMP[seg + 1] * local
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def heatmap_svg(x, y, values, title: str = "", log: bool = False, cell: int = 8) -> str:
    """SVG text for ``values[i, j]`` at (x[i], y[j]); x runs right and y runs up."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    v = np.asarray(values, float)
    if v.shape != (len(x), len(y)):
        raise ValueError("values must have shape (len(x), len(y))")
    data = v.copy()
    if log:
        positive = data[data > 0]
        floor = positive.min() if positive.size else 1.0
        data = np.log10(np.where(data > 0, data, floor))
    finite = data[np.isfinite(data)]
    lo, hi = (finite.min(), finite.max()) if finite.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    margin = 40
    width, height = cell * len(x) + 2 * margin, cell * len(y) + 2 * margin
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="{margin // 2}" font-size="12">{title}</text>',
    ]
    for i in range(len(x)):
        for j in range(len(y)):
            px = margin + i * cell
            py = margin + (len(y) - 1 - j) * cell
            out.append(
                f'<rect x="{px}" y="{py}" width="{cell}" height="{cell}" fill="{_color((data[i, j] - lo) / span)}"/>'
            )
    scale = "log10 " if log else ""
    out.append(
        f'<text x="{margin}" y="{height - margin // 4}" font-size="10">{scale}range [{lo:.4g}, {hi:.4g}]</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def table_heatmap(columns, rows, value_col: str, x_col: str, y_col: str, log: bool = False) -> str:
    """Reshape a long-format table into a grid and render it."""
    rows = np.asarray(rows, float)
    xi, yi, vi = (columns.index(c) for c in (x_col, y_col, value_col))
    xs = np.unique(rows[:, xi])
    ys = np.unique(rows[:, yi])
    grid = np.full((len(xs), len(ys)), np.nan)
    for r in rows:
        grid[np.searchsorted(xs, r[xi]), np.searchsorted(ys, r[yi])] = r[vi]
    return heatmap_svg(xs, ys, grid, title=value_col, log=log)
