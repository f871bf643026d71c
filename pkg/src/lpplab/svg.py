"""Deterministic SVG rendering: byte-identical output for equal input."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _doc(width: float, height: float, body: list) -> str:
    return (_HEADER
            + f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.2f} {height:.2f}">\n'
            + "\n".join(body) + "\n</svg>\n")


def heatmap(matrix, cell: float = 4.0) -> str:
    """Grayscale heatmap of a matrix; NaN renders as light red."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        raise ParameterError("empty matrix")
    finite = m[np.isfinite(m)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0
    body = []
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            v = m[i, j]
            if np.isfinite(v):
                level = int(round(255 * (1.0 - (v - lo) / span)))
                fill = f"rgb({level},{level},{level})"
            else:
                fill = "rgb(255,200,200)"
            body.append(f'<rect x="{j * cell:.2f}" y="{i * cell:.2f}" '
                        f'width="{cell:.2f}" height="{cell:.2f}" fill="{fill}"/>')
    return _doc(m.shape[1] * cell, m.shape[0] * cell, body)


def overlay(points, extent, radius: float = 2.0, size: float = 512.0) -> str:
    """Scatter overlay of a planar point set on a fixed extent.

    extent is (x_lo, x_hi, y_lo, y_hi); one circle per point.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise ParameterError("empty point set")
    x_lo, x_hi, y_lo, y_hi = extent
    sx = size / (x_hi - x_lo) if x_hi > x_lo else 1.0
    sy = size / (y_hi - y_lo) if y_hi > y_lo else 1.0
    body = []
    for x, y in pts:
        cx = (x - x_lo) * sx
        cy = (y_hi - y) * sy
        body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius:.2f}" fill="black"/>')
    return _doc(size, size, body)
