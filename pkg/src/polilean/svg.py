"""Dependency-free SVG figures: embedding scatters and confusion heatmaps.

Output is a pure function of the inputs (fixed float formatting, sorted
drawing order), so identical inputs give identical bytes.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError

WIDTH = 640
HEIGHT = 520
PLOT = 440  # square plotting area
MARGIN = 40


def _f(x: float) -> str:
    return f"{x:.2f}"


def _open(width: int, height: int, title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]


def scatter_svg(points, groups, order: list[str], colors: dict[str, str], title: str = "") -> str:
    """Scatter of 2-D ``points`` coloured by ``groups`` with one legend row per group in ``order``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError(f"scatter needs 2-D points, got shape {pts.shape}; reduce the embedding first")
    if len(groups) != len(pts):
        raise DataError("points and groups differ in length")
    lo = pts.min(axis=0) if len(pts) else np.zeros(2)
    span = np.ptp(pts, axis=0) if len(pts) else np.ones(2)
    span = np.where(span > 0, span, 1.0)
    xy = (pts - lo) / span
    out = _open(WIDTH, HEIGHT, title)
    if title:
        out.append(f'<text x="{MARGIN}" y="24" font-size="16">{escape(title)}</text>')
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="#999999"/>')
    rank = {g: i for i, g in enumerate(order)}
    drawn = sorted(range(len(pts)), key=lambda i: (rank.get(groups[i], len(rank)), i))
    for i in drawn:
        x = MARGIN + 5 + xy[i, 0] * (PLOT - 10)
        y = MARGIN + PLOT - 5 - xy[i, 1] * (PLOT - 10)
        out.append(f'<circle class="point" cx="{_f(x)}" cy="{_f(y)}" r="3" '
                   f'fill="{colors.get(groups[i], "#777777")}" fill-opacity="0.8"><title>{escape(str(groups[i]))}</title></circle>')
    lx = MARGIN + PLOT + 20
    for j, g in enumerate(order):
        y = MARGIN + 10 + 22 * j
        out.append(f'<g class="legend-entry"><circle cx="{lx}" cy="{y}" r="6" fill="{colors.get(g, "#777777")}"/>'
                   f'<text x="{lx + 12}" y="{y + 5}" font-size="13">{escape(g)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def confusion_svg(conf, class_names: list[str], title: str = "") -> str:
    """Row-normalised heatmap (rows gold, columns predicted) annotated with counts."""
    conf = np.asarray(conf, dtype=np.int64)
    K = len(class_names)
    if conf.shape != (K, K):
        raise DataError(f"confusion shape {conf.shape} does not match {K} classes")
    cell = max(30, min(70, 420 // max(K, 1)))
    left, top = 90, 70
    width = left + cell * K + 30
    height = top + cell * K + 30
    rows = conf.sum(axis=1, keepdims=True)
    frac = np.divide(conf, rows, out=np.zeros(conf.shape), where=rows > 0)
    out = _open(width, height, title)
    if title:
        out.append(f'<text x="10" y="22" font-size="15">{escape(title)}</text>')
    out.append(f'<text x="{left}" y="{top - 30}" font-size="11">predicted</text>')
    for j, name in enumerate(class_names):
        out.append(f'<text x="{_f(left + cell * (j + 0.5))}" y="{top - 8}" font-size="11" '
                   f'text-anchor="middle">{escape(name)}</text>')
    for i, name in enumerate(class_names):
        y = top + cell * i
        out.append(f'<text x="{left - 6}" y="{_f(y + cell / 2 + 4)}" font-size="11" text-anchor="end">{escape(name)}</text>')
        for j in range(K):
            shade = int(round(255 * (1 - frac[i, j])))
            fill = f"#{shade:02x}{shade:02x}ff"
            ink = "#ffffff" if frac[i, j] > 0.6 else "#000000"
            x = left + cell * j
            out.append(f'<rect class="cell" x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="#ffffff"/>')
            out.append(f'<text x="{_f(x + cell / 2)}" y="{_f(y + cell / 2 + 4)}" font-size="11" '
                       f'text-anchor="middle" fill="{ink}">{conf[i, j]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
