"""Minimal self-contained SVG line and scatter plots."""

from __future__ import annotations

import math
from html import escape

import numpy as np

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=20, top=40, bottom=60)
MAX_POINTS = 4000


def _nice_ticks(lo, hi, n=6):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt(v):
    return f"{v:.6g}"


def _range(values, pad=0.05):
    values = np.asarray(values, float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return 0.0, 1.0
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        d = abs(lo) * 0.1 or 1.0
        return lo - d, hi + d
    d = (hi - lo) * pad
    return lo - d, hi + d


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def px(self, x):
        return self.left + (np.asarray(x, float) - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y):
        return self.bottom - (np.asarray(y, float) - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _axes(fr, title, xlabel, ylabel):
    out = [
        f'<rect x="{fr.left}" y="{fr.top}" width="{fr.right - fr.left}" height="{fr.bottom - fr.top}" '
        'fill="none" stroke="#444"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for x in _nice_ticks(fr.x0, fr.x1):
        X = float(fr.px(x))
        out.append(f'<line x1="{X:.2f}" y1="{fr.bottom}" x2="{X:.2f}" y2="{fr.bottom + 5}" stroke="#444"/>')
        out.append(f'<text x="{X:.2f}" y="{fr.bottom + 20}" text-anchor="middle" font-size="11">{_fmt(x)}</text>')
    for y in _nice_ticks(fr.y0, fr.y1):
        Y = float(fr.py(y))
        out.append(f'<line x1="{fr.left - 5}" y1="{Y:.2f}" x2="{fr.left}" y2="{Y:.2f}" stroke="#444"/>')
        out.append(f'<text x="{fr.left - 8}" y="{Y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(y)}</text>')
    return out


def _document(body, source, columns):
    meta = escape(f"source={source}; columns={','.join(columns)}")
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
            f"<metadata>{meta}</metadata>",
            f'<defs><clipPath id="plot"><rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" '
            f'width="{WIDTH - MARGIN["left"] - MARGIN["right"]}" '
            f'height="{HEIGHT - MARGIN["top"] - MARGIN["bottom"]}"/></clipPath></defs>',
            '<rect width="100%" height="100%" fill="white"/>',
            *body,
            "</svg>",
            "",
        ]
    )


def _stride(n):
    return max(1, math.ceil(n / MAX_POINTS))


def line_plot(x, series, *, title, xlabel, ylabel, source, x_column, ylim=None):
    """``series`` is a list of (column, values, color); x is shared and read from ``x_column``."""
    x = np.asarray(x, float)
    step = _stride(x.size)
    ys = [np.asarray(v, float) for _, v, _ in series]
    fr = _Frame(_range(x, 0.0), ylim or _range(np.concatenate(ys)))
    body = _axes(fr, title, xlabel, ylabel)
    for (name, _, color), y in zip(series, ys):
        keep = np.isfinite(y)
        xs, yv = fr.px(x[keep][::step]), fr.py(y[keep][::step])
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, yv))
        body.append(
            f'<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.3" '
            f'data-column="{escape(name)}" points="{pts}"/>'
        )
    for k, (name, _, color) in enumerate(series):
        y = MARGIN["top"] + 16 + 16 * k
        body.append(f'<line x1="{WIDTH - 150}" y1="{y - 4}" x2="{WIDTH - 130}" y2="{y - 4}" stroke="{color}"/>')
        body.append(f'<text x="{WIDTH - 125}" y="{y}" font-size="12">{escape(name)}</text>')
    return _document(body, source, [x_column, *(n for n, _, _ in series)])


def scatter_plot(x, y, *, title, xlabel, ylabel, source, columns, color="#1f4e9c", radius=1.3):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    fr = _Frame(_range(x), _range(y))
    body = _axes(fr, title, xlabel, ylabel)
    body.append(f'<g fill="{color}" clip-path="url(#plot)">')
    for a, b in zip(fr.px(x), fr.py(y)):
        body.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{radius}"/>')
    body.append("</g>")
    return _document(body, source, columns)
