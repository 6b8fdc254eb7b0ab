"""Minimal SVG output for chains, discriminant clouds, branches and curves."""

from __future__ import annotations

from typing import Iterable, Optional
from xml.sax.saxutils import escape

import numpy as np


class Canvas:
    """Plane figure with a fixed data window mapped to a square-pixel viewport."""

    def __init__(self, xmin, xmax, ymin, ymax, width: int = 640, pad: float = 0.05):
        dx, dy = xmax - xmin, ymax - ymin
        xmin, xmax = xmin - pad * dx, xmax + pad * dx
        ymin, ymax = ymin - pad * dy, ymax + pad * dy
        self.x0, self.y1 = xmin, ymax
        self.scale = width / max(xmax - xmin, 1e-300)
        self.width = width
        self.height = int(round((ymax - ymin) * self.scale))
        self.items: list = []

    @classmethod
    def fit(cls, points: np.ndarray, width: int = 640, square: bool = True) -> "Canvas":
        pts = np.asarray(points, dtype=complex)
        xmin, xmax = pts.real.min(), pts.real.max()
        ymin, ymax = pts.imag.min(), pts.imag.max()
        if square:
            half = max(xmax - xmin, ymax - ymin, 1e-9) / 2
            cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
            xmin, xmax, ymin, ymax = cx - half, cx + half, cy - half, cy + half
        return cls(xmin, xmax, ymin, ymax, width)

    def _xy(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real - self.x0) * self.scale, (self.y1 - z.imag) * self.scale

    def polyline(self, z, color="black", width=1.0, dashed=False, opacity=1.0):
        x, y = self._xy(z)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="5,3"' if dashed else ""
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                          f'stroke-width="{width}" stroke-opacity="{opacity}"{dash}/>')

    def circle(self, center, radius, color="#999", width=0.5, opacity=0.5):
        x, y = self._xy(center)
        self.items.append(f'<circle cx="{float(x):.2f}" cy="{float(y):.2f}" r="{radius * self.scale:.2f}" '
                          f'fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}"/>')

    def points(self, z, color="red", size=1.5):
        x, y = self._xy(z)
        for a, b in zip(np.atleast_1d(x), np.atleast_1d(y)):
            self.items.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{size}" fill="{color}"/>')

    def text(self, z, label, color="black", size=12):
        x, y = self._xy(z)
        self.items.append(f'<text x="{float(x) + 4:.2f}" y="{float(y) - 4:.2f}" font-size="{size}" '
                          f'fill="{color}">{escape(label)}</text>')

    def render(self, title: str = "") -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        body = [f"<title>{escape(title)}</title>"] if title else []
        body.append(f'<rect width="{self.width}" height="{self.height}" fill="white"/>')
        return "\n".join([head, *body, *self.items, "</svg>"]) + "\n"

    def save(self, path, title: str = ""):
        with open(path, "w") as fh:
            fh.write(self.render(title))


def chain_envelope(canvas: Canvas, centers, radii, every: int = 8):
    for c, r in zip(np.asarray(centers)[::every], np.asarray(radii)[::every]):
        if r > 0:
            canvas.circle(c, r)


def line_plot(series: dict, path, title: str = "", logy: bool = False, width: int = 640, height: int = 400):
    """Simple x/y line chart; ``series`` maps label -> (x, y)."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    if logy:
        ys = np.log10(np.maximum(ys, 1e-300))
    finite = np.isfinite(ys)
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = (float(ys[finite].min()), float(ys[finite].max())) if finite.any() else (0.0, 1.0)
    if ymax == ymin:
        ymax = ymin + 1
    if xmax == xmin:
        xmax = xmin + 1
    m = 50

    def px(x):
        return m + (np.asarray(x) - xmin) / (xmax - xmin) * (width - 2 * m)

    def py(y):
        return height - m - (np.asarray(y) - ymin) / (ymax - ymin) * (height - 2 * m)

    items = [f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
             f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
             f'<text x="{m}" y="{m - 10}" font-size="12">{escape(title)}</text>',
             f'<text x="{m}" y="{height - m + 20}" font-size="10">{xmin:.3g}</text>',
             f'<text x="{width - m}" y="{height - m + 20}" font-size="10">{xmax:.3g}</text>',
             f'<text x="4" y="{height - m}" font-size="10">{("1e%.1f" % ymin) if logy else ("%.3g" % ymin)}</text>',
             f'<text x="4" y="{m}" font-size="10">{("1e%.1f" % ymax) if logy else ("%.3g" % ymax)}</text>']
    for k, (label, (x, y)) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        if logy:
            y = np.log10(np.maximum(y, 1e-300))
        col = colors[k % len(colors)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)) if np.isfinite(b))
        items.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.2"/>')
        items.append(f'<text x="{width - m - 120}" y="{m + 14 * (k + 1)}" font-size="11" fill="{col}">{escape(str(label))}</text>')
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">\n' + "\n".join(items) + "\n</svg>\n")
    with open(path, "w") as fh:
        fh.write(svg)
