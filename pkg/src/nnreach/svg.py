"""Static SVG plots of reach sets.

Output is plain SVG 1.1 with no external references. Coordinates are printed
with fixed precision so identical inputs give byte-identical files. Only the
geometry is meaningful; colours come from ``PALETTE``, a sequential blue
ramp ordered coarse (light) to fine (dark).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["PALETTE", "plot_boxes_2d", "plot_tube"]

PALETTE = ("#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#08519c", "#08306b")
TRAJ_COLOR = "#cb181d"

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 55


def _f(x: float) -> str:
    return f"{x:.3f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


class _Canvas:
    def __init__(self, xlim: tuple[float, float], ylim: tuple[float, float]):
        self.x0, self.x1 = self._pad(*xlim)
        self.y0, self.y1 = self._pad(*ylim)
        self.items: list[str] = []

    @staticmethod
    def _pad(lo: float, hi: float) -> tuple[float, float]:
        span = hi - lo
        if span <= 0:
            span = max(abs(lo), 1.0) * 0.1
            return lo - span, hi + span
        return lo - 0.05 * span, hi + 0.05 * span

    def px(self, x: float) -> float:
        return MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        return HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)

    def rect(self, xlo: float, xhi: float, ylo: float, yhi: float, cls: str, style: str) -> None:
        x, y = self.px(xlo), self.py(yhi)
        w, h = self.px(xhi) - x, self.py(ylo) - y
        self.items.append(
            f'<rect class="{cls}" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" style="{style}"/>'
        )

    def polyline(self, xs: Sequence[float], ys: Sequence[float], cls: str, style: str) -> None:
        pts = " ".join(f"{_f(self.px(a))},{_f(self.py(b))}" for a, b in zip(xs, ys))
        self.items.append(f'<polyline class="{cls}" points="{pts}" style="{style}"/>')

    def circle(self, x: float, y: float, cls: str, style: str, r: float = 1.2) -> None:
        self.items.append(
            f'<circle class="{cls}" cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="{_f(r)}" style="{style}"/>'
        )

    def axes(self, xlabel: str, ylabel: str, title: str) -> None:
        left, right = MARGIN_L, WIDTH - MARGIN_R
        top, bottom = MARGIN_T, HEIGHT - MARGIN_B
        ax = [
            f'<line class="axis" x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" style="stroke:#000"/>',
            f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" style="stroke:#000"/>',
        ]
        for t in _nice_ticks(self.x0, self.x1):
            x = self.px(t)
            ax.append(f'<line class="tick" x1="{_f(x)}" y1="{bottom}" x2="{_f(x)}" y2="{bottom + 5}" style="stroke:#000"/>')
            ax.append(f'<text x="{_f(x)}" y="{bottom + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
        for t in _nice_ticks(self.y0, self.y1):
            y = self.py(t)
            ax.append(f'<line class="tick" x1="{left - 5}" y1="{_f(y)}" x2="{left}" y2="{_f(y)}" style="stroke:#000"/>')
            ax.append(f'<text x="{left - 8}" y="{_f(y + 4)}" text-anchor="end" font-size="11">{t:g}</text>')
        ax.append(
            f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>'
        )
        ax.append(
            f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 16 {(top + bottom) / 2:.1f})">{escape(ylabel)}</text>'
        )
        if title:
            ax.append(f'<text x="{(left + right) / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')
        self.items.extend(ax)

    def write(self, path: str | Path) -> None:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" style="fill:#ffffff"/>\n'
        )
        Path(path).write_text(head + "\n".join(self.items) + "\n</svg>\n", encoding="utf-8")


def plot_boxes_2d(
    path: str | Path,
    lower: np.ndarray,
    upper: np.ndarray,
    *,
    points: np.ndarray | None = None,
    dims: tuple[int, int] = (0, 1),
    title: str = "",
) -> None:
    """One ``rect.tube`` per box, a ``rect.hull`` outline, optional sample dots."""
    i, j = dims
    lo, hi = np.asarray(lower), np.asarray(upper)
    xlim = (float(lo[:, i].min()), float(hi[:, i].max()))
    ylim = (float(lo[:, j].min()), float(hi[:, j].max()))
    c = _Canvas(xlim, ylim)
    style = f"fill:{PALETTE[2]};fill-opacity:0.35;stroke:{PALETTE[5]};stroke-width:0.4"
    for a, b in zip(lo, hi):
        c.rect(a[i], b[i], a[j], b[j], "tube", style)
    c.rect(xlim[0], xlim[1], ylim[0], ylim[1], "hull", "fill:none;stroke:#000000;stroke-width:1;stroke-dasharray:4 2")
    if points is not None:
        for p in np.asarray(points):
            c.circle(p[i], p[j], "sample", f"fill:{TRAJ_COLOR}", r=0.8)
    c.axes(f"y{i + 1}", f"y{j + 1}", title)
    c.write(path)


def plot_tube(
    path: str | Path,
    bands: Sequence[tuple[str, np.ndarray, np.ndarray]],
    *,
    trajectories: Sequence[np.ndarray] = (),
    dim: int = 0,
    title: str = "",
) -> None:
    """Per-step interval bands against ``k``, drawn in the given order.

    ``bands`` holds ``(label, lower, upper)`` with one row per step. Each
    step becomes a ``rect.band`` one time unit wide, centred on ``k``.
    Trajectories are drawn on top as polylines.
    """
    if not bands:
        raise ValueError("nothing to plot")
    n_steps = max(lo.shape[0] for _, lo, _ in bands)
    ylo = min(float(lo[:, dim].min()) for _, lo, _ in bands)
    yhi = max(float(hi[:, dim].max()) for _, _, hi in bands)
    for t in trajectories:
        ylo, yhi = min(ylo, float(t[:, dim].min())), max(yhi, float(t[:, dim].max()))
    c = _Canvas((-0.5, n_steps - 0.5), (ylo, yhi))
    for r, (label, lo, hi) in enumerate(bands):
        colour = PALETTE[min(2 * r + 1, len(PALETTE) - 1)] if len(bands) > 1 else PALETTE[3]
        style = f"fill:{colour};fill-opacity:0.8;stroke:none"
        c.items.append(f"<g class=\"run\" data-label=\"{escape(label)}\">")
        for k in range(lo.shape[0]):
            c.rect(k - 0.5, k + 0.5, lo[k, dim], hi[k, dim], "band", style)
        c.items.append("</g>")
    for t in trajectories:
        ks = list(range(t.shape[0]))
        c.polyline(ks, t[:, dim], "trajectory", f"fill:none;stroke:{TRAJ_COLOR};stroke-width:0.6")
    if len(bands) > 1:
        for r, (label, _, _) in enumerate(bands):
            colour = PALETTE[min(2 * r + 1, len(PALETTE) - 1)]
            y = MARGIN_T + 6 + 16 * r
            c.items.append(
                f'<rect class="legend" x="{WIDTH - MARGIN_R - 110}" y="{y}" width="12" height="10" style="fill:{colour}"/>'
            )
            c.items.append(f'<text x="{WIDTH - MARGIN_R - 94}" y="{y + 9}" font-size="11">{escape(label)}</text>')
    c.axes("k", f"x{dim + 1}(k)", title)
    c.write(path)
