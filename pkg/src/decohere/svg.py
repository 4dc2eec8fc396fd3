"""Minimal SVG line plots (axes, log scales, polylines, legend)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    dashed: bool = False
    color: str | None = None


@dataclass
class LinePlot:
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    xlog: bool = False
    ylog: bool = False
    width: int = 640
    height: int = 440
    series: list = field(default_factory=list)

    def add(self, x, y, label="", dashed=False, color=None):
        self.series.append(Series(np.asarray(x, float), np.asarray(y, float), label, dashed, color))
        return self

    def _finite(self, s):
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if self.xlog:
            ok &= s.x > 0
        if self.ylog:
            ok &= s.y > 0
        return s.x[ok], s.y[ok]

    def _range(self, values, log):
        lo, hi = float(np.min(values)), float(np.max(values))
        if log:
            lo, hi = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
            if hi == lo:
                hi += 1
            return lo, hi
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.05 * (hi - lo)
        return lo - pad, hi + pad

    def _ticks(self, lo, hi, log):
        if log:
            step = max(1, int(math.ceil((hi - lo) / 8)))
            return [(v, f"1e{v}") for v in range(int(lo), int(hi) + 1, step)]
        raw = (hi - lo) / 6
        mag = 10 ** math.floor(math.log10(raw))
        step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag)
        start = math.ceil(lo / step) * step
        return [(v, f"{v:.3g}") for v in np.arange(start, hi + 1e-9 * step, step)]

    def render(self) -> str:
        left, right, top, bottom = 80, 20, 36 if self.title else 16, 56
        pw, ph = self.width - left - right, self.height - top - bottom
        data = [self._finite(s) for s in self.series]
        xs = np.concatenate([d[0] for d in data]) if data else np.array([])
        ys = np.concatenate([d[1] for d in data]) if data else np.array([])
        if xs.size == 0:
            xs, ys = np.array([1.0, 10.0]), np.array([1.0, 10.0])
        xr, yr = self._range(xs, self.xlog), self._range(ys, self.ylog)

        def px(x):
            v = np.log10(x) if self.xlog else x
            return left + (v - xr[0]) / (xr[1] - xr[0]) * pw

        def py(y):
            v = np.log10(y) if self.ylog else y
            return top + ph - (v - yr[0]) / (yr[1] - yr[0]) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
               f'font-family="sans-serif" font-size="12">',
               f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        for v, text in self._ticks(*xr, self.xlog):
            x = left + (v - xr[0]) / (xr[1] - xr[0]) * pw
            out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{escape(text)}</text>')
        for v, text in self._ticks(*yr, self.ylog):
            y = top + ph - (v - yr[0]) / (yr[1] - yr[0]) * ph
            out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{escape(text)}</text>')
        out.append(f'<text x="{left + pw / 2:.1f}" y="{self.height - 12}" text-anchor="middle">'
                   f'{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{self.width / 2:.1f}" y="22" text-anchor="middle">{escape(self.title)}</text>')
        for i, (s, (x, y)) in enumerate(zip(self.series, data)):
            if x.size == 0:
                continue
            color = s.color or PALETTE[i % len(PALETTE)]
            dash = ' stroke-dasharray="6 4"' if s.dashed else ""
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        labelled = [(i, s) for i, s in enumerate(self.series) if s.label]
        for row, (i, s) in enumerate(labelled):
            color = s.color or PALETTE[i % len(PALETTE)]
            y = top + 14 + 16 * row
            dash = ' stroke-dasharray="6 4"' if s.dashed else ""
            out.append(f'<line x1="{left + pw - 150}" y1="{y - 4}" x2="{left + pw - 125}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{left + pw - 120}" y="{y}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        return path
