"""Minimal self-contained SVG line plots.

Decorative output only: acceptance checks and analysis operate on the data
files, never on these images.  Kept dependency-free on purpose.
"""

from __future__ import annotations

import math
from typing import Sequence

__all__ = ["line_plot"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
_W, _H = 860, 520
_ML, _MR, _MT, _MB = 72, 16, 34, 52


def _ticks(lo: float, hi: float, n: int = 6):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(v) < 1e-12 * abs(step) else v)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(path, series: Sequence[tuple], title: str = "",
              xlabel: str = "", ylabel: str = "", steps: bool = False):
    """Write a polyline SVG plot.

    series: iterable of (x array, y array, label) triples; `steps` draws
    the first series as a step function (histogram outline).
    """
    xs_all = [float(x) for s in series for x in s[0]]
    ys_all = [float(y) for s in series for y in s[1]
              if math.isfinite(float(y))]
    if not xs_all or not ys_all:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="13">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W/2:.0f}" y="20" text-anchor="middle" '
        f'font-size="15">{title}</text>',
    ]
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" '
                     f'y2="{_MT + ph}" stroke="#dddddd"/>')
        parts.append(f'<text x="{px:.1f}" y="{_MT + ph + 18}" '
                     f'text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_ML + pw}" '
                     f'y2="{py:.1f}" stroke="#dddddd"/>')
        parts.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" '
                     f'text-anchor="end">{_fmt(ty)}</text>')
    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
                 f'fill="none" stroke="#444444"/>')
    parts.append(f'<text x="{_ML + pw/2:.0f}" y="{_H - 12}" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{_MT + ph/2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_MT + ph/2:.0f})">{ylabel}</text>')

    for k, (xs, ys, label) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = []
        prev = None
        for x, y in zip(xs, ys):
            x, y = float(x), float(y)
            if not (math.isfinite(x) and math.isfinite(y)):
                prev = None
                continue
            if steps and k == 0 and prev is not None:
                pts.append(f"{sx(x):.2f},{sy(prev):.2f}")
            pts.append(f"{sx(x):.2f},{sy(y):.2f}")
            prev = y
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        if label:
            ly = _MT + 18 + 18 * k
            parts.append(f'<line x1="{_ML + pw - 150}" y1="{ly - 4}" '
                         f'x2="{_ML + pw - 120}" y2="{ly - 4}" '
                         f'stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_ML + pw - 114}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
