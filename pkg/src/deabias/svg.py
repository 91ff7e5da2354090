"""Minimal deterministic SVG 1.1 line plots.

Coordinates are printed with two decimals and the element order is fixed,
so the same input always gives the same bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
DASHES = {"solid": None, "dashed": "6,4", "dotted": "2,3"}

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 150, 40, 56


@dataclass(frozen=True)
class Series:
    name: str
    x: tuple
    y: tuple
    style: str = "solid"
    color: str = ""

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        problems = []
        if not x or len(x) != len(y):
            problems.append("x and y non-empty and equally long")
        if not all(math.isfinite(v) for v in x + y):
            problems.append("all points finite")
        if self.style not in DASHES:
            problems.append(f"style in {sorted(DASHES)}")
        if problems:
            raise ValidationError(f"Series {self.name!r}: invariant violated: "
                                  + "; ".join(problems))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class PlotSpec:
    title: str
    x_label: str
    y_label: str
    series: tuple
    path: str = ""

    def __post_init__(self):
        if not self.series:
            raise ValidationError("PlotSpec: invariant violated: at least one series")
        object.__setattr__(self, "series", tuple(self.series))


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    n = int(round((stop - start) / step))
    return [start + k * step for k in range(n + 1)]


def _tick_label(v, step):
    decimals = 0
    while decimals < 12 and abs(round(step, decimals) - step) > 1e-9 * step:
        decimals += 1
    text = f"{v:.{decimals}f}"
    return "0" if float(text) == 0 else text


def render_svg(plot: PlotSpec) -> str:
    xs = np.concatenate([s.x for s in plot.series])
    ys = np.concatenate([s.y for s in plot.series])
    xt = nice_ticks(float(xs.min()), float(xs.max()))
    yt = nice_ticks(float(ys.min()), float(ys.max()))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN_T + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" '
        'font-size="12">',
        f'<title>{escape(plot.title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L + pw / 2:.2f}" y="24" text-anchor="middle" '
        f'font-size="14">{escape(plot.title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" '
        'stroke="black"/>',
    ]
    x_step = xt[1] - xt[0] if len(xt) > 1 else 1.0
    y_step = yt[1] - yt[0] if len(yt) > 1 else 1.0
    for v in xt:
        x = px(v)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN_T + ph}" x2="{x:.2f}" '
                   f'y2="{MARGIN_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN_T + ph + 18}" text-anchor="middle">'
                   f'{_tick_label(v, x_step)}</text>')
    for v in yt:
        y = py(v)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{y:.2f}" x2="{MARGIN_L}" y2="{y:.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end">'
                   f'{_tick_label(v, y_step)}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 14}" text-anchor="middle">'
               f'{escape(plot.x_label)}</text>')
    cy = MARGIN_T + ph / 2
    out.append(f'<text x="18" y="{cy:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {cy:.2f})">{escape(plot.y_label)}</text>')

    for k, s in enumerate(plot.series):
        color = s.color or PALETTE[k % len(PALETTE)]
        dash = DASHES[s.style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} '
                   f'points="{pts}"/>')
        ly = MARGIN_T + 14 + 18 * k
        lx = MARGIN_L + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{ly}">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(plot: PlotSpec, path=None):
    path = path or plot.path
    if not path:
        raise ValidationError("no output path for SVG")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_svg(plot))
