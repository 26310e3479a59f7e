"""Minimal SVG 1.1 line-panel writer: one <polyline> per series."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 480, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 40


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    color: str = "#000000"
    width: float = 0.8
    opacity: float = 0.6


@dataclass
class Panel:
    title: str
    xlabel: str = ""
    ylabel: str = ""
    series: list[Series] = field(default_factory=list)
    # drawn as <path>, so polyline counts stay one per permutation
    guides: list[Series] = field(default_factory=list)


def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if not np.isfinite(lo) or not np.isfinite(hi):
        return 0.0, 1.0
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def render_panel(panel: Panel) -> str:
    everything = panel.series + panel.guides
    xs = np.concatenate([s.x[np.isfinite(s.y)] for s in everything] or [np.zeros(1)])
    ys = np.concatenate([s.y[np.isfinite(s.y)] for s in everything] or [np.zeros(1)])
    if xs.size == 0:
        xs, ys = np.zeros(1), np.zeros(1)
    x0, x1 = _nice_range(float(xs.min()), float(xs.max()))
    y0, y1 = _nice_range(float(ys.min()), float(ys.max()))
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (np.asarray(x) - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN_T + (y1 - np.asarray(y)) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(panel.title)}</title>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#000000" stroke-width="1"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{escape(panel.title)}</text>',
    ]
    for v in np.linspace(y0, y1, 5)[1:-1]:
        out.append(f'<text x="{MARGIN_L - 4}" y="{py(v) + 4:.2f}" text-anchor="end" '
                   f'font-size="10" font-family="sans-serif">{_fmt_tick(v)}</text>')
    for v in np.linspace(x0, x1, 5)[1:-1]:
        out.append(f'<text x="{px(v):.2f}" y="{HEIGHT - MARGIN_B + 14}" text-anchor="middle" '
                   f'font-size="10" font-family="sans-serif">{_fmt_tick(v)}</text>')
    if panel.xlabel:
        out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 6}" text-anchor="middle" '
                   f'font-size="11" font-family="sans-serif">{escape(panel.xlabel)}</text>')
    if panel.ylabel:
        out.append(f'<text x="14" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" font-size="11" '
                   f'font-family="sans-serif" transform="rotate(-90 14 {MARGIN_T + ph / 2:.1f})">'
                   f"{escape(panel.ylabel)}</text>")

    out.append("<g>")
    for g in panel.guides:
        ok = np.isfinite(g.y)
        pts = " ".join(f"{'M' if i == 0 else 'L'}{a:.2f},{b:.2f}"
                       for i, (a, b) in enumerate(zip(px(g.x[ok]), py(g.y[ok]))))
        out.append(f'<path d="{pts}" fill="none" stroke="{g.color}" '
                   f'stroke-width="{g.width}" stroke-dasharray="4,3"/>')
    for s in panel.series:
        ok = np.isfinite(s.y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(s.x[ok]), py(s.y[ok])))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
                   f'stroke-width="{s.width}" stroke-opacity="{s.opacity}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_panel(path, panel: Panel) -> None:
    Path(path).write_text(render_panel(panel), encoding="utf-8")
