"""Dependency-free SVG scatter plots of Pareto fronts.

Output is a pure function of the input: coordinates are printed with a
fixed number of decimals and methods are drawn in a fixed order.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .analysis import ParetoFront

PANEL_W = 360
PANEL_H = 300
MARGIN_L = 64
MARGIN_B = 44
MARGIN_T = 28
LEGEND_H = 24

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
          "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")
SHAPES = ("circle", "square", "triangle", "diamond", "cross")


def _num(v):
    return f"{v:.2f}"


def _tick_label(v):
    return f"{v:.4g}"


def _marker(shape, cx, cy, color, cls, opacity=None, size=4.0):
    op = f' fill-opacity="{opacity}" stroke-opacity="{opacity}"' if opacity is not None else ""
    common = f'class="{cls}" fill="{color}" stroke="{color}"{op}'
    if shape == "circle":
        return f'<circle {common} cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(size)}"/>'
    if shape == "square":
        return (f'<rect {common} x="{_num(cx - size)}" y="{_num(cy - size)}" '
                f'width="{_num(2 * size)}" height="{_num(2 * size)}"/>')
    if shape == "triangle":
        pts = [(cx, cy - size * 1.2), (cx - size, cy + size), (cx + size, cy + size)]
    elif shape == "diamond":
        pts = [(cx, cy - size * 1.3), (cx + size, cy), (cx, cy + size * 1.3), (cx - size, cy)]
    else:
        s = size
        return (f'<path {common} stroke-width="2" fill="none" d="M{_num(cx - s)},{_num(cy - s)}'
                f'L{_num(cx + s)},{_num(cy + s)}M{_num(cx - s)},{_num(cy + s)}L{_num(cx + s)},{_num(cy - s)}"/>')
    joined = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
    return f'<polygon {common} points="{joined}"/>'


def _style(index):
    return SHAPES[index % len(SHAPES)], COLORS[index % len(COLORS)]


def _nice_ticks(lo, hi, count=5):
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, count)


def _panel(ox, oy, pairs, axes, labels):
    """One 2-D scatter panel; ``pairs`` is a list of (style, front points, dominated points)."""
    i, j = axes
    pts = [arr[:, [i, j]] for _, fr, dom in pairs for arr in (fr, dom) if arr.size]
    out = [f'<g class="panel" transform="translate({ox},{oy})">']
    pw, ph = PANEL_W - MARGIN_L - 12, PANEL_H - MARGIN_B - MARGIN_T
    out.append(f'<rect class="frame" x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
               'fill="none" stroke="#333"/>')
    out.append(f'<text class="axis-label" x="{MARGIN_L + pw / 2:.1f}" y="{PANEL_H - 6}" '
               f'text-anchor="middle" font-size="12">{labels[i]}</text>')
    out.append(f'<text class="axis-label" x="14" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'font-size="12" transform="rotate(-90 14 {MARGIN_T + ph / 2:.1f})">{labels[j]}</text>')
    if not pts:
        out.append(f'<text class="annotation" x="{MARGIN_L + pw / 2:.1f}" y="{MARGIN_T + ph / 2:.1f}" '
                   'text-anchor="middle" font-size="14">no points</text>')
        out.append("</g>")
        return out
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    lo, hi = lo - 0.05 * span, hi + 0.05 * span

    def sx(v):
        return MARGIN_L + (v - lo[0]) / (hi[0] - lo[0]) * pw

    def sy(v):
        return MARGIN_T + ph - (v - lo[1]) / (hi[1] - lo[1]) * ph

    for t in _nice_ticks(lo[0], hi[0]):
        x = sx(t)
        out.append(f'<line class="tick" x1="{_num(x)}" y1="{MARGIN_T + ph}" x2="{_num(x)}" '
                   f'y2="{MARGIN_T + ph + 5}" stroke="#333"/>')
        out.append(f'<text class="tick-label" x="{_num(x)}" y="{MARGIN_T + ph + 18}" '
                   f'text-anchor="middle" font-size="10">{_tick_label(t)}</text>')
    for t in _nice_ticks(lo[1], hi[1]):
        y = sy(t)
        out.append(f'<line class="tick" x1="{MARGIN_L - 5}" y1="{_num(y)}" x2="{MARGIN_L}" '
                   f'y2="{_num(y)}" stroke="#333"/>')
        out.append(f'<text class="tick-label" x="{MARGIN_L - 8}" y="{_num(y + 3)}" '
                   f'text-anchor="end" font-size="10">{_tick_label(t)}</text>')
    for (shape, color), front, dominated in pairs:
        for p in dominated:
            out.append(_marker(shape, sx(p[i]), sy(p[j]), color, "marker dominated", opacity="0.25"))
        for p in front:
            out.append(_marker(shape, sx(p[i]), sy(p[j]), color, "marker front"))
    out.append("</g>")
    return out


def _as_arrays(front, m):
    if isinstance(front, ParetoFront):
        pts = front.points
        dom = front.dominated if front.dominated is not None else np.zeros((0, m))
    else:
        pts, dom = np.asarray(front, dtype=float), np.zeros((0, m))
    pts = pts.reshape(-1, m) if pts.size else np.zeros((0, m))
    dom = dom.reshape(-1, m) if dom.size else np.zeros((0, m))
    return pts, dom


def render_svg_scatter(fronts, m=None, title=None, style_order=None):
    """SVG text for ``fronts`` (method name -> :class:`ParetoFront`).

    Front points are solid, dominated terminal points faint.  With three
    objectives the pairs (f0, f1), (f0, f2), (f1, f2) get one panel each.
    ``style_order`` fixes which marker each method gets; methods not listed
    follow in sorted order.
    """
    names = sorted(fronts)
    if m is None:
        dims = [f.points.shape[1] for f in fronts.values()
                if isinstance(f, ParetoFront) and f.points.ndim == 2 and f.points.shape[1] > 0]
        m = dims[0] if dims else 2
    if m not in (2, 3):
        raise ValueError("scatter plots support m = 2 or m = 3 objectives")
    order = list(style_order or [])
    order += [n for n in names if n not in order]
    styles = {n: _style(order.index(n)) for n in names}
    pairs = [(styles[n], *_as_arrays(fronts[n], m)) for n in names]
    axes = [(0, 1)] if m == 2 else [(0, 1), (0, 2), (1, 2)]
    labels = [f"f{i}" for i in range(m)]
    width = PANEL_W * len(axes)
    legend_rows = max(1, len(names))
    height = MARGIN_T + PANEL_H + LEGEND_H * legend_rows + 10
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text class="title" x="{width / 2:.1f}" y="18" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')
    for p, ax in enumerate(axes):
        out.extend(_panel(p * PANEL_W, MARGIN_T, pairs, ax, labels))
    ly = MARGIN_T + PANEL_H + 8
    out.append('<g class="legend">')
    if not names:
        out.append(f'<text class="legend-label" x="{MARGIN_L}" y="{ly + 12}" font-size="12">no methods</text>')
    for row, n in enumerate(names):
        shape, color = styles[n]
        y = ly + row * LEGEND_H + 8
        out.append(_marker(shape, MARGIN_L, y, color, "legend-swatch"))
        out.append(f'<text class="legend-label" x="{MARGIN_L + 12}" y="{y + 4}" font-size="12">'
                   f'{escape(n)} (solid: front, faint: dominated)</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_scatter(fronts, path, m=None, title=None, style_order=None):
    text = render_svg_scatter(fronts, m=m, title=title, style_order=style_order)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
