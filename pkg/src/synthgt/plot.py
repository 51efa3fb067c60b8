"""Hand-emitted SVG of dataset components: background, feature and their sum.

One row per sample, three columns. The sum panel shades every ground-truth
window. Output is byte-stable: no timestamps, ids or randomness.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import Dataset, DatasetError, mask_runs

WIDTH = 1200
ROW_HEIGHT = 280
COLUMNS = ("background", "feature", "sum")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WINDOW_FILL = "#ff7f0e"
WINDOW_OPACITY = "0.25"

_PAD_LEFT, _PAD_RIGHT, _PAD_TOP, _PAD_BOTTOM = 62, 18, 38, 34


class MissingComponents(DatasetError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    text = f"{v:.3g}"
    return "0" if text == "-0" else text


def per_class_indices(ds: Dataset) -> list[int]:
    """First sample of each class, in label order."""
    out = []
    for label in ds.meta.class_labels:
        hits = np.flatnonzero(ds.y == label)
        if hits.size:
            out.append(int(hits[0]))
    return out


def _panel(x0: float, y0: float, w: float, h: float, series: np.ndarray, title: str,
           windows: Sequence[tuple[int, int, int]] = ()) -> list[str]:
    """One line-chart panel; ``series`` is (n_channels, n_timesteps)."""
    n_ch, T = series.shape
    lo, hi = float(series.min()), float(series.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    left, top = x0 + _PAD_LEFT, y0 + _PAD_TOP
    pw, ph = w - _PAD_LEFT - _PAD_RIGHT, h - _PAD_TOP - _PAD_BOTTOM

    def px(t):
        return left + (pw * t / (T - 1) if T > 1 else pw / 2)

    def py(v):
        return top + ph * (hi - v) / (hi - lo)

    out = ['<g class="panel">',
           f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(y0 + 22)}" text-anchor="middle" '
           f'font-size="14">{escape(title)}</text>']
    for ch, start, length in windows:
        x_a = px(start - 0.5) if T > 1 else left
        x_b = px(start + length - 0.5) if T > 1 else left + pw
        x_a, x_b = max(left, x_a), min(left + pw, x_b)
        out.append(f'<rect class="gt-window" data-channel="{ch}" x="{_fmt(x_a)}" y="{_fmt(top)}" '
                   f'width="{_fmt(x_b - x_a)}" height="{_fmt(ph)}" fill="{WINDOW_FILL}" '
                   f'fill-opacity="{WINDOW_OPACITY}" stroke="none"/>')
    out.append(f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
               f'fill="none" stroke="#444" stroke-width="1"/>')
    for v in (lo, (lo + hi) / 2, hi):
        yy = py(v)
        out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(yy)}" x2="{_fmt(left)}" y2="{_fmt(yy)}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(left - 7)}" y="{_fmt(yy + 4)}" text-anchor="end" font-size="11">{_tick(v)}</text>')
    for t in sorted({0, (T - 1) // 2, T - 1}):
        xx = px(t)
        out.append(f'<line x1="{_fmt(xx)}" y1="{_fmt(top + ph)}" x2="{_fmt(xx)}" y2="{_fmt(top + ph + 4)}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(xx)}" y="{_fmt(top + ph + 17)}" text-anchor="middle" font-size="11">{t}</text>')
    for ch in range(n_ch):
        pts = " ".join(f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in enumerate(series[ch]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[ch % len(PALETTE)]}" '
                   f'stroke-width="1.5"/>')
    out.append("</g>")
    return out


def render_components_svg(ds: Dataset, indices: Sequence[int]) -> str:
    """SVG with one row per sample index: background, feature, sum (window shaded)."""
    if ds.components is None:
        raise MissingComponents("dataset has no stored components; regenerate it without --no-components")
    if not indices:
        raise ValueError("no samples selected")
    signal, feature = ds.components
    col_w = WIDTH / len(COLUMNS)
    height = ROW_HEIGHT * len(indices)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
             f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
             f'<rect width="{WIDTH}" height="{height}" fill="white"/>']
    for row, i in enumerate(indices):
        i = int(i)
        if not 0 <= i < ds.n_samples:
            raise IndexError(f"sample {i} outside 0..{ds.n_samples - 1}")
        y0 = row * ROW_HEIGHT
        label = int(ds.y[i])
        windows = [(ch, s, n) for ch in range(ds.shape[1]) for s, n in mask_runs(ds.mask[i, ch])]
        panels = (signal[i], feature[i], signal[i] + feature[i])
        lines.append(f'<g class="row" data-sample="{i}" data-class="{label}">')
        for col, (name, data) in enumerate(zip(COLUMNS, panels)):
            title = f"class {label}, sample {i}: {name}"
            lines.extend(_panel(col * col_w, y0, col_w, ROW_HEIGHT, data, title,
                                windows if name == "sum" else ()))
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def plot_components(ds: Dataset, indices: Sequence[int] | None = None) -> str:
    """Render the given samples, or the first sample of each class by default."""
    return render_components_svg(ds, per_class_indices(ds) if indices is None else indices)
