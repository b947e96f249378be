"""CSV and SVG writers. Output is deterministic for identical inputs."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

CSV_HEADER = "# icestate-csv v1"
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v):
    if isinstance(v, str):
        return v
    v = float(v)
    return "nan" if np.isnan(v) else repr(v)


def write_csv(path, columns, rows):
    """CSV with the version comment line, a header row, then ``rows``."""
    lines = [CSV_HEADER, ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Inverse of :func:`write_csv` for numeric files: (columns, 2-D array)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing {CSV_HEADER!r} header")
    columns = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]]).reshape(-1, len(columns))
    return columns, data


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    return np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step)


def svg_lines(path, series, *, title="", xlabel="", ylabel="", logy=False,
              width=720, height=420):
    """Self-contained SVG line plot. ``series`` is a list of (label, x, y)."""
    left, right, top, bottom = 70, 150, 36, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [np.asarray(x, float) for _, x, _ in series]
    ys = [np.asarray(y, float) for _, _, y in series]
    if logy:
        ys = [np.log10(np.where(y > 0, y, np.nan)) for y in ys]
    finite = [v[np.isfinite(v)] for v in ys]
    allx = np.concatenate(xs) if xs else np.zeros(1)
    ally = np.concatenate(finite) if finite else np.zeros(1)
    ally = ally if ally.size else np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def X(v):
        return left + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            out.append(f'<line x1="{X(t):.1f}" y1="{top + ph}" x2="{X(t):.1f}" y2="{top + ph + 5}" stroke="black"/>'
                       f'<text x="{X(t):.1f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            label = f"1e{t:g}" if logy else f"{t:g}"
            out.append(f'<line x1="{left - 5}" y1="{Y(t):.1f}" x2="{left}" y2="{Y(t):.1f}" stroke="black"/>'
                       f'<text x="{left - 8}" y="{Y(t) + 4:.1f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16,{top + ph / 2:.1f}) rotate(-90)" text-anchor="middle">'
               f'{escape(ylabel)}</text>')
    for i, ((label, _, _), x, y) in enumerate(zip(series, xs, ys)):
        color = COLORS[i % len(COLORS)]
        ok = np.isfinite(y)
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>'
                   f'<text x="{left + pw + 35}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def gnuplot_script(path, csv_name, columns, using, title=""):
    """Companion gnuplot script for a CSV written by :func:`write_csv`."""
    plots = ", ".join(f"'{csv_name}' using 1:{c} with lines title '{columns[c - 1]}'" for c in using)
    Path(path).write_text(
        "set datafile separator ','\nset datafile commentschars '#'\n"
        f"set key autotitle columnhead\nset title '{title}'\nset xlabel '{columns[0]}'\n"
        f"plot {plots}\n")
