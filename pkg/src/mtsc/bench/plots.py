"""CSV and hand-emitted SVG rendering for curve and heatmap tables.

Curve data is a mapping whose first key is the x column (``t``) and whose
remaining keys are series; heatmap data is ``{"families", "sizes",
"values"}`` with one row per family. CSV cells carry 12 significant
digits; SVG output is a fixed 900x500 canvas with a 10-color palette and
needs no plotting dependency. Both emitters are pure functions of the
data, so repeated runs produce identical bytes.
"""

import math
from pathlib import Path

import numpy as np

from .. import errors

__all__ = ["PALETTE", "emit_plot", "parse_plot_csv"]

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH, HEIGHT = 900, 500
PLOT = (70.0, 20.0, 730.0, 440.0)               # x0, y0, x1, y1


def _g12(value):
    return "%.12g" % float(value)


def _is_heatmap(data):
    return isinstance(data, dict) and "values" in data


def _check_curves(data):
    keys = list(data)
    if len(keys) < 2:
        raise errors.EmptyData("curve data needs an x column and a series")
    n = len(data[keys[0]])
    if n == 0:
        raise errors.EmptyData("curve data is empty")
    for key in keys:
        if len(data[key]) != n:
            raise errors.LengthMismatch(f"column {key!r} has a different length")
    return keys, n


def _check_heatmap(data):
    families = list(data.get("families", ()))
    sizes = list(data.get("sizes", ()))
    values = [list(row) for row in data.get("values", ())]
    if not families or not sizes or len(values) != len(families):
        raise errors.EmptyData("heatmap needs families, sizes and a value row "
                               "per family")
    for row in values:
        if len(row) != len(sizes):
            raise errors.LengthMismatch("heatmap rows must match the size axis")
    return families, sizes, values


def _curves_csv(data):
    keys, n = _check_curves(data)
    lines = [",".join(keys)]
    for i in range(n):
        lines.append(",".join(_g12(data[k][i]) for k in keys))
    return "\n".join(lines) + "\n"


def _heatmap_csv(data):
    families, sizes, values = _check_heatmap(data)
    lines = ["family," + ",".join(str(s) for s in sizes)]
    for name, row in zip(families, values):
        cells = [_g12(v) if v is not None else "nan" for v in row]
        lines.append(str(name) + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def parse_plot_csv(text):
    """Invert the CSV emitters; the emit-parse-emit cycle is byte-stable."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise errors.EmptyData("no CSV rows")
    header = lines[0].split(",")
    if header[0] == "family":
        sizes = [int(tok) if tok.lstrip("-").isdigit() else float(tok)
                 for tok in header[1:]]
        families, values = [], []
        for ln in lines[1:]:
            cells = ln.split(",")
            families.append(cells[0])
            values.append([float(c) for c in cells[1:]])
        return {"families": families, "sizes": sizes, "values": values}
    columns = {key: [] for key in header}
    for ln in lines[1:]:
        for key, cell in zip(header, ln.split(",")):
            columns[key].append(float(cell))
    return {key: np.asarray(col) for key, col in columns.items()}


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _scale(lo, hi):
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


def _svg_header():
    return [f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" '
            f'height="{HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']


def _curves_svg(data):
    keys, n = _check_curves(data)
    xkey, series = keys[0], keys[1:]
    xs = np.asarray(data[xkey], dtype=np.float64)
    ys = [np.asarray(data[k], dtype=np.float64) for k in series]
    if not all(np.isfinite(v).all() for v in [xs] + ys):
        raise errors.DegenerateInput("curve values must be finite")
    xmin, xmax = _scale(float(xs.min()), float(xs.max()))
    ymin, ymax = _scale(float(min(v.min() for v in ys)),
                        float(max(v.max() for v in ys)))
    x0, y0, x1, y1 = PLOT

    def px(v):
        return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0)

    def py(v):
        return y1 - (v - ymin) / (ymax - ymin) * (y1 - y0)

    out = _svg_header()
    out.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" '
               f'stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" '
               f'stroke="black"/>')
    for tick in _ticks(xmin, xmax):
        tx = px(tick)
        out.append(f'<line x1="{tx:.2f}" y1="{y1}" x2="{tx:.2f}" '
                   f'y2="{y1 + 5}" stroke="black"/>')
        out.append(f'<text x="{tx:.2f}" y="{y1 + 18}" '
                   f'text-anchor="middle">{tick:.4g}</text>')
    for tick in _ticks(ymin, ymax):
        ty = py(tick)
        out.append(f'<line x1="{x0 - 5}" y1="{ty:.2f}" x2="{x0}" '
                   f'y2="{ty:.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{ty + 4:.2f}" '
                   f'text-anchor="end">{tick:.4g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">{xkey}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(y0 + y1) / 2:.2f})">value</text>')
    for i, (name, v) in enumerate(zip(series, ys)):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, v))
        out.append(f'<polyline fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{points}"/>')
        ly = y0 + 16 + 18 * i
        out.append(f'<rect x="{x1 + 12}" y="{ly - 10}" width="12" '
                   f'height="12" fill="{color}"/>')
        out.append(f'<text x="{x1 + 30}" y="{ly}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _hex_to_rgb(color):
    return tuple(int(color[i:i + 2], 16) for i in (1, 3, 5))


def _blend(frac, lo="#1f77b4", hi="#d62728"):
    a, b = _hex_to_rgb(lo), _hex_to_rgb(hi)
    rgb = tuple(round(x + (y - x) * frac) for x, y in zip(a, b))
    return "#%02x%02x%02x" % rgb


def _heatmap_svg(data):
    families, sizes, values = _check_heatmap(data)
    x0, y0, x1, y1 = PLOT
    flat = [v for row in values for v in row
            if v is not None and math.isfinite(v)]
    vmin, vmax = _scale(min(flat), max(flat)) if flat else (0.0, 1.0)
    cw = (x1 - x0) / len(sizes)
    ch = (y1 - y0) / len(families)
    out = _svg_header()
    for r, (name, row) in enumerate(zip(families, values)):
        cy = y0 + r * ch
        out.append(f'<text x="{x0 - 8}" y="{cy + ch / 2 + 4:.2f}" '
                   f'text-anchor="end">{name}</text>')
        for c, value in enumerate(row):
            cx = x0 + c * cw
            bad = value is None or not math.isfinite(value)
            if bad:
                fill, label, text_fill = "#cccccc", "nan", "black"
            else:
                frac = (value - vmin) / (vmax - vmin)
                fill = _blend(frac)
                label = "%.4f" % value
                text_fill = "white" if frac > 0.6 else "black"
            out.append(f'<rect x="{cx:.2f}" y="{cy:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" fill="{fill}" stroke="white"/>')
            out.append(f'<text x="{cx + cw / 2:.2f}" y="{cy + ch / 2 + 4:.2f}" '
                       f'text-anchor="middle" fill="{text_fill}">{label}</text>')
    for c, size in enumerate(sizes):
        tx = x0 + c * cw + cw / 2
        out.append(f'<text x="{tx:.2f}" y="{y1 + 18}" '
                   f'text-anchor="middle">{size}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">training size</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(data, format, path):
    """Write curve or heatmap data as CSV or SVG; returns the path."""
    if format not in ("csv", "svg"):
        raise errors.ConfigError(f"unknown plot format {format!r}")
    if _is_heatmap(data):
        text = _heatmap_csv(data) if format == "csv" else _heatmap_svg(data)
    else:
        text = _curves_csv(data) if format == "csv" else _curves_svg(data)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
