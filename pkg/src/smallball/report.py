"""CSV, JSON and SVG emitters with byte-stable formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from xml.sax.saxutils import escape

import numpy as np


def fmt(x) -> str:
    """Exact values as ``p`` or ``p/q``; floats with 17 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def to_csv(rows: list[dict], columns=None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(_plain(doc), indent=1) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Fraction):
        return fmt(x) if x.denominator != 1 else x.numerator
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_loglog(series: dict, title: str = "", width: int = 640, height: int = 420,
               xlabel: str = "n", ylabel: str = "value") -> str:
    """Self-contained log-log chart, one ``<polyline>`` per series.

    ``series`` maps a label to a list of ``(x, y)`` pairs with positive entries.
    """
    pts = [(x, y) for s in series.values() for x, y in s if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing to plot")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    left, right, top, bottom = 60, 160, 30, 45
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (math.log10(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (math.log10(y) - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 8}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle">{escape(xlabel)} (log)</text>',
        f'<text x="14" y="{top + ph / 2:.1f}" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {top + ph / 2:.1f})" text-anchor="middle">'
        f'{escape(ylabel)} (log)</text>',
    ]
    for value, anchor, x, y in (
        (10 ** x0, "start", left, top + ph + 15), (10 ** x1, "end", left + pw, top + ph + 15),
    ):
        out.append(f'<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="{anchor}">{value:.3g}</text>')
    for value, y in ((10 ** y0, top + ph), (10 ** y1, top + 10)):
        out.append(f'<text x="{left - 4}" y="{y}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="end">{value:.3g}</text>')
    for i, (label, data) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in data if x > 0 and y > 0)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{coords}"><title>{escape(label)}</title></polyline>')
        ly_ = top + 14 + 16 * i
        out.append(f'<text x="{left + pw + 10}" y="{ly_}" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
