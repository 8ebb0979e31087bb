"""Deterministic experiment outputs: CSV, JSON summaries, SVG plots.

Every CSV carries a header naming units, every JSON summary embeds the
configuration hash, and the SVG writer uses only line/scatter primitives so
no plotting dependency is involved.  All output is a pure function of its
inputs (stable key order, fixed float formatting).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path


def config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path: Path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return v


def write_json(path: Path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# minimal SVG plotting
# ---------------------------------------------------------------------------

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def svg_plot(path: Path, series: list[tuple[str, list[float], list[float]]],
             title: str, xlabel: str, ylabel: str,
             loglog: bool = True) -> None:
    """Write a line plot; series is a list of (label, xs, ys)."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys if not loglog or y > 0]
    if not xs_all or not ys_all:
        xs_all, ys_all = [1.0], [1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if loglog:
        y_lo = max(y_lo, 1e-300)

    def sx(x):
        if loglog:
            a = (math.log(x) - math.log(x_lo)) / max(math.log(x_hi) - math.log(x_lo), 1e-12)
        else:
            a = (x - x_lo) / max(x_hi - x_lo, 1e-12)
        return _ML + a * (_W - _ML - _MR)

    def sy(y):
        if loglog:
            a = (math.log(y) - math.log(y_lo)) / max(math.log(y_hi) - math.log(y_lo), 1e-12)
        else:
            a = (y - y_lo) / max(y_hi - y_lo, 1e-12)
        return _H - _MB - a * (_H - _MT - _MB)

    colors = ["#1464a0", "#c03028", "#2a8c46", "#8050a0", "#b08020",
              "#148080", "#803030", "#507090", "#90a030", "#404040"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W/2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{_W/2:.1f}" y="{_H-10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{_H/2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H/2:.1f})">{ylabel}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W-_ML-_MR}" height="{_H-_MT-_MB}" '
        f'fill="none" stroke="#333"/>',
    ]
    for t in _ticks(x_lo, x_hi, loglog):
        if t < x_lo * (1 - 1e-9) or t > x_hi * (1 + 1e-9):
            continue
        px = sx(t)
        parts.append(f'<line x1="{px:.1f}" y1="{_H-_MB}" x2="{px:.1f}" '
                     f'y2="{_H-_MB+5}" stroke="#333"/>')
        label = f"1e{int(round(math.log10(t)))}" if loglog else format(t, ".4g")
        parts.append(f'<text x="{px:.1f}" y="{_H-_MB+18}" text-anchor="middle" '
                     f'font-size="10">{label}</text>')
    for t in _ticks(y_lo, y_hi, loglog):
        if t < y_lo * (1 - 1e-9) or t > y_hi * (1 + 1e-9):
            continue
        py = sy(t)
        parts.append(f'<line x1="{_ML-5}" y1="{py:.1f}" x2="{_ML}" '
                     f'y2="{py:.1f}" stroke="#333"/>')
        label = f"1e{int(round(math.log10(t)))}" if loglog else format(t, ".4g")
        parts.append(f'<text x="{_ML-8}" y="{py+3:.1f}" text-anchor="end" '
                     f'font-size="10">{label}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = colors[i % len(colors)]
        pts = " ".join(
            f"{sx(x):.2f},{sy(max(y, y_lo) if loglog else y):.2f}"
            for x, y in zip(xs, ys) if (y > 0 or not loglog)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{_W-_MR-6}" y="{_MT+14+12*i}" text-anchor="end" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
