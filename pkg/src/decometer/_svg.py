"""Hand-rolled SVG emission: line plots and heat maps with stable bytes.

No plotting dependency produces byte-reproducible output across versions, so
the few plot kinds the command line needs are written directly.  Everything
is formatted with fixed precision and carries no timestamps or generated
ids; the same data always yields the same file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = ["Curve", "line_plot", "heat_map"]

_W, _H = 640, 460
_ML, _MR, _MT, _MB = 72, 24, 34, 52  # margins: left, right, top, bottom
_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
    "#bcbd22",
)


@dataclass(frozen=True)
class Curve:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    dashed: bool = False
    color: Optional[str] = None


def _px(v: float) -> str:
    return f"{v:.2f}"


def _limits(arrays, log):
    lo = math.inf
    hi = -math.inf
    for arr in arrays:
        a = np.asarray(arr, dtype=float)
        a = a[np.isfinite(a)]
        if log:
            a = a[a > 0]
        if a.size:
            lo = min(lo, float(a.min()))
            hi = max(hi, float(a.max()))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = (1.0, 10.0) if log else (0.0, 1.0)
    if lo == hi:
        pad = abs(lo) * 0.5 + 1.0
        lo, hi = (lo / 2.0, hi * 2.0) if log else (lo - pad, hi + pad)
    return lo, hi


def _nice_step(span: float) -> float:
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    frac = raw / mag
    for nice in (1.0, 2.0, 2.5, 5.0):
        if frac <= nice:
            return nice * mag
    return 10.0 * mag


def _linear_ticks(lo, hi):
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _log_ticks(lo, hi):
    first = math.ceil(math.log10(lo) - 1e-9)
    last = math.floor(math.log10(hi) + 1e-9)
    if last < first:  # less than a decade: fall back to two endpoint ticks
        return [lo, hi]
    return [10.0**k for k in range(first, last + 1)]


@dataclass
class _Frame:
    """Data-to-pixel map for one axis pair, optionally logarithmic."""

    xlo: float
    xhi: float
    ylo: float
    yhi: float
    xlog: bool
    ylog: bool
    parts: list = field(default_factory=list)

    def _u(self, v, lo, hi, log):
        if log:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        return (v - lo) / (hi - lo)

    def px(self, x):
        return _ML + self._u(x, self.xlo, self.xhi, self.xlog) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - self._u(y, self.ylo, self.yhi, self.ylog) * (_H - _MT - _MB)


def _axes(frame: _Frame, title, xlabel, ylabel):
    out = frame.parts
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#000" stroke-width="1"/>'
    )
    xticks = _log_ticks(frame.xlo, frame.xhi) if frame.xlog else _linear_ticks(frame.xlo, frame.xhi)
    yticks = _log_ticks(frame.ylo, frame.yhi) if frame.ylog else _linear_ticks(frame.ylo, frame.yhi)
    for v in xticks:
        if not frame.xlo <= v <= frame.xhi:
            continue
        x = frame.px(v)
        out.append(
            f'<line x1="{_px(x)}" y1="{_H - _MB}" x2="{_px(x)}" y2="{_H - _MB + 5}" '
            'stroke="#000" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_px(x)}" y="{_H - _MB + 18}" font-size="11" '
            f'text-anchor="middle">{v:.4g}</text>'
        )
    for v in yticks:
        if not frame.ylo <= v <= frame.yhi:
            continue
        y = frame.py(v)
        out.append(
            f'<line x1="{_ML - 5}" y1="{_px(y)}" x2="{_ML}" y2="{_px(y)}" '
            'stroke="#000" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_ML - 8}" y="{_px(y + 4)}" font-size="11" '
            f'text-anchor="end">{v:.4g}</text>'
        )
    out.append(
        f'<text x="{(_ML + _W - _MR) // 2}" y="{_H - 12}" font-size="12" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{(_MT + _H - _MB) // 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) // 2})">{ylabel}</text>'
    )
    if title:
        out.append(
            f'<text x="{_W // 2}" y="20" font-size="13" text-anchor="middle">{title}</text>'
        )


def _write(path, parts):
    body = "\n".join(parts)
    text = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n<rect width="{_W}" height="{_H}" fill="#fff"/>\n'
        f"{body}\n</svg>\n"
    )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def line_plot(path, curves, *, title="", xlabel="", ylabel="", xlog=False, ylog=False):
    """Polyline plot; NaN/non-positive-on-log points split the line."""
    curves = list(curves)
    xlo, xhi = _limits([c.x for c in curves], xlog)
    ylo, yhi = _limits([c.y for c in curves], ylog)
    frame = _Frame(xlo, xhi, ylo, yhi, xlog, ylog)
    _axes(frame, title, xlabel, ylabel)
    for k, c in enumerate(curves):
        color = c.color or _PALETTE[k % len(_PALETTE)]
        xs = np.asarray(c.x, dtype=float)
        ys = np.asarray(c.y, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys)
        if xlog:
            ok &= xs > 0
        if ylog:
            ok &= ys > 0
        run = []
        segments = []
        for i in range(xs.size):
            if ok[i]:
                run.append(f"{_px(frame.px(xs[i]))},{_px(frame.py(ys[i]))}")
            elif run:
                segments.append(run)
                run = []
        if run:
            segments.append(run)
        dash = ' stroke-dasharray="6,4"' if c.dashed else ""
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                frame.parts.append(
                    f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>'
                )
            else:
                frame.parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"{dash}/>'
                )
        if c.label:
            ly = _MT + 16 + 16 * k
            frame.parts.append(
                f'<line x1="{_W - _MR - 150}" y1="{ly - 4}" x2="{_W - _MR - 120}" '
                f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash}/>'
            )
            frame.parts.append(
                f'<text x="{_W - _MR - 114}" y="{ly}" font-size="11">{c.label}</text>'
            )
    _write(path, frame.parts)


def _diverging_color(u: float) -> str:
    """u in [-1, 1] -> blue / white / red, linear in each half."""
    u = max(-1.0, min(1.0, u))
    if u >= 0:
        c = round(255 * (1.0 - u))
        return f"#ff{c:02x}{c:02x}"
    c = round(255 * (1.0 + u))
    return f"#{c:02x}{c:02x}ff"


def heat_map(path, x, y, z, *, title="", xlabel="", ylabel=""):
    """Cell-per-value map of z[i, j] over (x[i], y[j]), diverging about 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    frame = _Frame(float(x[0]), float(x[-1]), float(y[0]), float(y[-1]), False, False)
    scale = float(np.max(np.abs(z))) or 1.0
    # cell edges at midpoints, clamped to the frame
    xe = np.concatenate(([x[0]], 0.5 * (x[1:] + x[:-1]), [x[-1]]))
    ye = np.concatenate(([y[0]], 0.5 * (y[1:] + y[:-1]), [y[-1]]))
    for i in range(x.size):
        x0, x1 = frame.px(xe[i]), frame.px(xe[i + 1])
        for j in range(y.size):
            y1, y0 = frame.py(ye[j]), frame.py(ye[j + 1])
            color = _diverging_color(z[i, j] / scale)
            frame.parts.append(
                f'<rect x="{_px(x0)}" y="{_px(y0)}" width="{_px(x1 - x0)}" '
                f'height="{_px(y1 - y0)}" fill="{color}" stroke="none"/>'
            )
    _axes(frame, title, xlabel, ylabel)
    _write(path, frame.parts)
