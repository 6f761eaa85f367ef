"""Tiny static SVG plotting: framed panels, polylines, markers, bands.

Output is self-contained and deterministic (fixed coordinate precision,
no timestamps, no external references).
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
PHASE_COLORS = {
    "trigger": "#dddddd",
    "escalation": "#f4b6b6",
    "peak": "#f7d9a8",
    "de-escalation": "#bfe3bf",
}


def _n(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _finite(xs, ys):
    return [(x, y) for x, y in zip(xs, ys)
            if x is not None and y is not None and math.isfinite(x) and math.isfinite(y)]


def _nice_ticks(lo, hi, count=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks, t = [], first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


class Panel:
    """One plotting area with its own data-to-pixel mapping."""

    def __init__(self, x, y, w, h, xlim, ylim, title="", xlabel="", ylabel=""):
        self.x, self.y, self.w, self.h = x, y, w, h
        self.xlim = self._pad(xlim)
        self.ylim = self._pad(ylim)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items: list[str] = []

    @staticmethod
    def _pad(lim):
        lo, hi = lim
        if not (math.isfinite(lo) and math.isfinite(hi)):
            return (0.0, 1.0)
        if hi <= lo:
            return (lo - 0.5, hi + 0.5)
        return (lo, hi)

    def px(self, v):
        lo, hi = self.xlim
        return self.x + (v - lo) / (hi - lo) * self.w

    def py(self, v):
        lo, hi = self.ylim
        return self.y + self.h - (v - lo) / (hi - lo) * self.h

    def band(self, x0, x1, color, opacity=0.5, label=""):
        a, b = self.px(x0), self.px(x1)
        self.items.append(
            f'<rect x="{_n(a)}" y="{_n(self.y)}" width="{_n(max(b - a, 0))}" '
            f'height="{_n(self.h)}" fill="{color}" fill-opacity="{opacity}"/>'
        )
        if label:
            self.text((x0 + x1) / 2, None, label, size=9, anchor="middle", top=True)

    def vline(self, xv, color="#555555", dash="4,3"):
        a = self.px(xv)
        self.items.append(
            f'<line x1="{_n(a)}" y1="{_n(self.y)}" x2="{_n(a)}" y2="{_n(self.y + self.h)}" '
            f'stroke="{color}" stroke-dasharray="{dash}" stroke-width="1"/>'
        )

    def hline(self, yv, color="#999999"):
        b = self.py(yv)
        self.items.append(
            f'<line x1="{_n(self.x)}" y1="{_n(b)}" x2="{_n(self.x + self.w)}" y2="{_n(b)}" '
            f'stroke="{color}" stroke-width="0.8"/>'
        )

    def line(self, xs, ys, color=PALETTE[0], width=1.5):
        # break the polyline at missing values
        run: list[str] = []
        for x, y in zip(xs, ys):
            if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)):
                self._flush(run, color, width)
                run = []
                continue
            run.append(f"{_n(self.px(x))},{_n(self.py(y))}")
        self._flush(run, color, width)

    def _flush(self, run, color, width):
        if len(run) >= 2:
            self.items.append(
                f'<polyline points="{" ".join(run)}" fill="none" stroke="{color}" '
                f'stroke-width="{width}"/>'
            )

    def points(self, xs, ys, color=PALETTE[0], r=2.0, shape="circle"):
        for x, y in _finite(xs, ys):
            cx, cy = self.px(x), self.py(y)
            if shape == "square":
                self.items.append(
                    f'<rect x="{_n(cx - r)}" y="{_n(cy - r)}" width="{_n(2 * r)}" '
                    f'height="{_n(2 * r)}" fill="{color}"/>'
                )
            elif shape == "triangle":
                pts = f"{_n(cx)},{_n(cy - r)} {_n(cx - r)},{_n(cy + r)} {_n(cx + r)},{_n(cy + r)}"
                self.items.append(f'<polygon points="{pts}" fill="{color}"/>')
            else:
                self.items.append(
                    f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r)}" fill="{color}"/>'
                )

    def text(self, xv, yv, s, size=10, anchor="start", color="#222222", top=False):
        a = self.px(xv)
        b = self.y + 10 if top else self.py(yv)
        self.items.append(
            f'<text x="{_n(a)}" y="{_n(b)}" font-size="{size}" text-anchor="{anchor}" '
            f'fill="{color}">{escape(str(s))}</text>'
        )

    def render(self) -> str:
        parts = [
            f'<rect x="{_n(self.x)}" y="{_n(self.y)}" width="{_n(self.w)}" '
            f'height="{_n(self.h)}" fill="white" stroke="#333333"/>'
        ]
        parts += self.items
        for t in _nice_ticks(*self.xlim):
            a = self.px(t)
            parts.append(
                f'<line x1="{_n(a)}" y1="{_n(self.y + self.h)}" x2="{_n(a)}" '
                f'y2="{_n(self.y + self.h + 4)}" stroke="#333333"/>'
                f'<text x="{_n(a)}" y="{_n(self.y + self.h + 14)}" font-size="9" '
                f'text-anchor="middle">{_n(t)}</text>'
            )
        for t in _nice_ticks(*self.ylim):
            b = self.py(t)
            parts.append(
                f'<line x1="{_n(self.x - 4)}" y1="{_n(b)}" x2="{_n(self.x)}" y2="{_n(b)}" '
                f'stroke="#333333"/>'
                f'<text x="{_n(self.x - 6)}" y="{_n(b + 3)}" font-size="9" '
                f'text-anchor="end">{_n(t)}</text>'
            )
        if self.title:
            parts.append(
                f'<text x="{_n(self.x)}" y="{_n(self.y - 6)}" font-size="11" '
                f'font-weight="bold">{escape(self.title)}</text>'
            )
        if self.xlabel:
            parts.append(
                f'<text x="{_n(self.x + self.w / 2)}" y="{_n(self.y + self.h + 28)}" '
                f'font-size="10" text-anchor="middle">{escape(self.xlabel)}</text>'
            )
        if self.ylabel:
            cx, cy = self.x - 38, self.y + self.h / 2
            parts.append(
                f'<text x="{_n(cx)}" y="{_n(cy)}" font-size="10" text-anchor="middle" '
                f'transform="rotate(-90 {_n(cx)} {_n(cy)})">{escape(self.ylabel)}</text>'
            )
        return "\n".join(parts)


class Figure:
    def __init__(self, width, height, title=""):
        self.width, self.height, self.title = width, height, title
        self.panels: list[Panel] = []
        self.legend: list[tuple[str, str]] = []

    def panel(self, *args, **kwargs) -> Panel:
        p = Panel(*args, **kwargs)
        self.panels.append(p)
        return p

    def add_legend(self, label, color):
        self.legend.append((label, color))

    def to_svg(self) -> str:
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" '
            f'font-family="sans-serif">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
        ]
        if self.title:
            out.append(f'<text x="10" y="18" font-size="13" font-weight="bold">'
                       f'{escape(self.title)}</text>')
        for p in self.panels:
            out.append(p.render())
        for k, (label, color) in enumerate(self.legend):
            y = 30 + 14 * k
            x = self.width - 190
            out.append(
                f'<rect x="{x}" y="{y - 8}" width="10" height="10" fill="{color}"/>'
                f'<text x="{x + 14}" y="{y + 1}" font-size="10">{escape(label)}</text>'
            )
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_svg())


def limits(*seqs, include_zero=False):
    vals = [v for s in seqs for v in s
            if v is not None and isinstance(v, (int, float)) and math.isfinite(v)]
    if include_zero:
        vals.append(0.0)
    if not vals:
        return (0.0, 1.0)
    lo, hi = min(vals), max(vals)
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    return (lo - pad, hi + pad)
