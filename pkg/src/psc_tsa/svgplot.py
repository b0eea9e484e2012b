"""Minimal standalone SVG line plots (one <polyline> per series)."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

WIDTH = 720
PANEL_HEIGHT = 220
MARGIN = (60, 20, 30, 40)  # left, right, top, bottom
MAX_POINTS = 4000
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass
class Panel:
    title: str
    x: np.ndarray
    series: list  # (label, y)
    xlabel: str = ""
    # (x, y, filled) markers, drawn as circles
    markers: list = field(default_factory=list)
    zero_line: bool = False


def _thin(x, y):
    if len(x) <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, len(x) - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render(panels: list[Panel]) -> str:
    left, right, top, bottom = MARGIN
    height = PANEL_HEIGHT * len(panels)
    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(WIDTH),
        height=str(height),
        viewBox=f"0 0 {WIDTH} {height}",
    )
    ET.SubElement(svg, "rect", width="100%", height="100%", fill="white")
    for k, panel in enumerate(panels):
        y0 = k * PANEL_HEIGHT
        pw = WIDTH - left - right
        ph = PANEL_HEIGHT - top - bottom
        x = np.asarray(panel.x, dtype=float)
        ys = [np.asarray(y, dtype=float) for _, y in panel.series]
        xmin, xmax = float(x.min()), float(x.max())
        ymin = min(float(y.min()) for y in ys)
        ymax = max(float(y.max()) for y in ys)
        if panel.zero_line:
            ymin, ymax = min(ymin, 0.0), max(ymax, 0.0)
        if xmax == xmin:
            xmax = xmin + 1.0
        if ymax == ymin:
            ymin, ymax = ymin - 1.0, ymax + 1.0

        def sx(v):
            return left + (v - xmin) / (xmax - xmin) * pw

        def sy(v):
            return y0 + top + (ymax - v) / (ymax - ymin) * ph

        g = ET.SubElement(svg, "g")
        ET.SubElement(
            g, "rect", x=str(left), y=str(y0 + top), width=str(pw), height=str(ph),
            fill="none", stroke="#888",
        )
        title = ET.SubElement(g, "text", x=str(left), y=str(y0 + top - 8))
        title.set("font-size", "13")
        title.text = panel.title
        for val, anchor_y in ((ymax, sy(ymax) + 4), (ymin, sy(ymin))):
            t = ET.SubElement(g, "text", x=str(left - 4), y=_fmt(anchor_y))
            t.set("font-size", "10")
            t.set("text-anchor", "end")
            t.text = _fmt(val)
        for val, anchor in ((xmin, "start"), (xmax, "end")):
            t = ET.SubElement(g, "text", x=_fmt(sx(val)), y=str(y0 + top + ph + 14))
            t.set("font-size", "10")
            t.set("text-anchor", anchor)
            t.text = _fmt(val)
        if panel.xlabel:
            t = ET.SubElement(g, "text", x=str(left + pw / 2), y=str(y0 + top + ph + 28))
            t.set("font-size", "11")
            t.set("text-anchor", "middle")
            t.text = panel.xlabel
        if panel.zero_line:
            ET.SubElement(
                g, "line", x1=str(left), x2=str(left + pw), y1=_fmt(sy(0.0)), y2=_fmt(sy(0.0)),
                stroke="#bbb",
            ).set("stroke-dasharray", "4 3")
        for i, ((label, _), y) in enumerate(zip(panel.series, ys)):
            xt, yt = _thin(x, y)
            points = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xt, yt))
            line = ET.SubElement(
                g, "polyline", points=points, fill="none", stroke=COLORS[i % len(COLORS)],
            )
            line.set("stroke-width", "1.5")
            line.set("data-series", label)
        for mx, my, filled in panel.markers:
            ET.SubElement(
                g, "circle", cx=_fmt(sx(mx)), cy=_fmt(sy(my)), r="5",
                fill="black" if filled else "white", stroke="black",
            )
    return ET.tostring(svg, encoding="unicode")


def write_svg(path, panels: list[Panel]) -> None:
    with open(path, "w") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        fh.write(render(panels))
        fh.write("\n")
