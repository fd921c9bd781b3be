"""CSV tables and a minimal SVG scatter plot for experiment output."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

from utils.slopes import SlopeFit

LOGGER = logging.getLogger("bilinpdo.cli")

PROVENANCE_COLUMNS = ("n", "T", "N", "truncation")

WIDTH = 480
HEIGHT = 360
MARGIN = 56


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def table_columns(rows: Iterable[Mapping[str, Any]]) -> list[str]:
    """Columns in first-seen order with the provenance columns last."""
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns and key not in PROVENANCE_COLUMNS:
                columns.append(key)
    return [*columns, *PROVENANCE_COLUMNS]


def write_csv(
    path: Path,
    rows: Sequence[Mapping[str, Any]],
    provenance: Mapping[str, Any],
) -> Path:
    """Write ``rows``; missing provenance cells come from ``provenance``."""
    columns = table_columns(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            merged = {**provenance, **row}
            writer.writerow([format_value(merged.get(key, "")) for key in columns])
    LOGGER.info("Wrote %d rows to %s", len(rows), path)
    return path


@dataclass(frozen=True)
class PlotSeries:
    """Points plotted as ``log2 y`` against ``x`` or ``log2 x``.

    ``fit`` is a line in the plotted coordinates.
    """

    x: Sequence[float]
    y: Sequence[float]
    title: str
    xlabel: str
    ylabel: str = "ratio"
    logx: bool = True
    fit: SlopeFit | None = None

    def coordinates(self) -> list[tuple[float, float]]:
        xs = [math.log2(v) if self.logx else float(v) for v in self.x]
        ys = [math.log2(v) for v in self.y]
        return list(zip(xs, ys))


def _span(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_svg(series: PlotSeries) -> str:
    points = series.coordinates()
    if not points:
        raise ValueError("plot needs at least one point")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if series.fit is not None:
        ys += [series.fit.slope * x + series.fit.intercept for x in (min(xs), max(xs))]
    x_lo, x_hi = _span(xs)
    y_lo, y_hi = _span(ys)
    inner_w = WIDTH - 2 * MARGIN
    inner_h = HEIGHT - 2 * MARGIN

    def sx(x: float) -> float:
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w

    def sy(y: float) -> float:
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h

    x_name = f"log2 {series.xlabel}" if series.logx else series.xlabel
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{MARGIN / 2:.2f}" text-anchor="middle" '
        f'font-size="14">{escape(series.title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" '
        'stroke="black"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="12">{escape(x_name)}</text>',
        f'<text x="14" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.2f})">'
        f"log2 {escape(series.ylabel)}</text>",
    ]
    for value, anchor in ((x_lo, "start"), (x_hi, "end")):
        parts.append(
            f'<text x="{sx(value):.2f}" y="{HEIGHT - MARGIN + 16}" '
            f'text-anchor="{anchor}" font-size="10">{value:.2f}</text>'
        )
    for value in (y_lo, y_hi):
        parts.append(
            f'<text x="{MARGIN - 4}" y="{sy(value):.2f}" text-anchor="end" '
            f'font-size="10">{value:.2f}</text>'
        )
    for x, y in points:
        parts.append(
            f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>'
        )
    if series.fit is not None:
        x0, x1 = min(xs), max(xs)
        y0 = series.fit.slope * x0 + series.fit.intercept
        y1 = series.fit.slope * x1 + series.fit.intercept
        parts.append(
            f'<line x1="{sx(x0):.2f}" y1="{sy(y0):.2f}" x2="{sx(x1):.2f}" '
            f'y2="{sy(y1):.2f}" stroke="firebrick" stroke-dasharray="4 3"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14}" text-anchor="end" '
            f'font-size="12" fill="firebrick">slope = {series.fit.slope:.4f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: Path, series: PlotSeries) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(series), encoding="utf-8")
    LOGGER.info("Wrote plot to %s", path)
    return path
