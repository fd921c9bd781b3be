"""Parameter sweeps over the sharpness families and their slope fits."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from utils.errors import DegenerateFitError, PreconditionError
from utils.slopes import SlopeFit, fit_loglog, fit_semilog
from utils.threads import parallel_map

LOGGER = logging.getLogger("bilinpdo.sharpness")

MIN_SWEEP_POINTS = 4


class Family(str, Enum):
    EPS_S12 = "eps_s12"
    WAINGER = "wainger"
    S0_FAMILY = "s0_family"
    DILATION_TRANSFER = "dilation_transfer"


@dataclass(frozen=True)
class SweepRow:
    """One sweep point: ``lhs / rhs`` with the parameters that produced it."""

    family: Family
    params: Mapping[str, float]
    lhs: float
    rhs: float
    details: Mapping[str, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else math.inf


@dataclass(frozen=True)
class SharpnessSweep:
    family: Family
    axis: str
    rows: tuple[SweepRow, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if not (row.ratio > 0 and math.isfinite(row.ratio)):
                raise PreconditionError(
                    f"{self.family.value} ratio must be positive and finite, got "
                    f"{row.ratio} at {dict(row.params)}"
                )
            if self.axis not in row.params:
                raise PreconditionError(
                    f"sweep axis {self.axis!r} missing from row {dict(row.params)}"
                )

    @property
    def values(self) -> list[float]:
        return [float(row.params[self.axis]) for row in self.rows]

    @property
    def ratios(self) -> list[float]:
        return [row.ratio for row in self.rows]

    def _check_points(self) -> None:
        if len(self.rows) < MIN_SWEEP_POINTS:
            raise DegenerateFitError(
                f"sweep slope needs at least {MIN_SWEEP_POINTS} points, "
                f"got {len(self.rows)}"
            )

    def fitted_slope(self, *, logx: bool = True) -> SlopeFit:
        """``log2 ratio`` against ``log2`` of the axis (or the axis itself)."""
        self._check_points()
        if logx:
            return fit_loglog(self.values, self.ratios, min_points=MIN_SWEEP_POINTS)
        return fit_semilog(self.values, self.ratios, min_points=MIN_SWEEP_POINTS)

    def growth(self, key: str = "lhs") -> float:
        """Last over first value of ``key`` in axis order."""
        first, last = self.rows[0], self.rows[-1]
        return _pick(last, key) / _pick(first, key)

    def last_halving_change(self, key: str = "lhs") -> float:
        """Relative change of ``key`` between the last two sweep points."""
        if len(self.rows) < 2:
            raise DegenerateFitError("need two sweep points for a change")
        before, after = _pick(self.rows[-2], key), _pick(self.rows[-1], key)
        return abs(after - before) / abs(before)

    def param_keys(self) -> list[str]:
        keys: list[str] = []
        for row in self.rows:
            for key in row.params:
                if key not in keys:
                    keys.append(key)
        return keys

    def to_csv(self, path: Path) -> Path:
        keys = self.param_keys()
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["family", *keys, "lhs", "rhs", "ratio"])
            for row in self.rows:
                writer.writerow(
                    [
                        self.family.value,
                        *(_format(row.params.get(key, "")) for key in keys),
                        f"{row.lhs:.17g}",
                        f"{row.rhs:.17g}",
                        f"{row.ratio:.17g}",
                    ]
                )
        LOGGER.info("Wrote %d %s rows to %s", len(self.rows), self.family.value, path)
        return path

    def summary(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "axis": self.axis,
            "points": len(self.rows),
            "min_ratio": min(self.ratios, default=math.nan),
            "max_ratio": max(self.ratios, default=math.nan),
        }


def _pick(row: SweepRow, key: str) -> float:
    if key == "lhs":
        return row.lhs
    if key == "rhs":
        return row.rhs
    if key == "ratio":
        return row.ratio
    return float(row.details[key])


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def run_sweep(
    family: Family,
    axis: str,
    points: Iterable[Mapping[str, Any]],
    evaluate: Callable[..., SweepRow],
) -> SharpnessSweep:
    """Evaluate ``evaluate(**point)`` for every point; rows ordered by ``axis``."""
    materialized = [dict(point) for point in points]
    rows = parallel_map(lambda point: evaluate(**point), materialized)
    rows.sort(key=lambda row: _row_key(row, axis))
    sweep = SharpnessSweep(family, axis, tuple(rows))
    LOGGER.info("Sweep %s over %s: %d points", family.value, axis, len(sweep.rows))
    return sweep


def _row_key(row: SweepRow, axis: str) -> tuple:
    order: Sequence[str] = [axis, *sorted(k for k in row.params if k != axis)]
    return tuple(_sort_key(row.params[k]) for k in order)


def _sort_key(value: Any) -> tuple[int, Any]:
    if isinstance(value, (int, float)):
        return (0, float(value))
    return (1, str(value))
