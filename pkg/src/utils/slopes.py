"""Log-log least-squares slope fits."""

from __future__ import annotations

import logging
from typing import NamedTuple, Sequence

import numpy as np

from utils.errors import DegenerateFitError

LOGGER = logging.getLogger("bilinpdo.slopes")


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    residual: float
    points: int


def fit_line(
    x: Sequence[float], y: Sequence[float], *, min_points: int = 2
) -> SlopeFit:
    """Least-squares line through ``(x, y)``; residual is the RMS misfit."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape:
        raise DegenerateFitError(
            f"x and y must have equal length, got {xs.size} and {ys.size}"
        )
    if xs.size < min_points:
        raise DegenerateFitError(
            f"slope fit needs at least {min_points} points, got {xs.size}"
        )
    if np.ptp(xs) == 0.0:
        raise DegenerateFitError("slope fit needs at least two distinct x values")
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return SlopeFit(float(slope), float(intercept), residual, int(xs.size))


def fit_loglog(
    x: Sequence[float],
    y: Sequence[float],
    *,
    base: float = 2.0,
    min_points: int = 2,
) -> SlopeFit:
    """Fit ``log_base(y)`` against ``log_base(x)``; both must be positive."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DegenerateFitError("log-log fit requires positive data")
    scale = np.log(base)
    fit = fit_line(np.log(xs) / scale, np.log(ys) / scale, min_points=min_points)
    LOGGER.debug("log-log fit over %d points: slope %.4f", fit.points, fit.slope)
    return fit


def fit_semilog(
    x: Sequence[float],
    y: Sequence[float],
    *,
    base: float = 2.0,
    min_points: int = 2,
) -> SlopeFit:
    """Fit ``log_base(y)`` against linear ``x``."""
    ys = np.asarray(y, dtype=float)
    if np.any(ys <= 0):
        raise DegenerateFitError("semi-log fit requires positive data")
    return fit_line(x, np.log(ys) / np.log(base), min_points=min_points)
