"""Oscillatory lattice sums ``sum_k e^{-t|k|} |k|^{-b} e^{i|k|^a} e^{ik.x}``.

The sums are truncated at ``|k| <= K_cut`` and evaluated on the sample grid
with a chirp-z transform along each axis.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable

import numpy as np
from scipy.signal import czt

from fields import Field, GridSpec, next_power_of_two
from partitions import NormalizedBump
from sharpness.sweep import Family, SharpnessSweep, SweepRow, run_sweep
from spaces import NormReport, lp_norm
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.sharpness")

TRUNCATION_TOL = 2.0**-12
MIN_POINTS = 256
WINDOW = NormalizedBump(1.0)


def default_cut(t: float) -> int:
    """Smallest ``K`` with ``e^{-tK} <= 2^{-12}``."""
    return int(math.ceil(12.0 * math.log(2.0) / t))


def check_cut(t: float, k_cut: int | None) -> int:
    if t <= 0:
        raise PreconditionError(f"t must be positive, got: {t}")
    k_cut = default_cut(t) if k_cut is None else int(k_cut)
    if k_cut < 1 or math.exp(-t * k_cut) > TRUNCATION_TOL:
        raise PreconditionError(
            f"K_cut={k_cut} leaves a tail e^(-t K_cut)={math.exp(-t * k_cut):.3g} "
            f"above {TRUNCATION_TOL:.3g}; need K_cut >= {default_cut(t)}"
        )
    return k_cut


def lattice_radii(k_cut: int, dim: int) -> np.ndarray:
    """``|k|`` on ``[-K, K]^n``, index ``K`` is the origin."""
    axis = np.arange(-k_cut, k_cut + 1, dtype=float)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.sqrt(sum(g**2 for g in grids))


def lattice_mask(radius: np.ndarray, k_cut: int) -> np.ndarray:
    return (radius > 0) & (radius <= k_cut)


def lattice_coefficients(
    a: float, b: float, t: float, k_cut: int, dim: int = 1
) -> np.ndarray:
    """``e^{-t|k|} |k|^{-b} e^{i|k|^a}`` on ``0 < |k| <= K_cut``, zero elsewhere."""
    radius = lattice_radii(k_cut, dim)
    inside = lattice_mask(radius, k_cut)
    r = radius[inside]
    coeffs = np.zeros(radius.shape, dtype=complex)
    coeffs[inside] = np.exp(-t * r) * r ** (-b) * np.exp(1j * r**a)
    return coeffs


def trig_sum(coeffs: np.ndarray, k_cut: int, grid: GridSpec) -> np.ndarray:
    """``sum_k coeffs[k] e^{ik.x}`` at the grid samples."""
    x = grid.axis()
    w = np.exp(1j * grid.spacing)
    start = np.exp(-1j * x[0])
    phase = np.exp(-1j * k_cut * x)
    out = np.asarray(coeffs, dtype=complex)
    for axis in range(grid.dim):
        out = czt(out, m=grid.points, w=w, a=start, axis=axis)
        shape = [1] * grid.dim
        shape[axis] = grid.points
        out = out * phase.reshape(shape)
    return out


def wainger_grid(k_cut: int, dim: int = 1) -> GridSpec:
    points = max(next_power_of_two(8.0 * k_cut / math.pi), MIN_POINTS)
    return GridSpec(dim, 2, points)


def wainger_threshold(a: float, p: float, dim: int = 1) -> float:
    """Exponent ``b`` above which the family stays bounded in ``L^p`` as ``t -> 0``."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return dim * (1.0 - a / 2.0 - inv_p + a * inv_p)


def wainger(
    a: float,
    b: float,
    t: float,
    p: float,
    k_cut: int | None = None,
    dim: int = 1,
) -> tuple[Field, NormReport]:
    """Sampled ``f_{a,b,t}`` windowed by a unit-ball bump, and its ``L^p`` norm."""
    if not 0 < a < 1:
        raise PreconditionError(f"a must lie in (0, 1), got: {a}")
    k_cut = check_cut(t, k_cut)
    grid = wainger_grid(k_cut, dim)
    coeffs = lattice_coefficients(a, b, t, k_cut, dim)
    samples = trig_sum(coeffs, k_cut, grid) * WINDOW(grid.coordinates())
    f = Field(grid, samples, meta={"a": a, "b": b, "t": t, "k_cut": k_cut})
    norm = lp_norm(f, p)
    LOGGER.debug(
        "Lattice sum a=%g b=%g t=%g K=%d on N=%d: L^%g norm %.6e",
        a,
        b,
        t,
        k_cut,
        grid.points,
        p,
        norm.value,
    )
    return f, norm


def wainger_row(
    t: float, a: float, b: float, p: float, dim: int = 1
) -> SweepRow:
    f, norm = wainger(a, b, t, p, dim=dim)
    return SweepRow(
        Family.WAINGER,
        {"t": t, "a": a, "b": b, "p": p, "dim": dim},
        norm.value,
        1.0,
        {"k_cut": f.meta["k_cut"], "threshold": wainger_threshold(a, p, dim)},
    )


def wainger_sweep(
    t_values: Iterable[float], *, a: float, b: float, p: float, dim: int = 1
) -> SharpnessSweep:
    """``||f_{a,b,t}||_{L^p}`` over ``t``; rows are ordered by increasing ``t``."""
    points = [{"t": t, "a": a, "b": b, "p": p, "dim": dim} for t in t_values]
    return run_sweep(Family.WAINGER, "t", points, wainger_row)
