"""Local Hardy ``h^1`` and the mean-oscillation spaces ``bmo`` / ``BMO``."""

from __future__ import annotations

import itertools
import logging

import numpy as np

from fields import Field, Space, dft, idft
from partitions import NormalizedBump
from spaces.report import NormReport, SpaceTag
from utils.errors import PreconditionError
from utils.summation import stable_norm

LOGGER = logging.getLogger("bilinpdo.spaces")

LARGEST_SCALE = 0.5
MIN_CUBE_SAMPLES = 2


def maximal_scales(spacing: float, t_levels: int) -> list[float]:
    """``t = 2^{-1 - i / t_levels}`` from 1/2 down to two grid spacings."""
    scales = [LARGEST_SCALE]
    i = 1
    while True:
        t = 2.0 ** (-1.0 - i / t_levels)
        if t < 2.0 * spacing:
            return scales
        scales.append(t)
        i += 1


def _kernel_spectrum(f: Field, t: float) -> np.ndarray:
    grid = f.grid
    samples = NormalizedBump(t)(grid.coordinates())
    samples = samples / (samples.sum() * grid.cell)
    return dft(Field(grid, samples)).samples


def h1_norm(f: Field, t_levels: int = 4) -> NormReport:
    """``|| sup_t |phi_t * f| ||_{L^1}``, ``phi`` a unit-mass bump on ``|x| < 1``."""
    if t_levels < 1:
        raise PreconditionError(f"t_levels must be >= 1, got: {t_levels}")
    f.require(Space.PHYSICAL)
    scales = maximal_scales(f.grid.spacing, t_levels)
    spectrum = dft(f)
    maximal = np.zeros(f.grid.shape)
    for t in scales:
        kernel = _kernel_spectrum(f, t)
        smoothed = idft(spectrum.with_samples(spectrum.samples * kernel))
        maximal = np.maximum(maximal, np.abs(smoothed.samples))
    value = stable_norm(maximal, 1.0, f.grid.cell)
    LOGGER.debug("h1 norm over %d scales: %.6e", len(scales), value)
    return NormReport(
        value,
        SpaceTag.H1,
        {"t_levels": t_levels, "scales": len(scales), **f.grid.describe()},
    )


def _cube_statistics(
    samples: np.ndarray, side: int
) -> tuple[np.ndarray, np.ndarray]:
    """Mean oscillation and mean modulus over the cubes of ``side`` samples."""
    dim = samples.ndim
    count = samples.shape[0] // side
    blocks = samples.reshape(sum(((count, side),) * dim, ()))
    inner = tuple(range(1, 2 * dim, 2))
    mean = blocks.mean(axis=inner, keepdims=True)
    oscillation = np.abs(blocks - mean).mean(axis=inner)
    modulus = np.abs(blocks).mean(axis=inner)
    return oscillation, modulus


def cube_sides(points: int) -> list[int]:
    """Dyadic cube sides, in samples, from the whole box down to two samples."""
    sides = []
    side = points
    while side >= MIN_CUBE_SAMPLES:
        sides.append(side)
        side //= 2
    return sides


def bmo_norms(f: Field) -> tuple[NormReport, NormReport]:
    """``(bmo, BMO)`` over dyadic cubes of the box and their half-offset translates.

    ``BMO`` is the largest mean oscillation; ``bmo`` adds the oscillation over
    cubes of side at most 1 to the largest mean modulus over cubes of side at
    least 1.
    """
    f.require(Space.PHYSICAL)
    grid = f.grid
    samples = f.samples
    small_osc = 0.0
    all_osc = 0.0
    large_mean = 0.0
    for side in cube_sides(grid.points):
        length = side * grid.spacing
        shifts = (0, side // 2) if side < grid.points else (0,)
        for offset in itertools.product(shifts, repeat=grid.dim):
            rolled = np.roll(samples, offset, axis=tuple(range(grid.dim)))
            oscillation, modulus = _cube_statistics(rolled, side)
            peak_osc = float(oscillation.max())
            all_osc = max(all_osc, peak_osc)
            if length <= 1.0:
                small_osc = max(small_osc, peak_osc)
            if length >= 1.0:
                large_mean = max(large_mean, float(modulus.max()))
    params = {"cubes": "dyadic+half-offset", **grid.describe()}
    local = NormReport(small_osc + large_mean, SpaceTag.BMO_LOCAL, params)
    homogeneous = NormReport(all_osc, SpaceTag.BMO, params)
    LOGGER.debug("bmo=%.6e BMO=%.6e", local.value, homogeneous.value)
    return local, homogeneous

