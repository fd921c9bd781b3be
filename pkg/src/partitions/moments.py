"""Vanishing moments ``int x^alpha F^{-1} psi_k(x) dx`` of Littlewood-Paley pieces.

The kernel ``F^{-1} psi_k`` is sampled on a lattice and summed against
``x^alpha`` and a Gaussian window ``exp(-|x|^2 / (2 R^2))``.  The window's
transform is below double precision wherever ``psi_k`` is nonzero
(``|xi| >= inner 2^{k-1}``), so the windowed sum equals the moment up to
rounding even though the kernel decays only like ``exp(-c |x|^{1/2})``.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import NamedTuple

import numpy as np

from fields import GridSpec, inverse_array, next_power_of_two
from partitions.littlewood_paley import PartitionFamily
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.partitions")

# window radius R times the inner radius of psi_k
WINDOW_REACH = 12.0
# box half-width in units of R
BOX_WINDOWS = 8.0
NYQUIST_MARGIN = 1.5
MOMENT_BUDGET = 1 << 22


class MomentReport(NamedTuple):
    k: int
    order: int
    max_moment: float
    worst_index: tuple[int, ...]
    window: float
    grid: GridSpec


def moment_grid(family: PartitionFamily, k: int) -> tuple[GridSpec, float]:
    """Lattice and window radius ``R`` for the moments of ``psi_k``."""
    scale = 2.0 ** max(k - 1, 0)
    window = WINDOW_REACH / (family.inner * scale)
    extent = next_power_of_two(2.0 * BOX_WINDOWS * window)
    _, outer = family.piece_support(k)
    points = next_power_of_two(extent * NYQUIST_MARGIN * outer / math.pi)
    grid = GridSpec(family.ambient_dim, extent, points)
    if grid.size > MOMENT_BUDGET:
        raise PreconditionError(
            f"moments of piece {k} need {grid.size} samples, over the budget of "
            f"{MOMENT_BUDGET}"
        )
    return grid, window


def check_moments(family: PartitionFamily, k: int, order: int = 4) -> MomentReport:
    """Largest ``|sum_x x^alpha K_k(x) W(x) dx^n|`` over ``|alpha| <= order``."""
    if order < 0:
        raise PreconditionError(f"order must be >= 0, got: {order}")
    grid, window = moment_grid(family, k)
    axes = tuple(range(grid.dim))
    kernel = inverse_array(family.piece(k, grid.frequencies()), axes, grid.cell)
    x = grid.coordinates()
    weight = np.exp(-0.5 * np.sum(x**2, axis=-1) / window**2)
    weighted = kernel.real * weight * grid.cell
    worst = 0.0
    worst_index: tuple[int, ...] = (0,) * grid.dim
    for alpha in itertools.product(range(order + 1), repeat=grid.dim):
        if sum(alpha) > order:
            continue
        monomial = np.prod([x[..., i] ** a for i, a in enumerate(alpha)], axis=0)
        size = abs(math.fsum((monomial * weighted).ravel()))
        if size > worst:
            worst, worst_index = size, tuple(alpha)
    LOGGER.debug(
        "Moments of piece %d up to order %d on %s, R=%g: %.3e",
        k,
        order,
        grid,
        window,
        worst,
    )
    return MomentReport(k, order, worst, worst_index, window, grid)
