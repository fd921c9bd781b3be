"""Decay signature of block norms for Hormander-class symbols.

For a smooth symbol of order ``m`` the blocks ``||Delta_k sigma_j||`` grow like
``2^{jm}`` in ``j`` and decay faster than any power of ``2^{-k_i}`` in each
``k_i``.  The check fits the ``j`` slope on the ``k = 0`` block and one slope
per ``k_i`` at a fixed ``j`` with the other indices at zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from partitions import PartitionFamily
from symbols.localize import localize
from symbols.norms import default_families
from symbols.symbol import Symbol
from utils.errors import DegenerateFitError
from utils.slopes import SlopeFit, fit_line

LOGGER = logging.getLogger("bilinpdo.symbols")

RELATIVE_FLOOR = 1e-12
MIN_FIT_POINTS = 3
J_SLOPE_TOLERANCE = 0.15
AXES = ("k0", "k1", "k2")


@dataclass(frozen=True)
class DecayReport:
    m: float
    rho: float
    orders: tuple[int, int, int]
    j_fit: SlopeFit
    k_slopes: tuple[Optional[float], Optional[float], Optional[float]]
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def j_slope(self) -> float:
        return self.j_fit.slope

    def j_slope_ok(self, tolerance: float = J_SLOPE_TOLERANCE) -> bool:
        return abs(self.j_slope - self.m) <= tolerance

    def k_slopes_ok(self) -> bool:
        """Each fitted slope is at most ``-(N_i - 1/2)``; all-zero axes pass."""
        return all(
            slope is None or slope <= -(order - 0.5)
            for slope, order in zip(self.k_slopes, self.orders)
        )

    @property
    def passed(self) -> bool:
        return self.j_slope_ok() and self.k_slopes_ok()


def _axis_slope(values: Sequence[float]) -> tuple[Optional[float], str]:
    """Slope of ``log2`` values over ``k = 1..``; ``-inf`` once decay hits the floor."""
    peak = max(values, default=0.0)
    if peak == 0.0:
        return None, "all-zero blocks"
    kept = [(k, v) for k, v in enumerate(values, start=1) if v > RELATIVE_FLOOR * peak]
    if len(kept) < MIN_FIT_POINTS:
        if len(kept) < len(values):
            return -math.inf, "decays below floor"
        raise DegenerateFitError(
            f"need at least {MIN_FIT_POINTS} shells per axis, got {len(kept)}"
        )
    fit = fit_line([k for k, _ in kept], [math.log2(v) for _, v in kept])
    return fit.slope, f"fit over k={kept[0][0]}..{kept[-1][0]}"


def hormander_decay_check(
    symbol: Symbol,
    m: float,
    rho: float,
    orders: Sequence[int] = (2, 2, 2),
    *,
    j_values: Sequence[int] = range(2, 9),
    k_level_j: int = 2,
    j_dual_levels: int = 3,
    k_dual_levels: int = 7,
    lp2n: PartitionFamily | None = None,
    lp: PartitionFamily | None = None,
) -> DecayReport:
    default_2n, default_n = default_families(symbol.dim)
    lp2n = lp2n or default_2n
    lp = lp or default_n
    j_list = list(j_values)
    if len(j_list) < MIN_FIT_POINTS:
        raise DegenerateFitError(
            f"need at least {MIN_FIT_POINTS} values of j, got {len(j_list)}"
        )

    j_norms = []
    for j in j_list:
        loc = localize(symbol, j, rho, lp2n, dual_levels=j_dual_levels)
        j_norms.append(loc.block_norm((0, 0, 0), lp))
    if min(j_norms) <= 0.0:
        raise DegenerateFitError("zero low-frequency block; cannot fit the j slope")
    j_fit = fit_line(j_list, [math.log2(v) for v in j_norms])

    loc = localize(symbol, k_level_j, rho, lp2n, dual_levels=k_dual_levels)
    caps = loc.caps(lp)
    slopes: list[Optional[float]] = []
    notes: dict[str, str] = {}
    for axis, name in enumerate(AXES):
        values = []
        for k_i in range(1, max(caps[axis], 0) + 1):
            k = [0, 0, 0]
            k[axis] = k_i
            values.append(loc.block_norm(tuple(k), lp))
        slope, note = _axis_slope(values)
        slopes.append(slope)
        notes[name] = note
    report = DecayReport(
        m, rho, tuple(int(o) for o in orders), j_fit, tuple(slopes), notes
    )
    LOGGER.info(
        "Decay check %s: j-slope %.3f (m=%g), k-slopes %s",
        symbol.label,
        report.j_slope,
        m,
        report.k_slopes,
    )
    return report
