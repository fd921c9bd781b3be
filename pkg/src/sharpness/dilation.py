"""Shell-wise dilations carrying a ``rho = 0`` symbol into the ``rho`` class.

``sigma_l = sigma Psi_l`` is rescaled to
``sigma_l(2^{l r} x, 2^{-l r} xi, 2^{-l r} eta)`` with ``r = rho / (1 - rho)``;
its dagger norm in the ``(m, rho)`` class is bounded by
``2^{l (m' - m / (1 - rho))}`` times the dagger norm of ``sigma`` in ``(m', 0)``.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np

from partitions import PartitionFamily, make_lp
from sharpness.sweep import Family, SharpnessSweep, SweepRow, run_sweep
from symbols import (
    Symbol,
    TruncationParams,
    Variant,
    bs_norm,
    symbol_from_callable,
    x_independent_symbol,
    x_separable_symbol,
)
from utils.errors import PreconditionError, UnsupportedSymbolError

LOGGER = logging.getLogger("bilinpdo.sharpness")

SLOPE_SLACK = 0.15


def _stretch(rho: float) -> float:
    if not 0 < rho < 1:
        raise PreconditionError(
            f"rho must lie in (0, 1) for the dilation transfer, got: {rho}"
        )
    return rho / (1.0 - rho)


def relevant_shells(ell: int, rho: float) -> range:
    """Shells ``j`` on which the dilated piece can be nonzero."""
    centre = ell / (1.0 - rho)
    return range(math.ceil(max(0.0, centre - 2.0)), math.floor(centre + 2.0) + 1)


def dilate_symbol(
    symbol: Symbol, ell: int, rho: float, lp2n: PartitionFamily | None = None
) -> Symbol:
    """The ``ell``-th shell piece of ``symbol`` under the ``rho`` dilation."""
    if ell < 0:
        raise PreconditionError(f"ell must be >= 0, got: {ell}")
    if symbol.x_period is not None and not symbol.x_independent:
        raise UnsupportedSymbolError(
            f"periodic symbol {symbol.label!r} loses its integer period when dilated"
        )
    stretch = _stretch(rho)
    lp2n = lp2n or make_lp(2 * symbol.dim, ell + 2)
    factor = 2.0 ** (ell * stretch)
    reach = lp2n.outer * 2.0 ** (ell * (1.0 + stretch))
    if symbol.freq_support_radius is not None:
        reach = min(reach, factor * symbol.freq_support_radius)
    label = f"{symbol.label}@l{ell}"

    def shell(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        radius = np.sqrt(np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1))
        return lp2n.piece_radial(ell, radius / factor)

    if symbol.x_separable:
        frequency = symbol.frequency_part

        def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
            return frequency(xi / factor, eta / factor) * shell(xi, eta)

        if symbol.x_independent:
            return x_independent_symbol(
                tau, symbol.dim, label=label, freq_support_radius=reach
            )
        spatial = symbol.spatial_part
        return x_separable_symbol(
            lambda x: spatial(np.asarray(x) * factor),
            tau,
            symbol.dim,
            label=label,
            freq_support_radius=reach,
            x_support_radius=_shrunk(symbol.x_support_radius, factor),
        )

    def func(x: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        values = symbol.evaluate(np.asarray(x) * factor, xi / factor, eta / factor)
        return values * shell(xi, eta)

    return symbol_from_callable(
        func,
        symbol.dim,
        label=label,
        freq_support_radius=reach,
        x_support_radius=_shrunk(symbol.x_support_radius, factor),
    )


def _shrunk(radius: float | None, factor: float) -> float | None:
    return None if radius is None else radius / factor


def transfer_exponent(m: float, mp: float, rho: float) -> float:
    """Predicted ``log2`` growth per shell: ``m' - m / (1 - rho)``."""
    return mp - m / (1.0 - rho)


def _check_orders(m: float, mp: float, rho: float) -> None:
    if not mp < m / (1.0 - rho):
        LOGGER.warning(
            "m'=%g is not below m/(1-rho)=%g; the transfer bound does not decay",
            mp,
            m / (1.0 - rho),
        )


def dilation_row(
    symbol: Symbol,
    ell: int,
    m: float,
    mp: float,
    rho: float,
    s: Sequence[float],
    base_norm: float,
    dual_levels: int = 3,
) -> SweepRow:
    """Dagger norm of the ``ell``-th dilated piece against ``base_norm``."""
    piece = dilate_symbol(symbol, ell, rho)
    shells = relevant_shells(ell, rho)
    truncation = TruncationParams(
        dual_levels=dual_levels, j_range=(shells.start, shells.stop - 1)
    )
    lhs = bs_norm(piece, m, rho, s, Variant.DAGGER, truncation).value
    return SweepRow(
        Family.DILATION_TRANSFER,
        {"ell": ell, "m": m, "mp": mp, "rho": rho},
        lhs,
        base_norm,
        {"predicted": 2.0 ** (ell * transfer_exponent(m, mp, rho))},
    )


def dilation_transfer(
    symbol: Symbol,
    m: float,
    mp: float,
    rho: float,
    s: Sequence[float],
    ell_range: Iterable[int],
    *,
    base_j_max: int | None = None,
    dual_levels: int = 3,
) -> SharpnessSweep:
    """Both sides of the per-shell transfer inequality for every ``ell``.

    The right side, the ``(m', 0)`` dagger norm of ``symbol``, is evaluated
    once over ``j <= base_j_max`` (default: two past the last ``ell``).
    """
    _stretch(rho)
    _check_orders(m, mp, rho)
    ells = sorted(set(int(ell) for ell in ell_range))
    if not ells:
        raise PreconditionError("ell_range must not be empty")
    j_max = ells[-1] + 2 if base_j_max is None else base_j_max
    base = bs_norm(
        symbol,
        mp,
        0.0,
        s,
        Variant.DAGGER,
        TruncationParams(dual_levels=dual_levels, j_max=j_max),
    ).value
    LOGGER.info("Dilation transfer base norm of %s: %.6e", symbol.label, base)
    points = [
        {
            "symbol": symbol,
            "ell": ell,
            "m": m,
            "mp": mp,
            "rho": rho,
            "s": tuple(s),
            "base_norm": base,
            "dual_levels": dual_levels,
        }
        for ell in ells
    ]
    return run_sweep(Family.DILATION_TRANSFER, "ell", points, dilation_row)


def transfer_slope(sweep: SharpnessSweep) -> float:
    """Least-squares slope of ``log2(lhs / rhs)`` against ``ell``."""
    return sweep.fitted_slope(logx=False).slope


def transfer_holds(sweep: SharpnessSweep, m: float, mp: float, rho: float) -> bool:
    """Fitted slope stays within ``SLOPE_SLACK`` of the predicted exponent."""
    return transfer_slope(sweep) <= transfer_exponent(m, mp, rho) + SLOPE_SLACK
