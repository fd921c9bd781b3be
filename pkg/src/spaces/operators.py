"""The smoothing operator ``S``, windowed square functions and BMO multiplier sweeps."""

from __future__ import annotations

import itertools
import logging
import math
from typing import Iterable, NamedTuple

import numpy as np

from fields import Field, Space, convolve, dft, idft
from partitions import RadialCutoff
from partitions.profiles import Profile
from spaces.hardy import bmo_norms
from spaces.report import NormReport, SpaceTag
from utils.errors import PreconditionError
from utils.summation import stable_norm

LOGGER = logging.getLogger("bilinpdo.spaces")

PSI_ORIGIN_TOLERANCE = 1e-12
ZERO_TOLERANCE = 1e-12


def smoothing_tail_mass(dim: int, radius: float) -> float:
    """Mass of ``(1 + |x|)^{-(n+1)}`` outside the ball of ``radius``."""
    if dim == 1:
        return 2.0 / (1.0 + radius)
    if dim == 2:
        return 2.0 * math.pi * (1.0 / (1.0 + radius) - 0.5 / (1.0 + radius) ** 2)
    raise PreconditionError(f"dim must be 1 or 2, got: {dim}")


def smoothing_kernel(f: Field) -> Field:
    grid = f.grid
    radius = np.linalg.norm(grid.coordinates(), axis=-1)
    kernel = (1.0 + radius) ** (-(grid.dim + 1))
    kernel[radius > 0.5 * grid.extent] = 0.0
    return Field(grid, kernel)


def smoothing_S(f: Field) -> Field:
    """``S f(x) = int |f(y)| (1 + |x - y|)^{-(n+1)} dy``, kernel cut at ``T/2``."""
    f.require(Space.PHYSICAL)
    tail = smoothing_tail_mass(f.grid.dim, 0.5 * f.grid.extent)
    smoothed = convolve(f.abs(), smoothing_kernel(f))
    return Field(
        f.grid, smoothed.samples.real, Space.PHYSICAL, {**f.meta, "tail_mass": tail}
    )


def _lattice_centres(f: Field, reach: float) -> Iterable[tuple[int, ...]]:
    bound = int(math.floor(f.grid.nyquist + reach))
    span = range(-bound, bound + 1)
    return itertools.product(span, repeat=f.grid.dim)


def square_function(
    f: Field,
    R: float,
    window: RadialCutoff | None = None,
    restrict_to_zero_of_window: bool = False,
    p: float = 2.0,
) -> NormReport:
    """``|| (sum_nu |window((D - nu) / R) f|^2)^{1/2} ||_{L^p}`` over ``nu`` in ``Z^n``.

    With ``restrict_to_zero_of_window`` only centres with ``window(-nu / R) = 0``
    contribute.
    """
    if R < 1:
        raise PreconditionError(f"R must be >= 1, got: {R}")
    if not p >= 1:
        raise PreconditionError(f"p must lie in [1, inf], got: {p}")
    f.require(Space.PHYSICAL)
    window = window or RadialCutoff()
    grid = f.grid
    spectrum = dft(f)
    xi = grid.frequencies()
    total = np.zeros(grid.shape)
    terms = 0
    for centre in _lattice_centres(f, R * window.support):
        nu = np.asarray(centre, dtype=float)
        if restrict_to_zero_of_window and window(-nu[None, :] / R)[0] != 0.0:
            continue
        product = spectrum.samples * window((xi - nu) / R)
        if not np.any(product):
            continue
        piece = idft(spectrum.with_samples(product))
        total += np.abs(piece.samples) ** 2
        terms += 1
    value = stable_norm(np.sqrt(total), p, grid.cell)
    LOGGER.debug("Square function R=%g p=%g over %d centres: %.6e", R, p, terms, value)
    return NormReport(
        value,
        SpaceTag.SQUARE,
        {
            "R": R,
            "p": p,
            "terms": terms,
            "restricted": restrict_to_zero_of_window,
            **grid.describe(),
        },
    )


class BmoMultiplierRow(NamedTuple):
    a: float
    phi_ratio: float
    psi_ratio: float


def _safe_ratio(numerator: float, denominator: float, scale: float) -> float:
    tolerance = ZERO_TOLERANCE * max(scale, 1.0)
    if denominator <= tolerance:
        return 0.0 if numerator <= tolerance else math.inf
    return numerator / denominator


def bmo_multiplier_bound(
    h: Field, a_levels: Iterable[float], phi: Profile, psi: Profile
) -> list[BmoMultiplierRow]:
    """Rows ``(a, low, high)`` of the bmo and BMO frequency-piece ratios.

    ``low = ||phi(D/2^a) h||_inf / ((1+a)||h||_bmo)`` and
    ``high = ||psi(D/2^a) h||_inf / ||h||_BMO``.
    """
    h.require(Space.PHYSICAL)
    origin = float(np.abs(psi(np.zeros((1, h.grid.dim))))[0])
    if origin > PSI_ORIGIN_TOLERANCE:
        raise PreconditionError(
            f"psi must vanish at the origin, got |psi(0)| = {origin:.3e}"
        )
    local, homogeneous = bmo_norms(h)
    spectrum = dft(h)
    xi = h.grid.frequencies()
    scale = h.peak
    rows = []
    for a in a_levels:
        if a < 0:
            raise PreconditionError(f"a must be >= 0, got: {a}")
        dilation = 2.0**a
        low = idft(spectrum.with_samples(spectrum.samples * phi(xi / dilation)))
        high = idft(spectrum.with_samples(spectrum.samples * psi(xi / dilation)))
        rows.append(
            BmoMultiplierRow(
                float(a),
                _safe_ratio(low.peak, (1.0 + a) * local.value, scale),
                _safe_ratio(high.peak, homogeneous.value, scale),
            )
        )
    LOGGER.info("BMO multiplier sweep over %d levels", len(rows))
    return rows
