"""Lebesgue, uniformly local, Besov and Sobolev norms of sampled fields."""

from __future__ import annotations

import logging
import math
from typing import Iterator, Sequence

import numpy as np

from fields import Field, Space, dft, idft
from partitions import PartitionFamily
from spaces.report import NormReport, SpaceTag
from utils.errors import GridMismatchError, PreconditionError
from utils.summation import stable_norm, stable_real_sum

LOGGER = logging.getLogger("bilinpdo.spaces")


def _check_exponent(name: str, value: float) -> None:
    if not value >= 1:
        raise PreconditionError(f"{name} must lie in [1, inf], got: {value}")


def lp_norm(f: Field, p: float) -> NormReport:
    """Riemann-sum ``L^p`` norm; ``p = inf`` is the sample maximum."""
    _check_exponent("p", p)
    f.require(Space.PHYSICAL)
    value = stable_norm(f.samples, p, f.grid.cell)
    return NormReport(value, SpaceTag.LP, {"p": p, **f.grid.describe()})


def unit_cube_starts(coords: np.ndarray) -> np.ndarray:
    """Indices where ``floor(coords)`` changes, for ``np.add.reduceat``."""
    labels = np.floor(np.asarray(coords, dtype=float))
    return np.flatnonzero(np.diff(labels, prepend=labels[0] - 1.0))


def unit_cube_masses(
    density: np.ndarray, coords: Sequence[np.ndarray], axes: Sequence[int]
) -> np.ndarray:
    """Sum ``density`` over unit cells ``[m, m + 1)`` along each listed axis."""
    out = np.asarray(density)
    for axis, axis_coords in zip(axes, coords):
        out = np.add.reduceat(out, unit_cube_starts(axis_coords), axis=axis)
    return out


def ul2_array(
    values: np.ndarray,
    coords: Sequence[np.ndarray],
    axes: Sequence[int],
    cell: float,
) -> float:
    """``sup`` over unit cubes of the cube ``L^2`` norm; other axes are maximised."""
    masses = unit_cube_masses(np.abs(values) ** 2, coords, axes)
    if masses.size == 0:
        return 0.0
    return math.sqrt(float(masses.max()) * cell)


def ul2_norm(f: Field) -> NormReport:
    f.require(Space.PHYSICAL)
    if not float(f.grid.extent).is_integer():
        raise GridMismatchError(f"extent must be an integer, got: {f.grid.extent}")
    axis = f.grid.axis()
    value = ul2_array(
        f.samples, [axis] * f.grid.dim, range(f.grid.dim), f.grid.cell
    )
    return NormReport(value, SpaceTag.L2UL, f.grid.describe())


def _aggregate(values: Sequence[float], q: float) -> float:
    weights = np.asarray(values, dtype=float)
    if weights.size == 0:
        return 0.0
    return stable_norm(weights, q)


def covers_nyquist(lp: PartitionFamily, f: Field) -> bool:
    """``sum_{k <= K_max} psi_k = 1`` on the whole frequency box."""
    corner = f.grid.nyquist * math.sqrt(f.grid.dim)
    return lp.inner * 2.0**lp.k_max >= corner


def _dyadic_pieces(f: Field, lp: PartitionFamily) -> Iterator[np.ndarray]:
    f.require(Space.PHYSICAL)
    if lp.ambient_dim != f.grid.dim:
        raise GridMismatchError(
            f"family dimension {lp.ambient_dim} does not match field dim "
            f"{f.grid.dim}"
        )
    spectrum = dft(f)
    radius = f.grid.frequency_radius()
    for k in range(lp.k_max + 1):
        weighted = spectrum.samples * lp.piece_radial(k, radius)
        yield idft(spectrum.with_samples(weighted)).samples


def besov_blocks(f: Field, p: float, lp: PartitionFamily) -> list[float]:
    """``||Delta_k f||_{L^p}`` for ``k = 0..K_max``."""
    return [stable_norm(piece, p, f.grid.cell) for piece in _dyadic_pieces(f, lp)]


def ul2_blocks(f: Field, lp: PartitionFamily) -> list[float]:
    """``||Delta_k f||_{L^2_ul}`` for ``k = 0..K_max``."""
    axis = f.grid.axis()
    coords = [axis] * f.grid.dim
    axes = range(f.grid.dim)
    return [
        ul2_array(piece, coords, axes, f.grid.cell)
        for piece in _dyadic_pieces(f, lp)
    ]


def besov_norm(
    f: Field, s: float, p: float, q: float, lp: PartitionFamily
) -> NormReport:
    """``|| 2^{ks} ||Delta_k f||_{L^p} ||_{l^q}``."""
    _check_exponent("p", p)
    _check_exponent("q", q)
    if not covers_nyquist(lp, f):
        raise PreconditionError(
            f"K_max={lp.k_max} does not cover the Nyquist radius "
            f"{f.grid.nyquist * math.sqrt(f.grid.dim):.3f}"
        )
    blocks = besov_blocks(f, p, lp)
    weighted = [2.0 ** (k * s) * block for k, block in enumerate(blocks)]
    value = _aggregate(weighted, q)
    LOGGER.debug(
        "Besov s=%g p=%g q=%g over %d blocks: %.6e", s, p, q, len(blocks), value
    )
    params = {"s": s, "p": p, "q": q, "k_max": lp.k_max, "profile": lp.label}
    return NormReport(value, SpaceTag.BESOV, {**params, **f.grid.describe()})


def sobolev_norm(f: Field, s: float) -> NormReport:
    """Bessel-potential norm ``||(1 + |xi|^2)^{s/2} F f||_{L^2} / (2 pi)^{n/2}``."""
    f.require(Space.PHYSICAL)
    grid = f.grid
    spectrum = dft(f).samples
    weight = (1.0 + grid.frequency_radius() ** 2) ** s
    total = stable_real_sum(weight * np.abs(spectrum) ** 2)
    value = math.sqrt(total * (grid.frequency_step / (2.0 * math.pi)) ** grid.dim)
    return NormReport(value, SpaceTag.SOBOLEV, {"s": s, **grid.describe()})
