"""Dyadic Littlewood-Paley families ``psi_k = phi(./2^k) - phi(./2^{k-1})``."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from partitions.profiles import RadialCutoff
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.partitions")

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class PartitionFamily:
    """Radial dyadic partition of unity on ``R^ambient_dim``."""

    base: RadialCutoff
    k_max: int
    ambient_dim: int
    label: str = "standard"

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise PreconditionError(f"k_max must be >= 1, got: {self.k_max}")
        if self.ambient_dim < 1:
            raise PreconditionError(
                f"ambient_dim must be >= 1, got: {self.ambient_dim}"
            )

    @property
    def inner(self) -> float:
        return self.base.inner * self.base.scale

    @property
    def outer(self) -> float:
        return self.base.outer * self.base.scale

    def cutoff_radial(self, k: int, radius: np.ndarray) -> np.ndarray:
        """``phi(r / 2^k)``."""
        return self.base.of_radius(np.asarray(radius, dtype=float) / 2.0**k)

    def piece_radial(self, k: int, radius: np.ndarray) -> np.ndarray:
        if k < 0:
            raise PreconditionError(f"piece index must be >= 0, got: {k}")
        if k == 0:
            return self.cutoff_radial(0, radius)
        return self.cutoff_radial(k, radius) - self.cutoff_radial(k - 1, radius)

    def piece(self, k: int, points: np.ndarray) -> np.ndarray:
        return self.piece_radial(k, np.linalg.norm(np.asarray(points), axis=-1))

    def partial_sum(self, k_last: int, points: np.ndarray) -> np.ndarray:
        radius = np.linalg.norm(np.asarray(points), axis=-1)
        total = np.zeros_like(radius)
        for k in range(k_last + 1):
            total = total + self.piece_radial(k, radius)
        return total

    def piece_support(self, k: int) -> tuple[float, float]:
        """Radii ``(lo, hi)`` outside which ``psi_k`` vanishes."""
        if k == 0:
            return 0.0, self.outer
        return self.inner * 2.0 ** (k - 1), self.outer * 2.0**k

    def covering_level(self, radius: float) -> int:
        """Smallest ``K`` with ``sum_{k<=K} psi_k = 1`` on ``|z| <= radius``."""
        if radius <= self.inner:
            return 0
        return int(math.ceil(math.log2(radius / self.inner)))

    def shells_for(self, radius: float) -> range:
        return range(self.covering_level(radius) + 1)


def make_lp(
    dim: int, k_max: int, profile_sharpness: float = 1.0
) -> PartitionFamily:
    """Standard family: ``phi = 1`` on ``|z| <= 2 - 1/s``, ``phi = 0`` for ``|z| >= 2``.

    ``profile_sharpness = 1`` gives the ramp between radii 1 and 2; larger
    values narrow the ramp toward radius 2.
    """
    if profile_sharpness < 1.0:
        raise PreconditionError(
            f"profile_sharpness must be >= 1, got: {profile_sharpness}"
        )
    base = RadialCutoff(inner=2.0 - 1.0 / profile_sharpness, outer=2.0)
    LOGGER.debug(
        "Built LP family dim=%d k_max=%d ramp=[%.3f, 2]", dim, k_max, base.inner
    )
    return PartitionFamily(base, k_max, dim, label=f"standard(s={profile_sharpness:g})")


def delta_preset(dim: int, k_max: int, delta: float = DEFAULT_DELTA) -> PartitionFamily:
    """Narrow ramp: ``phi = 1`` up to ``2^{1/2-delta}``, 0 past ``2^{1/2+delta}``."""
    if not 0 < delta < 0.5:
        raise PreconditionError(f"delta must lie in (0, 1/2), got: {delta}")
    base = RadialCutoff(inner=2.0 ** (0.5 - delta), outer=2.0 ** (0.5 + delta))
    return PartitionFamily(base, k_max, dim, label=f"delta({delta:g})")


def export_csv(
    family: PartitionFamily,
    path: Path,
    samples: Sequence[Sequence[float]] | np.ndarray,
    pieces: Iterable[int] | None = None,
) -> Path:
    """Write ``piece,k,xi...,value`` rows for the requested pieces."""
    points = np.atleast_2d(np.asarray(samples, dtype=float))
    indices = list(pieces) if pieces is not None else list(range(family.k_max + 1))
    coords = [f"xi{i}" for i in range(points.shape[1])]
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["piece", "k", *coords, "value"])
        for k in indices:
            values = family.piece(k, points)
            name = "phi" if k == 0 else "psi"
            for point, value in zip(points, values):
                writer.writerow(
                    [name, k, *(f"{c:.12g}" for c in point), f"{value:.17g}"]
                )
    LOGGER.info("Exported %d pieces to %s", len(indices), path)
    return path
