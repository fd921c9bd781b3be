"""Periodic sampling lattice and sampled fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping

import numpy as np

from utils.errors import GridMismatchError

SUPPORTED_DIMS = (1, 2)


class Space(str, Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


def is_power_of_two(value: int) -> bool:
    return value > 0 and (value & (value - 1)) == 0


def next_power_of_two(value: float, minimum: int = 8) -> int:
    target = max(int(math.ceil(value)), minimum)
    return 1 << (target - 1).bit_length()


@dataclass(frozen=True)
class GridSpec:
    """Box ``[-T/2, T/2)^n`` sampled with ``N`` points per axis.

    Samples sit at ``x_j = -T/2 + j T/N`` in ascending order; frequencies are
    kept in FFT order, ``xi_k = 2 pi k / T``.
    """

    dim: int
    extent: float
    points: int

    def __post_init__(self) -> None:
        if self.dim not in SUPPORTED_DIMS:
            raise GridMismatchError(
                f"dim must be one of {SUPPORTED_DIMS}, got: {self.dim}"
            )
        if not is_power_of_two(self.points) or self.points < 8:
            raise GridMismatchError(
                f"points must be a power of two >= 8, got: {self.points}"
            )
        if self.extent <= 0 or not float(self.extent).is_integer():
            raise GridMismatchError(
                f"extent must be a positive integer, got: {self.extent}"
            )
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def cell(self) -> float:
        """Volume element ``dx^n``."""
        return self.spacing**self.dim

    @property
    def frequency_step(self) -> float:
        return 2.0 * math.pi / self.extent

    @property
    def nyquist(self) -> float:
        return math.pi * self.points / self.extent

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    def axis(self) -> np.ndarray:
        return -0.5 * self.extent + self.spacing * np.arange(self.points)

    def frequency_axis(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def coordinates(self) -> np.ndarray:
        """Sample points, shape ``(N, ..., N, dim)``."""
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def frequencies(self) -> np.ndarray:
        """Frequency lattice in FFT order, shape ``(N, ..., N, dim)``."""
        axes = np.meshgrid(*([self.frequency_axis()] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def frequency_radius(self) -> np.ndarray:
        return np.linalg.norm(self.frequencies(), axis=-1)

    def dilated(self, factor: float) -> "GridSpec":
        """Same sample count on a box ``factor`` times wider."""
        return GridSpec(self.dim, self.extent * factor, self.points)

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return Field(self, np.asarray(func(self.coordinates()), dtype=complex))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape, dtype=complex))

    def delta(self) -> "Field":
        """Unit point mass at the origin (value ``(N/T)^n`` at one sample)."""
        samples = np.zeros(self.shape, dtype=complex)
        samples[(self.points // 2,) * self.dim] = 1.0 / self.cell
        return Field(self, samples)

    def describe(self) -> dict[str, Any]:
        return {"dim": self.dim, "grid_T": self.extent, "grid_N": self.points}


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a :class:`GridSpec`."""

    grid: GridSpec
    samples: np.ndarray
    space: Space = Space.PHYSICAL
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.array(self.samples, dtype=complex)
        if values.shape != self.grid.shape:
            raise GridMismatchError(
                f"samples shape {values.shape} does not match grid shape "
                f"{self.grid.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)
        object.__setattr__(self, "meta", dict(self.meta))

    def require(self, space: Space) -> None:
        if self.space is not space:
            raise GridMismatchError(
                f"expected a {space.value}-space field, got {self.space.value}"
            )

    def check_compatible(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"grid mismatch: {self.grid.describe()} vs {other.grid.describe()}"
            )
        if self.space is not other.space:
            raise GridMismatchError(
                f"space mismatch: {self.space.value} vs {other.space.value}"
            )

    def with_samples(self, samples: np.ndarray, **meta: Any) -> "Field":
        return replace(self, samples=samples, meta={**self.meta, **meta})

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def abs(self) -> "Field":
        return self.with_samples(np.abs(self.samples))

    def conj(self) -> "Field":
        return self.with_samples(np.conj(self.samples))

    def _coerce(self, other: "Field | complex") -> np.ndarray | complex:
        if isinstance(other, Field):
            self.check_compatible(other)
            return other.samples
        return complex(other)

    def __add__(self, other: "Field | complex") -> "Field":
        return self.with_samples(self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other: "Field | complex") -> "Field":
        return self.with_samples(self.samples - self._coerce(other))

    def __mul__(self, other: "Field | complex") -> "Field":
        return self.with_samples(self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_samples(-self.samples)
