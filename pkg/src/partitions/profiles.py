"""Smooth radial profiles built from the ``exp(-1/t)`` transition function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

Profile = Callable[[np.ndarray], np.ndarray]


def _transition(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    positive = t > 0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


def smooth_step(t: np.ndarray | float) -> np.ndarray:
    """C-infinity ramp: 0 for ``t <= 0``, 1 for ``t >= 1``, monotone between."""
    clipped = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    rise = _transition(clipped)
    fall = _transition(1.0 - clipped)
    return rise / (rise + fall)


def bump(u: np.ndarray | float) -> np.ndarray:
    """``exp(-1/(1 - u^2))`` on ``|u| < 1``, zero elsewhere."""
    values = np.asarray(u, dtype=float)
    out = np.zeros_like(values)
    inside = np.abs(values) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - values[inside] ** 2))
    return out


class RadialFunction(Protocol):
    def of_radius(self, radius: np.ndarray) -> np.ndarray: ...

    def __call__(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class RadialCutoff:
    """Equal to 1 on ``|z| <= inner * scale`` and 0 on ``|z| >= outer * scale``."""

    inner: float = 1.0
    outer: float = 2.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.inner < self.outer:
            raise ValueError(
                f"cutoff radii must satisfy 0 < inner < outer, got "
                f"{self.inner}, {self.outer}"
            )

    def of_radius(self, radius: np.ndarray) -> np.ndarray:
        r = np.asarray(radius, dtype=float) / self.scale
        return 1.0 - smooth_step((r - self.inner) / (self.outer - self.inner))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.of_radius(np.linalg.norm(np.asarray(points), axis=-1))

    def dilated(self, factor: float) -> "RadialCutoff":
        """``z -> self(z / factor)``."""
        return RadialCutoff(self.inner, self.outer, self.scale * factor)

    @property
    def plateau(self) -> float:
        return self.inner * self.scale

    @property
    def support(self) -> float:
        return self.outer * self.scale


@dataclass(frozen=True)
class AnnularBump:
    """Equal to 1 on ``[r1, r2]``, supported in ``[r0, r3]`` (radii of ``|z|``)."""

    r0: float
    r1: float
    r2: float
    r3: float

    def __post_init__(self) -> None:
        if not 0 <= self.r0 < self.r1 <= self.r2 < self.r3:
            raise ValueError(
                "annulus radii must satisfy 0 <= r0 < r1 <= r2 < r3, got "
                f"{(self.r0, self.r1, self.r2, self.r3)}"
            )

    def of_radius(self, radius: np.ndarray) -> np.ndarray:
        r = np.asarray(radius, dtype=float)
        rise = smooth_step((r - self.r0) / (self.r1 - self.r0))
        fall = 1.0 - smooth_step((r - self.r2) / (self.r3 - self.r2))
        return rise * fall

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.of_radius(np.linalg.norm(np.asarray(points), axis=-1))


@dataclass(frozen=True)
class NormalizedBump:
    """Nonnegative radial bump supported in ``|z| < radius``."""

    radius: float = 1.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(points), axis=-1)
        return bump(r / self.radius)


def shifted(profile: Profile, center: np.ndarray | float) -> Profile:
    """``z -> profile(z - center)``."""
    offset = np.asarray(center, dtype=float)

    def evaluate(points: np.ndarray) -> np.ndarray:
        return profile(np.asarray(points) - offset)

    return evaluate


def scaled_argument(profile: Profile, factor: float) -> Profile:
    """``z -> profile(z / factor)``."""

    def evaluate(points: np.ndarray) -> np.ndarray:
        return profile(np.asarray(points) / factor)

    return evaluate
