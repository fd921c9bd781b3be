"""Uniform unit-cube decomposition ``sum_nu kappa(xi - nu) chi(xi - nu) = 1``.

``chi = w^2`` where ``w`` is a product of one-dimensional cosine sums

    w1(t) = sum_m cos(t s_m) b1(s_m) / sum_m b1(s_m)

over nodes ``s_m = m h`` with ``|s_m| < r = 1 / (2 sqrt n)``.  Each ``w1`` is a
finite trigonometric sum with frequencies in ``[-r, r]``, so the spectrum of
``chi`` is a finite set of point masses inside the unit ball.  On ``[-1, 1]``
every ``t s_m`` lies in ``(-1/2, 1/2)`` and all cosines are positive, so
``chi`` is bounded below there.  The node step ``h = 2 pi / CHI_PERIOD`` makes
``chi`` periodic with period ``CHI_PERIOD`` in each variable.

``kappa = b / D`` with ``b`` a product of bumps on ``[-1, 1]^n`` and
``D(xi) = sum_mu b(xi - mu) chi(xi - mu)`` the ``Z^n``-periodic normaliser.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from partitions.profiles import bump
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.partitions")

MAX_DIM = 9
CHI_PERIOD = 1024
_CHUNK = 1 << 15


def _cosine_nodes(dim: int) -> tuple[np.ndarray, np.ndarray]:
    radius = 1.0 / (2.0 * math.sqrt(dim))
    step = 2.0 * math.pi / CHI_PERIOD
    count = int(math.floor(radius / step))
    nodes = step * np.arange(-count, count + 1)
    weights = bump(nodes / radius)
    return nodes, weights / weights.sum()


@dataclass(frozen=True)
class UniformPair:
    dim: int
    nodes: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    @property
    def spectral_radius(self) -> float:
        """Radius containing the spectrum of ``chi``."""
        return 2.0 * float(np.abs(self.nodes).max()) * math.sqrt(self.dim)

    def _w1(self, t: np.ndarray) -> np.ndarray:
        values = np.asarray(t, dtype=float)
        flat = values.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, _CHUNK):
            block = flat[start : start + _CHUNK]
            phases = np.outer(block, self.nodes)
            out[start : start + _CHUNK] = np.cos(phases) @ self.weights
        return out.reshape(values.shape)

    def chi(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        w = np.ones(pts.shape[:-1])
        for axis in range(self.dim):
            w = w * self._w1(pts[..., axis])
        return w * w

    def box(self, points: np.ndarray) -> np.ndarray:
        """Product of bumps, positive exactly on ``(-1, 1)^n``."""
        pts = np.asarray(points, dtype=float)
        out = np.ones(pts.shape[:-1])
        for axis in range(self.dim):
            out = out * bump(pts[..., axis])
        return out

    def normaliser(self, points: np.ndarray) -> np.ndarray:
        """``D(xi) = sum_mu b(xi - mu) chi(xi - mu)`` over the cubes meeting ``xi``."""
        pts = np.asarray(points, dtype=float)
        base = np.floor(pts)
        total = np.zeros(pts.shape[:-1])
        for corner in itertools.product((0.0, 1.0), repeat=self.dim):
            local = pts - (base + np.asarray(corner))
            total = total + self.box(local) * self.chi(local)
        return total

    def kappa(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        numerator = self.box(pts)
        out = np.zeros_like(numerator)
        inside = numerator > 0
        out[inside] = numerator[inside] / self.normaliser(pts[inside])
        return out

    def piece(self, points: np.ndarray, nu: np.ndarray | tuple[int, ...]) -> np.ndarray:
        """``kappa(xi - nu) chi(xi - nu)``."""
        local = np.asarray(points, dtype=float) - np.asarray(nu, dtype=float)
        return self.kappa(local) * self.chi(local)

    def partition_sum(self, points: np.ndarray) -> np.ndarray:
        """``sum_nu kappa chi(xi - nu)``, summing the cubes that meet each point."""
        pts = np.asarray(points, dtype=float)
        base = np.floor(pts)
        total = np.zeros(pts.shape[:-1])
        for corner in itertools.product((-1.0, 0.0, 1.0, 2.0), repeat=self.dim):
            local = pts - (base + np.asarray(corner))
            total = total + self.kappa(local) * self.chi(local)
        return total

    def chi_lower_bound(self, samples: int = 201) -> float:
        """Minimum of ``chi`` over a tensor grid of ``[-1, 1]^n``."""
        axis = np.linspace(-1.0, 1.0, samples)
        # chi is a product of per-axis factors, so its minimum is too.
        return float(np.min(self._w1(axis) ** 2)) ** self.dim


def make_uniform_pair(dim: int) -> UniformPair:
    if not 1 <= dim <= MAX_DIM:
        raise PreconditionError(f"dim must lie in [1, {MAX_DIM}], got: {dim}")
    nodes, weights = _cosine_nodes(dim)
    LOGGER.debug("Built uniform pair dim=%d with %d cosine nodes", dim, nodes.size)
    return UniformPair(dim, nodes, weights)
