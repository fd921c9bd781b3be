"""Sup-norm block seminorms of functions of ``(xi, eta)`` and their two inequalities.

The seminorm is
``sup_{k1,k2} 2^{k1 s1 + k2 s2} ||psi_{k1}(D_xi) psi_{k2}(D_eta) f||_inf``.
It is submultiplicative up to a constant for positive ``s``, and a dilation
``f(l1 xi, l2 eta)`` costs at most ``max(1, l1^s1) max(1, l2^s2)``.
"""

from __future__ import annotations

import logging
from typing import Callable, NamedTuple, Sequence

import numpy as np

from fields import GridSpec
from partitions import PartitionFamily, make_lp
from symbols.localize import BlockNorm, SampledFactor
from symbols.norms import DEFAULT_K_MAX, TruncationParams, sweep_shells

LOGGER = logging.getLogger("bilinpdo.symbols")

PRODUCT_CONSTANT = 64.0
DILATION_CONSTANT = 4.0

JointFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]


class DaggerCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float
    passed: bool


def sample_joint(func: JointFunc, grid: GridSpec) -> np.ndarray:
    """Samples of ``func(xi, eta)`` with both slots on ``grid``."""
    n = grid.dim
    pts = grid.coordinates()
    xi = pts.reshape(grid.shape + (1,) * n + (n,))
    eta = pts.reshape((1,) * n + grid.shape + (n,))
    return np.broadcast_to(np.asarray(func(xi, eta)), grid.shape * 2).copy()


def dagger_seminorm(
    samples: np.ndarray,
    grid: GridSpec,
    s: Sequence[float],
    lp: PartitionFamily | None = None,
) -> float:
    lp = lp or make_lp(grid.dim, DEFAULT_K_MAX)
    values = np.asarray(samples, dtype=complex)
    factor = SampledFactor(("xi", "eta"), (grid, grid), values)
    weights = (float(s[0]), float(s[1]))

    def term(k: tuple[int, ...]) -> float:
        scale = 2.0 ** (k[0] * weights[0] + k[1] * weights[1])
        return scale * factor.block_norm(lp, tuple(k), BlockNorm.SUP)

    return sweep_shells(factor.caps(lp), term, TruncationParams(), use_max=True).value


def product_check(
    f1: JointFunc,
    f2: JointFunc,
    grid: GridSpec,
    s: Sequence[float] = (0.5, 0.5),
    *,
    constant: float = PRODUCT_CONSTANT,
) -> DaggerCheck:
    """``N(f1 f2) <= C N(f1) N(f2)``."""
    a = sample_joint(f1, grid)
    b = sample_joint(f2, grid)
    lhs = dagger_seminorm(a * b, grid, s)
    rhs = dagger_seminorm(a, grid, s) * dagger_seminorm(b, grid, s)
    ratio = lhs / rhs if rhs > 0 else 0.0
    LOGGER.debug("Product check ratio %.4f", ratio)
    return DaggerCheck(lhs, rhs, ratio, ratio <= constant)


def dilation_check(
    f: JointFunc,
    grid: GridSpec,
    lam: Sequence[float],
    s: Sequence[float] = (0.5, 0.5),
    *,
    constant: float = DILATION_CONSTANT,
) -> DaggerCheck:
    """``N(f(l1 ., l2 .)) <= C max(1, l1^s1) max(1, l2^s2) N(f)``."""
    l1, l2 = float(lam[0]), float(lam[1])

    def dilated(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return f(l1 * xi, l2 * eta)

    lhs = dagger_seminorm(sample_joint(dilated, grid), grid, s)
    base = dagger_seminorm(sample_joint(f, grid), grid, s)
    rhs = max(1.0, l1 ** s[0]) * max(1.0, l2 ** s[1]) * base
    ratio = lhs / rhs if rhs > 0 else 0.0
    LOGGER.debug("Dilation check lambda=(%g, %g) ratio %.4f", l1, l2, ratio)
    return DaggerCheck(lhs, rhs, ratio, ratio <= constant)
