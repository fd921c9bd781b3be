"""Dyadic localisation ``sigma_j`` of a symbol and its Littlewood-Paley blocks.

``sigma_j(x, xi, eta) = sigma(2^{-j rho} x, 2^{j rho} xi, 2^{j rho} eta)
Psi_j(2^{j rho} xi, 2^{j rho} eta)`` is sampled on a box fitted to ``j``: the
frequency box holds the rescaled shell with a margin and the x box holds the
rescaled x support (or one period).  Each sampled factor covers one or more of
the variable groups ``x``, ``xi`` and ``eta``; block norms of a product of
factors in disjoint variables are products of the factor block norms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from fields import GridSpec, forward_array, inverse_array, next_power_of_two
from partitions import PartitionFamily
from spaces import ul2_array
from symbols.symbol import Symbol
from utils.errors import PreconditionError, UnsupportedSymbolError

LOGGER = logging.getLogger("bilinpdo.symbols")

GROUPS = ("x", "xi", "eta")
DENSE_BUDGET = 1 << 24
FREQUENCY_MARGIN = 2.0
X_MARGIN = 2.0


class BlockNorm(str, Enum):
    UL2 = "ul2"
    SUP = "sup"


def _even_extent(half_width: float) -> int:
    return 2 * int(math.ceil(half_width))


def dual_grid(dim: int, half_width: float, dual_levels: int) -> GridSpec:
    """Box ``[-E/2, E/2)^n`` covering ``half_width`` and resolving ``dual_levels``."""
    extent = _even_extent(half_width)
    points = next_power_of_two(extent * 2.0 ** (dual_levels + 1) / math.pi)
    return GridSpec(dim, extent, points)


@dataclass(frozen=True)
class BlockGrid:
    """Per-group sampling boxes for one ``j``; ``x`` is ``None`` if sigma ignores x."""

    x: Optional[GridSpec]
    xi: GridSpec
    eta: GridSpec

    def for_group(self, group: str) -> Optional[GridSpec]:
        return getattr(self, group)

    def size(self) -> int:
        total = self.xi.size * self.eta.size
        return total * (self.x.size if self.x is not None else 1)


def shell_radius(symbol: Symbol, j: int, rho: float, lp2n: PartitionFamily) -> float:
    """Radius of the rescaled frequency region where ``sigma_j`` can be nonzero."""
    reach = 2.0**j * lp2n.outer
    if symbol.freq_support_radius is not None:
        reach = min(reach, symbol.freq_support_radius)
    return reach / 2.0 ** (j * rho)


def shell_is_empty(symbol: Symbol, j: int, lp2n: PartitionFamily) -> bool:
    if j == 0 or symbol.freq_support_radius is None:
        return False
    return 2.0 ** (j - 1) * lp2n.inner >= symbol.freq_support_radius


def shell_is_flat(symbol: Symbol, j: int, lp2n: PartitionFamily) -> bool:
    """``Psi_0 = 1`` on the whole frequency support of ``sigma``."""
    if j != 0 or symbol.freq_support_radius is None:
        return False
    return symbol.freq_support_radius <= lp2n.inner


def fit_block_grid(
    symbol: Symbol,
    j: int,
    rho: float,
    lp2n: PartitionFamily,
    dual_levels: int,
    frequency_grid: GridSpec | None = None,
    *,
    xi_grid: GridSpec | None = None,
    eta_grid: GridSpec | None = None,
) -> BlockGrid:
    """Sampling boxes for ``sigma_j``; ``xi_grid``/``eta_grid`` override one slot."""
    radius = shell_radius(symbol, j, rho, lp2n)
    for given in (frequency_grid, xi_grid, eta_grid):
        if given is not None and 0.5 * given.extent < radius:
            raise PreconditionError(
                f"frequency grid of extent {given.extent} is too small for "
                f"the shell of radius {radius:.3f} at j={j}"
            )
    if frequency_grid is not None:
        freq = frequency_grid
    else:
        freq = dual_grid(symbol.dim, radius + FREQUENCY_MARGIN, dual_levels)
    xi = xi_grid or freq
    eta = eta_grid or freq
    if symbol.x_independent:
        return BlockGrid(None, xi, eta)
    dilation = 2.0 ** (j * rho)
    if symbol.x_support_radius is not None:
        x_grid = dual_grid(
            symbol.dim, symbol.x_support_radius * dilation + X_MARGIN, dual_levels
        )
    elif symbol.x_period is not None:
        if rho != 0:
            raise UnsupportedSymbolError(
                f"periodic symbol {symbol.label!r} can only be localised with rho = 0"
            )
        period = symbol.x_period if symbol.x_period % 2 == 0 else 2 * symbol.x_period
        points = next_power_of_two(period * 2.0 ** (dual_levels + 1) / math.pi)
        x_grid = GridSpec(symbol.dim, period, points)
    else:
        raise UnsupportedSymbolError(
            f"symbol {symbol.label!r} needs an x support radius, an integer period "
            "or the x-independent flag"
        )
    return BlockGrid(x_grid, xi, eta)


@dataclass(frozen=True, eq=False)
class SampledFactor:
    """Samples of one factor over consecutive variable groups."""

    groups: tuple[str, ...]
    grids: tuple[GridSpec, ...]
    samples: np.ndarray
    _cache: dict[Any, Any] = field(default_factory=dict, repr=False)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(self.samples.ndim))

    @property
    def cell(self) -> float:
        return math.prod(grid.cell for grid in self.grids)

    def coordinates(self) -> list[np.ndarray]:
        return [grid.axis() for grid in self.grids for _ in range(grid.dim)]

    def spectrum(self) -> np.ndarray:
        if "spectrum" not in self._cache:
            self._cache["spectrum"] = forward_array(self.samples, self.axes, 1.0)
        return self._cache["spectrum"]

    def caps(self, lp: PartitionFamily) -> tuple[int, ...]:
        """Largest useful piece index per group; the rest vanish on the dual lattice."""

        return tuple(
            lp.covering_level(grid.nyquist * math.sqrt(grid.dim)) for grid in self.grids
        )

    def multiplier(self, lp: PartitionFamily, ks: tuple[int, ...]) -> np.ndarray:
        weight = np.ones((1,) * self.samples.ndim)
        offset = 0
        for grid, k in zip(self.grids, ks):
            piece = lp.piece_radial(k, grid.frequency_radius())
            shape = [1] * self.samples.ndim
            shape[offset : offset + grid.dim] = grid.shape
            weight = weight * piece.reshape(shape)
            offset += grid.dim
        return weight

    def block(self, lp: PartitionFamily, ks: tuple[int, ...]) -> np.ndarray:
        return inverse_array(self.spectrum() * self.multiplier(lp, ks), self.axes, 1.0)

    def block_norm(
        self, lp: PartitionFamily, ks: tuple[int, ...], kind: BlockNorm
    ) -> float:
        key = (lp, ks, kind)
        if key in self._cache:
            return self._cache[key]
        if any(k > cap for k, cap in zip(ks, self.caps(lp))):
            value = 0.0
        else:
            values = self.block(lp, ks)
            if kind is BlockNorm.SUP:
                value = float(np.max(np.abs(values)))
            else:
                value = ul2_array(values, self.coordinates(), self.axes, self.cell)
        self._cache[key] = value
        return value


@dataclass(frozen=True)
class LocalizedSymbolBlock:
    j: int
    rho: float
    k: tuple[int, int, int]
    samples: np.ndarray
    block_norm_ul2: float
    block_norm_sup: float


@dataclass(frozen=True, eq=False)
class LocalizedSymbol:
    """``sigma_j`` held as sampled factors over disjoint variable groups."""

    j: int
    rho: float
    dim: int
    grid: BlockGrid
    factors: tuple[SampledFactor, ...]
    x_constant: bool
    label: str = "symbol"

    @property
    def is_zero(self) -> bool:
        return not self.factors or any(
            not np.any(factor.samples) for factor in self.factors
        )

    def caps(self, lp: PartitionFamily) -> tuple[int, int, int]:
        caps = {"x": 0}
        for factor in self.factors:
            caps.update(zip(factor.groups, factor.caps(lp)))
        return caps.get("x", 0), caps.get("xi", 0), caps.get("eta", 0)

    def _split(self, k: tuple[int, int, int], factor: SampledFactor) -> tuple[int, ...]:
        lookup = dict(zip(GROUPS, k))
        return tuple(lookup[group] for group in factor.groups)

    def block_norm(
        self,
        k: tuple[int, int, int],
        lp: PartitionFamily,
        kind: BlockNorm = BlockNorm.UL2,
    ) -> float:
        if self.is_zero or (self.x_constant and k[0] > 0):
            return 0.0
        value = 1.0
        for factor in self.factors:
            value *= factor.block_norm(lp, self._split(k, factor), kind)
            if value == 0.0:
                return 0.0
        return value

    def dense(self) -> np.ndarray:
        """Full samples over ``(x, xi, eta)`` axes (x axes dropped when x-constant)."""
        return self._combine([factor.samples for factor in self.factors])

    def dense_block(self, k: tuple[int, int, int], lp: PartitionFamily) -> np.ndarray:
        arrays = [factor.block(lp, self._split(k, factor)) for factor in self.factors]
        if self.x_constant and k[0] > 0:
            arrays = [np.zeros_like(a) for a in arrays]
        return self._combine(arrays)

    def _combine(self, arrays: list[np.ndarray]) -> np.ndarray:
        if not arrays:
            raise PreconditionError("localized symbol has no samples")
        size = math.prod(a.size for a in arrays)
        if size > DENSE_BUDGET:
            raise UnsupportedSymbolError(
                f"dense block of {size} samples exceeds the budget of {DENSE_BUDGET}"
            )
        out = arrays[0]
        for extra in arrays[1:]:
            out = np.multiply.outer(out, extra)
        return out


def _joint_frequencies(
    grid: BlockGrid, dim: int
) -> tuple[np.ndarray, np.ndarray]:
    xi = grid.xi.coordinates()
    eta = grid.eta.coordinates()
    xi_b = xi.reshape(grid.xi.shape + (1,) * dim + (dim,))
    eta_b = eta.reshape((1,) * dim + grid.eta.shape + (dim,))
    return xi_b, eta_b


def localize(
    symbol: Symbol,
    j: int,
    rho: float,
    lp2n: PartitionFamily,
    grid: GridSpec | None = None,
    *,
    dual_levels: int = 3,
    xi_grid: GridSpec | None = None,
    eta_grid: GridSpec | None = None,
) -> LocalizedSymbol:
    """Sample ``sigma_j``; ``grid`` optionally fixes the frequency box of each slot.

    A fully separable symbol whose support sits on the plateau of ``Psi_0`` is
    kept as one factor per variable group, so ``xi`` and ``eta`` can be
    sampled on boxes of their own.
    """
    if j < 0:
        raise PreconditionError(f"j must be >= 0, got: {j}")
    if not 0 <= rho < 1:
        raise PreconditionError(f"rho must lie in [0, 1), got: {rho}")
    if lp2n.ambient_dim != 2 * symbol.dim:
        raise PreconditionError(
            f"family dimension {lp2n.ambient_dim} does not match 2n = {2 * symbol.dim}"
        )
    blocks = fit_block_grid(
        symbol, j, rho, lp2n, dual_levels, grid, xi_grid=xi_grid, eta_grid=eta_grid
    )
    if shell_is_empty(symbol, j, lp2n):
        LOGGER.debug("Shell j=%d misses the support of %s", j, symbol.label)
        return LocalizedSymbol(
            j, rho, symbol.dim, blocks, (), symbol.x_independent, symbol.label
        )

    n = symbol.dim
    if symbol.fully_separable and shell_is_flat(symbol, j, lp2n):
        return _localize_factored(symbol, rho, blocks)
    scale = 2.0 ** (j * rho)
    xi_b, eta_b = _joint_frequencies(blocks, n)
    radius = scale * np.sqrt(
        np.sum(xi_b**2, axis=-1) + np.sum(eta_b**2, axis=-1)
    )
    shell = lp2n.piece_radial(j, radius)

    if symbol.x_separable:
        freq_samples = symbol.frequency_part(scale * xi_b, scale * eta_b) * shell
        freq = SampledFactor(("xi", "eta"), (blocks.xi, blocks.eta), freq_samples)
        if symbol.x_independent:
            return LocalizedSymbol(j, rho, n, blocks, (freq,), True, symbol.label)
        x_samples = symbol.spatial_part(blocks.x.coordinates() / scale)
        x_factor = SampledFactor(("x",), (blocks.x,), x_samples)
        return LocalizedSymbol(j, rho, n, blocks, (x_factor, freq), False, symbol.label)

    if blocks.size() > DENSE_BUDGET:
        raise UnsupportedSymbolError(
            f"non-separable symbol {symbol.label!r} needs {blocks.size()} samples at "
            f"j={j}, over the budget of {DENSE_BUDGET}"
        )
    x = blocks.x.coordinates() / scale
    x_b = x.reshape(blocks.x.shape + (1,) * (2 * n) + (n,))
    xi_full = xi_b.reshape((1,) * n + xi_b.shape)
    eta_full = eta_b.reshape((1,) * n + eta_b.shape)
    values = symbol.evaluate(x_b, scale * xi_full, scale * eta_full) * shell
    dense = SampledFactor(
        ("x", "xi", "eta"), (blocks.x, blocks.xi, blocks.eta), np.asarray(values)
    )
    return LocalizedSymbol(j, rho, n, blocks, (dense,), False, symbol.label)


def _localize_factored(
    symbol: Symbol, rho: float, blocks: BlockGrid
) -> LocalizedSymbol:
    factors = []
    if not symbol.x_independent:
        x_samples = symbol.spatial_part(blocks.x.coordinates())
        factors.append(SampledFactor(("x",), (blocks.x,), x_samples))
    for group, grid, func in (
        ("xi", blocks.xi, symbol.xi_factor),
        ("eta", blocks.eta, symbol.eta_factor),
    ):
        samples = np.asarray(func(grid.coordinates()))
        factors.append(SampledFactor((group,), (grid,), samples))
    return LocalizedSymbol(
        0,
        rho,
        symbol.dim,
        blocks,
        tuple(factors),
        symbol.x_independent,
        symbol.label,
    )


def triple_block(
    localized: LocalizedSymbol, k: tuple[int, int, int], lp: PartitionFamily
) -> LocalizedSymbolBlock:
    """``psi_{k0}(D_x) psi_{k1}(D_xi) psi_{k2}(D_eta) sigma_j`` with its block norms."""
    samples = localized.dense_block(k, lp)
    return LocalizedSymbolBlock(
        localized.j,
        localized.rho,
        tuple(k),
        samples,
        localized.block_norm(k, lp, BlockNorm.UL2),
        localized.block_norm(k, lp, BlockNorm.SUP),
    )
