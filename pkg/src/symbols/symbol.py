"""Three-slot symbols ``sigma(x, xi, eta)`` and their structural metadata.

Arguments carry the spatial dimension on their trailing axis and broadcast
against each other.  Optional factor callables describe the separable forms
the localisation and operator code can exploit:

* ``x_factor`` and ``freq_factor``: ``sigma = a(x) tau(xi, eta)``;
* additionally ``xi_factor`` and ``eta_factor``: ``tau = b(xi) c(eta)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from fields import GridSpec
from utils.errors import PreconditionError, UnsupportedSymbolError

LOGGER = logging.getLogger("bilinpdo.symbols")

SymbolFunc = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
SpatialFunc = Callable[[np.ndarray], np.ndarray]
FrequencyFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]

SUPPORT_TOLERANCE = 1e-13


def _norm(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(points, dtype=float), axis=-1)


@dataclass(frozen=True)
class Symbol:
    func: SymbolFunc
    dim: int
    label: str = "symbol"
    x_independent: bool = False
    freq_support_radius: Optional[float] = None
    x_support_radius: Optional[float] = None
    x_period: Optional[int] = None
    x_factor: Optional[SpatialFunc] = None
    freq_factor: Optional[FrequencyFunc] = None
    xi_factor: Optional[SpatialFunc] = None
    eta_factor: Optional[SpatialFunc] = None

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise PreconditionError(f"symbol dim must be 1 or 2, got: {self.dim}")
        if self.freq_support_radius is not None and self.freq_support_radius <= 0:
            raise PreconditionError(
                f"freq_support_radius must be positive, got: {self.freq_support_radius}"
            )
        if self.x_period is not None and (
            int(self.x_period) != self.x_period or self.x_period < 1
        ):
            raise PreconditionError(
                f"x_period must be a positive integer, got: {self.x_period}"
            )

    def evaluate(self, x: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x), np.asarray(xi), np.asarray(eta)))

    __call__ = evaluate

    def frequency_part(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """``tau(xi, eta)`` for x-independent or x-separable symbols."""
        if self.freq_factor is not None:
            return np.asarray(self.freq_factor(xi, eta))
        if self.x_independent:
            origin = np.zeros(self.dim)
            return self.evaluate(origin, xi, eta)
        raise UnsupportedSymbolError(
            f"symbol {self.label!r} has no frequency factor"
        )

    def spatial_part(self, x: np.ndarray) -> np.ndarray:
        if self.x_independent:
            return np.ones(np.asarray(x).shape[:-1])
        if self.x_factor is None:
            raise UnsupportedSymbolError(f"symbol {self.label!r} has no x factor")
        return np.asarray(self.x_factor(x))

    @property
    def x_separable(self) -> bool:
        return self.x_independent or (
            self.x_factor is not None and self.freq_factor is not None
        )

    @property
    def fully_separable(self) -> bool:
        return (
            self.x_separable
            and self.xi_factor is not None
            and self.eta_factor is not None
        )

    def scaled(self, factor: complex) -> "Symbol":
        """``factor * sigma`` with the metadata kept."""
        func = self.func
        updates: dict = {
            "func": lambda x, xi, eta: factor * func(x, xi, eta),
            "label": f"{factor}*{self.label}",
        }
        if self.freq_factor is not None:
            freq = self.freq_factor
            updates["freq_factor"] = lambda xi, eta: factor * freq(xi, eta)
        if self.xi_factor is not None:
            xi_part = self.xi_factor
            updates["xi_factor"] = lambda xi: factor * xi_part(xi)
        return replace(self, **updates)


def symbol_from_callable(
    func: SymbolFunc,
    dim: int,
    *,
    label: str = "symbol",
    x_independent: bool = False,
    freq_support_radius: float | None = None,
    x_support_radius: float | None = None,
    x_period: int | None = None,
) -> Symbol:
    return Symbol(
        func,
        dim,
        label=label,
        x_independent=x_independent,
        freq_support_radius=freq_support_radius,
        x_support_radius=x_support_radius,
        x_period=x_period,
    )


def x_independent_symbol(
    tau: FrequencyFunc,
    dim: int,
    *,
    label: str = "multiplier",
    freq_support_radius: float | None = None,
) -> Symbol:
    """``sigma(x, xi, eta) = tau(xi, eta)``."""
    return Symbol(
        lambda x, xi, eta: tau(xi, eta),
        dim,
        label=label,
        x_independent=True,
        freq_support_radius=freq_support_radius,
        freq_factor=tau,
    )


def x_separable_symbol(
    a: SpatialFunc,
    tau: FrequencyFunc,
    dim: int,
    *,
    label: str = "x-separable",
    freq_support_radius: float | None = None,
    x_support_radius: float | None = None,
    x_period: int | None = None,
) -> Symbol:
    """``sigma(x, xi, eta) = a(x) tau(xi, eta)``."""
    return Symbol(
        lambda x, xi, eta: a(x) * tau(xi, eta),
        dim,
        label=label,
        freq_support_radius=freq_support_radius,
        x_support_radius=x_support_radius,
        x_period=x_period,
        x_factor=a,
        freq_factor=tau,
    )


def separable_symbol(
    a: SpatialFunc | None,
    b: SpatialFunc,
    c: SpatialFunc,
    dim: int,
    *,
    label: str = "separable",
    freq_support_radius: float | None = None,
    x_support_radius: float | None = None,
    x_period: int | None = None,
) -> Symbol:
    """``sigma(x, xi, eta) = a(x) b(xi) c(eta)``; ``a = None`` means ``a = 1``."""

    def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return b(xi) * c(eta)

    if a is None:
        return Symbol(
            lambda x, xi, eta: tau(xi, eta),
            dim,
            label=label,
            x_independent=True,
            freq_support_radius=freq_support_radius,
            freq_factor=tau,
            xi_factor=b,
            eta_factor=c,
        )
    return Symbol(
        lambda x, xi, eta: a(x) * tau(xi, eta),
        dim,
        label=label,
        freq_support_radius=freq_support_radius,
        x_support_radius=x_support_radius,
        x_period=x_period,
        x_factor=a,
        freq_factor=tau,
        xi_factor=b,
        eta_factor=c,
    )


def zero_symbol(dim: int) -> Symbol:
    def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.zeros(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))

    return x_independent_symbol(tau, dim, label="zero", freq_support_radius=1.0)


def lattice_symbol(
    values: np.ndarray, grid: GridSpec, *, label: str = "lattice"
) -> Symbol:
    """x-independent symbol sampled on ``grid``'s frequency lattice in both slots.

    ``values`` has shape ``grid.shape + grid.shape`` in FFT order; evaluation
    picks the nearest lattice point and is zero outside the frequency box.
    """
    table = np.asarray(values, dtype=complex)
    if table.shape != grid.shape * 2:
        raise PreconditionError(
            f"lattice values must have shape {grid.shape * 2}, got {table.shape}"
        )
    step = grid.frequency_step
    half = grid.points // 2
    nonzero = np.argwhere(np.abs(table) > 0)
    if nonzero.size:
        signed = np.where(nonzero >= half, nonzero - grid.points, nonzero) * step
        radius = float(np.max(np.linalg.norm(signed, axis=-1))) + step
    else:
        radius = step

    def indices(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k = np.rint(np.asarray(points, dtype=float) / step).astype(int)
        inside = np.all((k >= -half) & (k < half), axis=-1)
        return np.mod(k, grid.points), inside

    def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        kx, in_x = indices(xi)
        ky, in_y = indices(eta)
        kx, ky = np.broadcast_arrays(kx, ky)
        lookup = tuple(np.moveaxis(kx, -1, 0)) + tuple(np.moveaxis(ky, -1, 0))
        return np.where(in_x & in_y, table[lookup], 0.0)

    return x_independent_symbol(tau, grid.dim, label=label, freq_support_radius=radius)


def check_symbol(symbol: Symbol, samples: int = 64, seed: int = 0) -> None:
    """Spot-check the support radius and x-independence flags."""
    rng = np.random.default_rng(seed)
    n = symbol.dim
    x = rng.uniform(-4.0, 4.0, (samples, n))
    if symbol.freq_support_radius is not None:
        direction = rng.standard_normal((samples, 2 * n))
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        stretch = 1.0 + rng.uniform(0.01, 1.0, (samples, 1))
        radius = symbol.freq_support_radius * stretch
        outside = direction * radius
        values = symbol.evaluate(x, outside[:, :n], outside[:, n:])
        if np.max(np.abs(values)) > SUPPORT_TOLERANCE:
            raise UnsupportedSymbolError(
                f"symbol {symbol.label!r} does not vanish beyond radius "
                f"{symbol.freq_support_radius}"
            )
    if symbol.x_independent:
        xi = rng.uniform(-2.0, 2.0, (samples, n))
        eta = rng.uniform(-2.0, 2.0, (samples, n))
        first = symbol.evaluate(x, xi, eta)
        second = symbol.evaluate(rng.uniform(-4.0, 4.0, (samples, n)), xi, eta)
        if np.max(np.abs(first - second)) > SUPPORT_TOLERANCE * max(
            1.0, float(np.max(np.abs(first)))
        ):
            raise UnsupportedSymbolError(
                f"symbol {symbol.label!r} is flagged x-independent but varies in x"
            )
    LOGGER.debug("Symbol %s passed spot checks", symbol.label)
