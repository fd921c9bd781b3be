"""The epsilon-concentrated family showing the ``s_1 = n/2`` threshold.

Both inputs concentrate their spectrum at scale ``eps``, ``f`` near the origin
and ``g`` near the unit vector ``e_1``.  The symbol is the fully separable
``u(xi / eps) v(eta)`` with ``v`` an annular bump equal to 1 around ``|eta| = 1``,
so ``v(D) g = g`` and ``T(f, g) = u(D / eps) f * g`` exactly.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from bilinear import apply
from fields import (
    Field,
    GridSpec,
    forward_array,
    inverse_array,
    next_power_of_two,
)
from partitions import AnnularBump, PartitionFamily, RadialCutoff, delta_preset
from sharpness.sweep import Family, SharpnessSweep, SweepRow, run_sweep
from spaces import lp_norm
from symbols import (
    DEFAULT_K_MAX,
    Symbol,
    TruncationParams,
    bs_norm,
    separable_symbol,
    x_independent_symbol,
)
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.sharpness")

U_HAT = RadialCutoff(0.2, 0.4)
V_HAT = AnnularBump(0.9, 0.95, 1.05, 1.1)
# half-width of the band around |eta| = 1 where v = 1
V_PLATEAU = min(1.0 - V_HAT.r1, V_HAT.r2 - 1.0)
# eps * supp(u) must fit in the plateau: eps <= 1/8
PLATEAU_EPS = V_PLATEAU / U_HAT.outer
NYQUIST_FLOOR = 1.2
RESOLUTION = 16
FACTOR_EXTENT = 4
FACTOR_POINTS_PER_EPS = 32
V_FACTOR_POINTS = 512


@dataclass(frozen=True)
class EpsFamily:
    eps: float
    dim: int
    p: float
    q: float
    grid: GridSpec
    f: Field
    g: Field
    symbol: Symbol


def _check_eps(eps: float) -> None:
    if not 0 < eps <= PLATEAU_EPS:
        raise PreconditionError(
            f"eps must lie in (0, {PLATEAU_EPS:g}] so that v(D) g = g, got: {eps}"
        )


def family_grid(eps: float, dim: int = 1, resolution: int = RESOLUTION) -> GridSpec:
    """Box resolving the ``eps`` spectral scale, ``resolution`` points per ``eps``."""
    extent = next_power_of_two(2.0 * math.pi * resolution / eps)
    points = next_power_of_two(NYQUIST_FLOOR * extent / math.pi)
    return GridSpec(dim, extent, points)


def _unit(dim: int) -> np.ndarray:
    e1 = np.zeros(dim)
    e1[0] = 1.0
    return e1


def build_family(
    eps: float,
    p: float = 2.0,
    q: float = 2.0,
    dim: int = 1,
    resolution: int = RESOLUTION,
) -> EpsFamily:
    _check_eps(eps)
    grid = family_grid(eps, dim, resolution)
    freqs = grid.frequencies()
    axes = tuple(range(dim))
    fhat = eps ** (dim / p - dim) * U_HAT(freqs / eps)
    ghat = eps ** (dim / q - dim) * U_HAT((freqs - _unit(dim)) / eps)
    f = Field(grid, inverse_array(fhat, axes, grid.cell), meta={"eps": eps})
    g = Field(grid, inverse_array(ghat, axes, grid.cell), meta={"eps": eps})
    return EpsFamily(eps, dim, p, q, grid, f, g, eps_symbol(eps, dim))


def eps_symbol(eps: float, dim: int = 1) -> Symbol:
    """``u(xi / eps) v(eta)``."""
    _check_eps(eps)

    def b(xi: np.ndarray) -> np.ndarray:
        return U_HAT(np.asarray(xi) / eps)

    return separable_symbol(
        None,
        b,
        V_HAT,
        dim,
        label=f"eps-family({eps:g})",
        freq_support_radius=math.hypot(eps * U_HAT.outer, V_HAT.r3),
    )


def xi_grid(eps: float, dim: int = 1) -> GridSpec:
    """Frequency box resolving ``u(xi / eps)``."""
    points = next_power_of_two(FACTOR_EXTENT * FACTOR_POINTS_PER_EPS / eps)
    return GridSpec(dim, FACTOR_EXTENT, points)


def eta_grid(dim: int = 1) -> GridSpec:
    return GridSpec(dim, FACTOR_EXTENT, V_FACTOR_POINTS)


@functools.lru_cache(maxsize=4)
def narrow_partition(dim: int) -> PartitionFamily:
    return delta_preset(2 * dim, DEFAULT_K_MAX)


def symbol_norm(eps: float, s1: float, s2: float, dim: int = 1) -> float:
    """``bs_norm`` of ``u(xi / eps) v(eta)`` with ``m = 0`` and ``rho = 0``.

    The narrow-ramp partition keeps the whole symbol in its ``j = 0`` piece.
    """
    truncation = TruncationParams(xi_grid=xi_grid(eps, dim), eta_grid=eta_grid(dim))
    report = bs_norm(
        eps_symbol(eps, dim),
        0.0,
        0.0,
        (0.0, s1, s2),
        truncation=truncation,
        lp2n=narrow_partition(dim),
    )
    return report.value


def family_s12(
    eps: float,
    p: float = 2.0,
    q: float = 2.0,
    r: float = 1.0,
    s1: float = 0.5,
    s2: float = 0.5,
    dim: int = 1,
    resolution: int = RESOLUTION,
) -> SweepRow:
    """``||T(f, g)||_{L^r}`` against ``||sigma|| ||f||_p ||g||_q`` at one ``eps``."""
    family = build_family(eps, p, q, dim, resolution)
    output = apply(family.symbol, family.f, family.g)
    lhs = lp_norm(output, r).value
    f_size = lp_norm(family.f, p).value
    g_size = lp_norm(family.g, q).value
    sigma = symbol_norm(eps, s1, s2, dim)
    LOGGER.debug(
        "eps=%g: ||T||=%.4e ||f||=%.4e ||g||=%.4e ||sigma||=%.4e",
        eps,
        lhs,
        f_size,
        g_size,
        sigma,
    )
    return SweepRow(
        Family.EPS_S12,
        {"eps": eps, "s1": s1, "s2": s2, "p": p, "q": q, "r": r, "dim": dim},
        lhs,
        sigma * f_size * g_size,
        {"f_norm": f_size, "g_norm": g_size, "symbol_norm": sigma},
    )


def expected_slope(s1: float, dim: int) -> float:
    """Slope of ``log2 ratio`` against ``log2 eps``."""
    return s1 - dim / 2.0


def eps_sweep(
    eps_values: Iterable[float],
    *,
    p: float = 2.0,
    q: float = 2.0,
    r: float = 1.0,
    s1: float = 0.5,
    s2: float = 0.5,
    dim: int = 1,
) -> SharpnessSweep:
    points = [
        {"eps": eps, "p": p, "q": q, "r": r, "s1": s1, "s2": s2, "dim": dim}
        for eps in eps_values
    ]
    return run_sweep(Family.EPS_S12, "eps", points, family_s12)


def dyadic_eps(levels: Sequence[int]) -> list[float]:
    return [2.0 ** (-level) for level in levels]


def closed_form_error(
    eps: float, p: float = 2.0, q: float = 2.0, dim: int = 1
) -> float:
    """Relative sup error of ``T(f, g)`` against ``u(D / eps) f * g``.

    The symbol is handed to the operator without its separable factors so the
    frequency-convolution route is the one being checked.
    """
    family = build_family(eps, p, q, dim)
    tau = family.symbol.frequency_part
    generic = x_independent_symbol(
        tau,
        dim,
        label="eps-family-joint",
        freq_support_radius=family.symbol.freq_support_radius,
    )
    output = apply(generic, family.f, family.g).samples
    grid = family.grid
    axes = tuple(range(dim))
    fhat = forward_array(family.f.samples, axes, grid.cell)
    cutoff = U_HAT(grid.frequencies() / eps)
    filtered = inverse_array(cutoff * fhat, axes, grid.cell)
    expected = filtered * family.g.samples
    scale = float(np.max(np.abs(expected)))
    error = float(np.max(np.abs(output - expected))) / scale
    LOGGER.info("Closed-form check at eps=%g: relative error %.3e", eps, error)
    return error
