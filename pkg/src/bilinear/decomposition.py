"""Dual-form decomposition ``int T_sigma(f, g) h = I0 + I1 + I2 + I3``.

Every shell ``sigma_j = sigma Psi_j`` is routed by frequency regime: shells
below ``j_low`` pair ``phi_j(D) f`` with ``phi_j(D) g`` (``I0``); higher shells
use the three-way split of ``Psi_j`` (``I1``: low/high, ``I2``: high/low,
``I3``: high/high).  Each routed pairing is rescaled by ``lambda_j = 2^{e_j}``,
``e_j = round(j rho)``, and expanded over the triple blocks ``Delta_k`` of the
rescaled symbol and the unit-cube pieces ``kappa chi(. - nu)`` of both inputs.

All sums are taken on the grid's frequency lattice, where the rescaling is an
exact relabelling of samples, so the ledger total reproduces the direct pairing
up to rounding.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
from scipy import fft as sp_fft

from bilinear.operator import (
    _flat_index_sum,
    check_band_limit,
    dual_pairing,
    lattice_points,
    spectra,
)
from fields import Field, GridSpec, forward_array, inverse_array
from partitions import (
    ShellSplit,
    PartitionFamily,
    UniformPair,
    make_shell_split,
    make_lp,
    make_uniform_pair,
)
from symbols import Symbol
from symbols.localize import shell_is_empty
from utils.errors import PreconditionError, UnsupportedSymbolError
from utils.summation import stable_sum
from utils.threads import parallel_map, worker_count

LOGGER = logging.getLogger("bilinpdo.bilinear")

DEFAULT_LOW_SHELLS = 8
SHELL_LEAKAGE_TOLERANCE = 1e-8

RadialMultiplier = Callable[[np.ndarray], np.ndarray]


class Route(str, Enum):
    I0 = "I0"
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"


@dataclass(frozen=True)
class DecompositionParams:
    """``j_low``: first shell sent through the three-way split."""

    j_low: int = DEFAULT_LOW_SHELLS
    audit_tol: float = 1e-12
    truncate: bool = False

    def __post_init__(self) -> None:
        if self.j_low < 1:
            raise PreconditionError(f"j_low must be >= 1, got: {self.j_low}")


@dataclass(frozen=True)
class BlockTable:
    """Block values of one ``(route, j, k)`` over the nonzero ``nu`` lattice rows."""

    route: Route
    j: int
    k: tuple[int, int, int]
    nu1: np.ndarray
    nu2: np.ndarray
    values: np.ndarray

    def total(self) -> complex:
        return stable_sum(self.values)


@dataclass(frozen=True)
class AuditRow:
    route: Route
    j: int
    check: str
    bound: float
    observed: float
    passed: bool


@dataclass
class DualFormLedger:
    direct_value: complex
    parts: dict[Route, complex]
    tables: list[BlockTable]
    scales: dict[int, int]
    params: DecompositionParams
    supports: dict[tuple[Route, int], tuple[float, float]] = field(default_factory=dict)
    shell_leakage: dict[tuple[Route, int], float] = field(default_factory=dict)
    truncated: bool = False

    def total(self) -> complex:
        return stable_sum([self.parts[route] for route in Route])

    def relative_error(self) -> float:
        gap = abs(self.total() - self.direct_value)
        scale = abs(self.direct_value)
        return gap / scale if scale > 0 else gap

    def block_sums(self) -> dict[Route, complex]:
        return {
            route: stable_sum([t.total() for t in self.tables if t.route is route])
            for route in Route
        }

    def bookkeeping_error(self) -> float:
        """Largest relative gap between a part and the sum of its blocks."""
        sums = self.block_sums()
        scale = max(max(abs(v) for v in self.parts.values()), abs(self.direct_value))
        if scale == 0.0:
            return 0.0
        return max(abs(self.parts[r] - sums[r]) for r in Route) / scale

    def by_j(self) -> dict[int, complex]:
        out: dict[int, list[complex]] = {}
        for table in self.tables:
            out.setdefault(table.j, []).append(table.total())
        return {j: stable_sum(values) for j, values in sorted(out.items())}

    def iter_blocks(self) -> Iterator[tuple[tuple, complex]]:
        """Nonzero blocks keyed by ``(tag, j, k, nu1, nu2)``."""
        for table in self.tables:
            rows, cols = np.nonzero(table.values)
            for a, b in zip(rows, cols):
                key = (
                    table.route.value,
                    table.j,
                    table.k,
                    tuple(int(v) for v in table.nu1[a]),
                    tuple(int(v) for v in table.nu2[b]),
                )
                yield key, complex(table.values[a, b])

    def block_values(self) -> dict:
        return dict(self.iter_blocks())

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["tag", "j", "k0", "k1", "k2", "nu1", "nu2", "re", "im"])
            for (tag, j, k, nu1, nu2), value in self.iter_blocks():
                writer.writerow(
                    [
                        tag,
                        j,
                        *k,
                        ";".join(map(str, nu1)),
                        ";".join(map(str, nu2)),
                        f"{value.real:.17g}",
                        f"{value.imag:.17g}",
                    ]
                )
                count += 1
        LOGGER.info("Wrote %d ledger blocks to %s", count, path)
        return path

    def audit_supports(self) -> list[AuditRow]:
        """Check the nu rows against the routed input supports and the output shells."""
        rows: list[AuditRow] = []
        peak = max(
            (float(np.abs(t.values).max(initial=0.0)) for t in self.tables),
            default=0.0,
        )
        floor = self.params.audit_tol * peak
        for table in self.tables:
            bound1, bound2 = self.supports[(table.route, table.j)]
            live = np.abs(table.values) > floor
            if not np.any(live):
                continue
            used1 = table.nu1[np.any(live, axis=1)]
            used2 = table.nu2[np.any(live, axis=0)]
            for check, used, bound in (("nu1", used1, bound1), ("nu2", used2, bound2)):
                observed = float(np.max(np.linalg.norm(used, axis=-1)))
                passed = observed <= bound
                rows.append(
                    AuditRow(table.route, table.j, check, bound, observed, passed)
                )
        for (route, j), leak in sorted(self.shell_leakage.items()):
            rows.append(
                AuditRow(
                    route,
                    j,
                    "output_shell",
                    SHELL_LEAKAGE_TOLERANCE,
                    leak,
                    leak <= SHELL_LEAKAGE_TOLERANCE,
                )
            )
        return rows


def shell_scale(j: int, rho: float) -> int:
    """Dyadic exponent ``e_j`` used in place of ``j rho``."""
    return int(math.floor(j * rho + 0.5))


def route_multipliers(
    route: Route, j: int, lp: PartitionFamily, split: ShellSplit
) -> tuple[RadialMultiplier, RadialMultiplier, float, float]:
    """Radial input multipliers for ``route`` and the radii of their supports."""
    if route is Route.I0:
        reach = lp.outer * 2.0 ** (j + 1)
        low = partial(lp.cutoff_radial, j + 1)
        return low, low, reach, reach
    radii = split.support_radii()
    phi_reach = radii["phi_prime"][1] * 2.0**j
    psi_reach = radii["psi_prime"][1] * 2.0**j
    phi = partial(split.phi_prime_radial, j=j)
    psi = partial(split.psi_prime_radial, j=j)
    if route is Route.I1:
        return phi, psi, phi_reach, psi_reach
    if route is Route.I2:
        return psi, phi, psi_reach, phi_reach
    reach = radii["psi_dprime"][1] * 2.0**j
    dpsi = partial(split.psi_dprime_radial, j=j)
    return dpsi, dpsi, reach, reach


def _nu_rows(
    pair: UniformPair, lattice: np.ndarray, hat: np.ndarray, index: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Integer centres ``nu`` and rows ``kappa chi(xi - nu) hat(xi)`` on ``index``."""
    points = lattice[index]
    values = hat.ravel()[index]
    lo = np.floor(points.min(axis=0)).astype(int) - 1
    hi = np.ceil(points.max(axis=0)).astype(int) + 1
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    centres = []
    rows = []
    for nu in itertools.product(*ranges):
        row = pair.piece(points, nu) * values
        if np.any(row):
            centres.append(nu)
            rows.append(row)
    dim = lattice.shape[-1]
    if not rows:
        return np.zeros((0, dim), dtype=int), np.zeros((0, index.size), dtype=complex)
    return np.asarray(centres, dtype=int), np.asarray(rows)


def _dual_radius(grid: GridSpec) -> np.ndarray:
    """Radius of the variables dual to the frequency lattice, FFT order."""
    axis = np.fft.fftfreq(grid.points) * grid.extent
    mesh = np.meshgrid(*([axis] * grid.dim), indexing="ij")
    return np.sqrt(sum(m**2 for m in mesh))


def _negated(hat: np.ndarray) -> np.ndarray:
    """``u(-zeta)`` for an FFT-ordered lattice array."""
    axes = tuple(range(hat.ndim))
    return np.roll(np.flip(hat, axis=axes), 1, axis=axes)


@dataclass(frozen=True)
class _RoutedShell:
    """Everything one ``(route, j)`` pair needs to fill its block tables."""

    route: Route
    j: int
    grid: GridSpec
    x_blocks: dict[int, np.ndarray]
    f_index: np.ndarray
    g_index: np.ndarray
    sum_index: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    rows_f: np.ndarray
    rows_g: np.ndarray
    prefactor: float


def _x_blocks(
    symbol: Symbol, grid: GridSpec, lam: float, h: np.ndarray, lp: PartitionFamily
) -> dict[int, np.ndarray]:
    """``(psi_{k0}(D) a_j) h_j`` transformed and negated, per ``k0``."""
    axes = tuple(range(grid.dim))
    if symbol.x_independent:
        return {0: _negated(forward_array(h, axes, grid.cell))}
    a = symbol.spatial_part(grid.coordinates() / lam)
    spectrum = forward_array(a, axes, 1.0)
    radius = grid.frequency_radius()
    cap = lp.covering_level(grid.nyquist * math.sqrt(grid.dim))
    out = {}
    for k0 in range(cap + 1):
        block = inverse_array(spectrum * lp.piece_radial(k0, radius), axes, 1.0)
        out[k0] = _negated(forward_array(block * h, axes, grid.cell))
    return out


class _TauBlocks:
    """Lazy ``psi_{k1}(D_xi) psi_{k2}(D_eta)`` blocks of lattice samples."""

    def __init__(self, values: np.ndarray, grid: GridSpec, lp: PartitionFamily) -> None:
        n = grid.dim
        self.grid = grid
        self.axes = tuple(range(2 * n))
        self.spectrum = sp_fft.fftn(values, axes=self.axes, workers=worker_count())
        radius = _dual_radius(grid)
        self.cap = lp.covering_level(0.5 * grid.extent * math.sqrt(n))
        self.pieces = [lp.piece_radial(k, radius) for k in range(self.cap + 1)]

    def keys(self) -> list[tuple[int, int]]:
        return list(itertools.product(range(self.cap + 1), repeat=2))

    def block(self, k1: int, k2: int) -> np.ndarray:
        n = self.grid.dim
        first = self.pieces[k1].reshape(self.grid.shape + (1,) * n)
        second = self.pieces[k2].reshape((1,) * n + self.grid.shape)
        return sp_fft.ifftn(
            self.spectrum * first * second, axes=self.axes, workers=worker_count()
        )


def _shell_tables(shell: _RoutedShell, tau: _TauBlocks) -> list[BlockTable]:
    size = shell.grid.size
    weights = {
        k0: block.ravel()[shell.sum_index]
        for k0, block in sorted(shell.x_blocks.items())
    }

    def evaluate(key: tuple[int, int]) -> list[BlockTable]:
        k1, k2 = key
        lattice_block = tau.block(k1, k2).reshape(size, size)
        values = lattice_block[np.ix_(shell.f_index, shell.g_index)]
        out = []
        for k0, weight in weights.items():
            block = shell.rows_f @ (values * weight) @ shell.rows_g.T
            out.append(
                BlockTable(
                    shell.route,
                    shell.j,
                    (k0, k1, k2),
                    shell.nu1,
                    shell.nu2,
                    shell.prefactor * block,
                )
            )
        return out

    return [table for group in parallel_map(evaluate, tau.keys()) for table in group]


def decompose(
    symbol: Symbol,
    f: Field,
    g: Field,
    h: Field,
    rho: float,
    params: DecompositionParams | None = None,
    *,
    lp2n: PartitionFamily | None = None,
    lp: PartitionFamily | None = None,
    split: ShellSplit | None = None,
    pair: UniformPair | None = None,
) -> DualFormLedger:
    """Ledger of every ``(route, j, k, nu)`` block of the dual form."""
    params = params or DecompositionParams()
    if not 0 <= rho < 1:
        raise PreconditionError(f"rho must lie in [0, 1), got: {rho}")
    if symbol.freq_support_radius is None:
        raise UnsupportedSymbolError(
            f"symbol {symbol.label!r} is not band-limited; decomposition needs a "
            "frequency support radius"
        )
    if not symbol.x_separable:
        raise UnsupportedSymbolError(
            f"symbol {symbol.label!r} must be x-independent or x-separable"
        )
    n = f.grid.dim
    lp2n = lp2n or make_lp(2 * n, 64)
    lp = lp or make_lp(n, 64)
    split = split or make_shell_split(lp2n)
    pair = pair or make_uniform_pair(n)
    if 2.0 * lp.inner < lp2n.outer:
        raise PreconditionError(
            "phi_j(D) must equal 1 on the shell: need 2 * inner(lp) >= outer(lp2n)"
        )
    truncated = check_band_limit(symbol, f.grid, params.truncate)
    direct = dual_pairing(symbol, f, g, h, truncate=params.truncate)

    fhat = spectra(f)
    ghat = spectra(g)
    radius_f = f.grid.frequency_radius()
    j_last = lp2n.covering_level(symbol.freq_support_radius)
    parts: dict[Route, list[complex]] = {route: [] for route in Route}
    tables: list[BlockTable] = []
    scales: dict[int, int] = {}
    supports: dict[tuple[Route, int], tuple[float, float]] = {}
    leakage: dict[tuple[Route, int], float] = {}

    for j in range(j_last + 1):
        if shell_is_empty(symbol, j, lp2n):
            continue
        exponent = shell_scale(j, rho)
        lam = 2.0**exponent
        scales[j] = exponent
        grid = f.grid.dilated(lam)
        lattice = lattice_points(grid)
        xi = grid.frequencies().reshape(grid.shape + (1,) * n + (n,))
        eta = grid.frequencies().reshape((1,) * n + grid.shape + (n,))
        joint = lam * np.sqrt(np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1))
        tau = np.broadcast_to(
            symbol.frequency_part(lam * xi, lam * eta), grid.shape * 2
        ) * lp2n.piece_radial(j, joint)
        if not np.any(tau):
            continue
        tau_blocks = _TauBlocks(tau, grid, lp)
        x_blocks = _x_blocks(symbol, grid, lam, h.samples, lp)
        x_full = _x_blocks_total(symbol, grid, lam, h.samples)
        routes = [Route.I0] if j < params.j_low else [Route.I1, Route.I2, Route.I3]
        for route in routes:
            m1, m2, reach1, reach2 = route_multipliers(route, j, lp, split)
            slack = math.sqrt(n)
            supports[(route, j)] = (reach1 / lam + slack, reach2 / lam + slack)
            big_f = lam**n * m1(radius_f) * fhat
            big_g = lam**n * m2(radius_f) * ghat
            f_index = np.flatnonzero(big_f.ravel())
            g_index = np.flatnonzero(big_g.ravel())
            if f_index.size == 0 or g_index.size == 0:
                parts[route].append(0j)
                continue
            sum_index = _flat_index_sum(grid, f_index, g_index)
            prefactor = lam ** (-n) * grid.extent ** (-2 * n)
            tau_sub = tau.reshape(grid.size, grid.size)[np.ix_(f_index, g_index)]
            whole = (
                big_f.ravel()[f_index]
                @ (tau_sub * x_full.ravel()[sum_index])
                @ big_g.ravel()[g_index]
            )
            parts[route].append(prefactor * whole)
            if route in (Route.I1, Route.I2) and symbol.x_independent:
                leakage[(route, j)] = _output_leakage(
                    tau_sub, big_f, big_g, grid, f_index, g_index, sum_index, j, lam
                )
            nu1, rows_f = _nu_rows(pair, lattice, big_f, f_index)
            nu2, rows_g = _nu_rows(pair, lattice, big_g, g_index)
            shell = _RoutedShell(
                route,
                j,
                grid,
                x_blocks,
                f_index,
                g_index,
                sum_index,
                nu1,
                nu2,
                rows_f,
                rows_g,
                prefactor,
            )
            tables.extend(_shell_tables(shell, tau_blocks))
            LOGGER.debug(
                "Shell j=%d route %s: %d x %d nu rows",
                j,
                route.value,
                len(nu1),
                len(nu2),
            )

    ledger = DualFormLedger(
        direct,
        {route: stable_sum(values) for route, values in parts.items()},
        tables,
        scales,
        params,
        supports,
        leakage,
        truncated,
    )
    LOGGER.info(
        "Decomposed %s (rho=%g, j_low=%d): %d block tables, relative error %.3e",
        symbol.label,
        rho,
        params.j_low,
        len(tables),
        ledger.relative_error(),
    )
    return ledger


def _x_blocks_total(
    symbol: Symbol, grid: GridSpec, lam: float, h: np.ndarray
) -> np.ndarray:
    axes = tuple(range(grid.dim))
    if symbol.x_independent:
        weight = h
    else:
        weight = symbol.spatial_part(grid.coordinates() / lam) * h
    return _negated(forward_array(weight, axes, grid.cell))


def _output_leakage(
    tau_sub: np.ndarray,
    big_f: np.ndarray,
    big_g: np.ndarray,
    grid: GridSpec,
    f_index: np.ndarray,
    g_index: np.ndarray,
    sum_index: np.ndarray,
    j: int,
    lam: float,
) -> float:
    """Peak output mass outside ``2^{j-6} <= lam |zeta| <= 2^{j+4}``, relative."""
    rows = big_f.ravel()[f_index][:, None]
    cols = big_g.ravel()[g_index][None, :]
    weights = tau_sub * rows * cols
    flat = weights.ravel()
    target = sum_index.ravel()
    spectrum = np.bincount(target, flat.real, minlength=grid.size) + 1j * np.bincount(
        target, flat.imag, minlength=grid.size
    )
    magnitude = np.abs(spectrum)
    peak = float(magnitude.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    radius = lam * grid.frequency_radius().ravel()
    outside = (radius < 2.0 ** (j - 6)) | (radius > 2.0 ** (j + 4))
    return float(magnitude[outside].max(initial=0.0)) / peak
