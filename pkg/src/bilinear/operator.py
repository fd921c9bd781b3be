"""Evaluation of ``T_sigma(f, g)`` and the dual form ``int T_sigma(f, g) h``.

On a grid with extent ``T`` the double frequency integral becomes the
lattice sum

    T_sigma(f, g)(x) = T^{-2n} sum_{xi, eta} e^{i x.(xi + eta)}
                       sigma(x, xi, eta) fhat(xi) ghat(eta)

over the frequency lattice.  At grid points ``xi + eta`` may be reduced modulo
the lattice period, so x-independent symbols go through a frequency
convolution and a single inverse transform.  x-dependent symbols without a
separable structure are summed directly per output point.
"""

from __future__ import annotations

import logging

import numpy as np

from fields import Field, GridSpec, Space, forward_array, inverse_array
from symbols import Symbol
from utils.errors import GridMismatchError, PreconditionError
from utils.summation import stable_sum

LOGGER = logging.getLogger("bilinpdo.bilinear")

DIRECT_CHUNK = 1 << 22


def check_band_limit(symbol: Symbol, grid: GridSpec, truncate: bool) -> bool:
    """True when the lattice truncates sigma's frequency support."""
    radius = symbol.freq_support_radius
    if radius is not None and radius <= grid.nyquist:
        return False
    if not truncate:
        reach = "unbounded" if radius is None else f"radius {radius:.4g}"
        raise PreconditionError(
            f"symbol {symbol.label!r} ({reach}) exceeds the Nyquist box "
            f"{grid.nyquist:.4g}; pass truncate=True to accept truncation"
        )
    LOGGER.warning(
        "Truncating symbol %s to the Nyquist box %.4g", symbol.label, grid.nyquist
    )
    return True


def _check_inputs(*fields: Field) -> GridSpec:
    first = fields[0]
    for other in fields:
        other.require(Space.PHYSICAL)
        first.check_compatible(other)
    return first.grid


def spectra(f: Field) -> np.ndarray:
    return forward_array(f.samples, tuple(range(f.grid.dim)), f.grid.cell)


def lattice_points(grid: GridSpec) -> np.ndarray:
    """Frequency lattice flattened to ``(N^n, n)`` in FFT order."""
    return grid.frequencies().reshape(-1, grid.dim)


def _flat_index_sum(
    grid: GridSpec, first: np.ndarray, second: np.ndarray
) -> np.ndarray:
    """Flat FFT-order index of ``xi + eta`` reduced modulo the lattice."""
    shape = grid.shape
    a = np.stack(np.unravel_index(first, shape), axis=-1)
    b = np.stack(np.unravel_index(second, shape), axis=-1)
    total = (a[:, None, :] + b[None, :, :]) % grid.points
    return np.ravel_multi_index(tuple(np.moveaxis(total, -1, 0)), shape)


def convolve_spectra(
    tau_values: np.ndarray,
    fhat: np.ndarray,
    ghat: np.ndarray,
    grid: GridSpec,
    f_index: np.ndarray,
    g_index: np.ndarray,
) -> np.ndarray:
    """``S(zeta) = sum_{xi + eta = zeta} tau fhat ghat`` on the lattice.

    ``tau_values`` has shape ``(len(f_index), len(g_index))``; the indices
    select the lattice points (flat, FFT order) that carry the spectra.
    """
    rows = fhat.ravel()[f_index][:, None]
    cols = ghat.ravel()[g_index][None, :]
    weights = tau_values * rows * cols
    target = _flat_index_sum(grid, f_index, g_index).ravel()
    flat = weights.ravel()
    size = grid.size
    out = np.bincount(target, flat.real, minlength=size) + 1j * np.bincount(
        target, flat.imag, minlength=size
    )
    return out.reshape(grid.shape)


def _support(hat: np.ndarray) -> np.ndarray:
    return np.flatnonzero(hat.ravel())


def apply_x_independent(
    tau, grid: GridSpec, fhat: np.ndarray, ghat: np.ndarray
) -> np.ndarray:
    """Samples of ``T_tau(f, g)`` for a function ``tau(xi, eta)``."""
    f_index = _support(fhat)
    g_index = _support(ghat)
    if f_index.size == 0 or g_index.size == 0:
        return np.zeros(grid.shape, dtype=complex)
    lattice = lattice_points(grid)
    xi = lattice[f_index][:, None, :]
    eta = lattice[g_index][None, :, :]
    values = np.broadcast_to(
        np.asarray(tau(xi, eta)), (f_index.size, g_index.size)
    )
    spectrum = convolve_spectra(values, fhat, ghat, grid, f_index, g_index)
    axes = tuple(range(grid.dim))
    return inverse_array(spectrum / grid.extent**grid.dim, axes, grid.cell)


def _apply_separable(symbol: Symbol, grid: GridSpec, fhat, ghat) -> np.ndarray:
    axes = tuple(range(grid.dim))
    freqs = grid.frequencies()
    left = inverse_array(np.asarray(symbol.xi_factor(freqs)) * fhat, axes, grid.cell)
    right = inverse_array(np.asarray(symbol.eta_factor(freqs)) * ghat, axes, grid.cell)
    return left * right


def _apply_direct(symbol: Symbol, grid: GridSpec, fhat, ghat) -> np.ndarray:
    f_index = _support(fhat)
    g_index = _support(ghat)
    lattice = lattice_points(grid)
    xi = lattice[f_index]
    eta = lattice[g_index]
    x = grid.coordinates().reshape(-1, grid.dim)
    out = np.zeros(x.shape[0], dtype=complex)
    pairs = max(f_index.size * g_index.size, 1)
    chunk = max(1, DIRECT_CHUNK // pairs)
    f_vals = fhat.ravel()[f_index]
    g_vals = ghat.ravel()[g_index]
    for start in range(0, x.shape[0], chunk):
        points = x[start : start + chunk]
        left = np.exp(1j * points @ xi.T) * f_vals
        right = np.exp(1j * points @ eta.T) * g_vals
        sigma = symbol.evaluate(
            points[:, None, None, :], xi[None, :, None, :], eta[None, None, :, :]
        )
        sigma = np.broadcast_to(sigma, (points.shape[0], xi.shape[0], eta.shape[0]))
        out[start : start + chunk] = np.einsum("ma,mab,mb->m", left, sigma, right)
    return (out / grid.extent ** (2 * grid.dim)).reshape(grid.shape)


def apply(symbol: Symbol, f: Field, g: Field, *, truncate: bool = False) -> Field:
    """Sample ``T_sigma(f, g)`` on the common grid of ``f`` and ``g``."""
    grid = _check_inputs(f, g)
    if symbol.dim != grid.dim:
        raise GridMismatchError(
            f"symbol dim {symbol.dim} does not match grid dim {grid.dim}"
        )
    truncated = check_band_limit(symbol, grid, truncate)
    fhat = spectra(f)
    ghat = spectra(g)
    if symbol.fully_separable:
        route = "separable"
        values = _apply_separable(symbol, grid, fhat, ghat)
    elif symbol.x_separable:
        route = "convolution"
        values = apply_x_independent(symbol.frequency_part, grid, fhat, ghat)
    else:
        route = "direct"
        values = _apply_direct(symbol, grid, fhat, ghat)
    if route != "direct" and not symbol.x_independent:
        values = values * symbol.spatial_part(grid.coordinates())
    LOGGER.debug("Applied %s via %s route on %s", symbol.label, route, grid.describe())
    return Field(grid, values, meta={"route": route, "truncated": truncated})


def dual_pairing(
    symbol: Symbol, f: Field, g: Field, h: Field, *, truncate: bool = False
) -> complex:
    """``int T_sigma(f, g)(x) h(x) dx`` as a Riemann sum."""
    grid = _check_inputs(f, g, h)
    values = apply(symbol, f, g, truncate=truncate).samples
    return stable_sum(values * h.samples) * grid.cell


def direct_oracle(symbol: Symbol, f: Field, g: Field) -> Field:
    """Scalar triple loop over ``(x, xi, eta)``; only for tiny grids."""
    grid = _check_inputs(f, g)
    fhat = spectra(f).ravel()
    ghat = spectra(g).ravel()
    lattice = lattice_points(grid)
    x = grid.coordinates().reshape(-1, grid.dim)
    out = np.zeros(x.shape[0], dtype=complex)
    scale = grid.extent ** (2 * grid.dim)
    for m, point in enumerate(x):
        total = 0j
        for a, xi in enumerate(lattice):
            for b, eta in enumerate(lattice):
                value = complex(np.asarray(symbol.evaluate(point, xi, eta)))
                total += (
                    np.exp(1j * float(point @ (xi + eta))) * value * fhat[a] * ghat[b]
                )
        out[m] = total / scale
    return Field(grid, out.reshape(grid.shape))


def frequency_leakage(f: Field, inside) -> float:
    """Largest spectral modulus outside ``inside(freqs)`` relative to the peak."""
    hat = np.abs(spectra(f))
    peak = float(hat.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    outside = ~np.asarray(inside(f.grid.frequencies()), dtype=bool)
    return float(hat[outside].max(initial=0.0)) / peak
