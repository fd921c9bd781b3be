"""Fourier transforms, multipliers and convolution on a periodic grid.

Convention: ``F f(xi) = int e^{-i x.xi} f(x) dx`` and the inverse carries
``(2 pi)^{-n}``.  The forward transform is the DFT scaled by ``dx^n`` with the
origin sample moved to index 0, so the discrete pair is an exact inverse and
Parseval holds in the form ``sum |f|^2 dx^n = T^{-n} sum |F f|^2``.
"""

from __future__ import annotations

import logging
from typing import Callable, Sequence, Union

import numpy as np
from scipy import fft as sp_fft

from fields.grid import Field, GridSpec, Space
from utils.errors import GridMismatchError
from utils.threads import worker_count

LOGGER = logging.getLogger("bilinpdo.fields")

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def forward_array(values: np.ndarray, axes: Sequence[int], cell: float) -> np.ndarray:
    """Scaled DFT of ascending-ordered samples along ``axes``."""
    shifted = sp_fft.ifftshift(values, axes=axes)
    return cell * sp_fft.fftn(shifted, axes=axes, workers=worker_count())


def inverse_array(values: np.ndarray, axes: Sequence[int], cell: float) -> np.ndarray:
    """Inverse of :func:`forward_array`."""
    spatial = sp_fft.ifftn(values, axes=axes, workers=worker_count())
    return sp_fft.fftshift(spatial, axes=axes) / cell


def dft(f: Field) -> Field:
    """Quadrature approximation of the Fourier transform on the frequency lattice."""
    f.require(Space.PHYSICAL)
    axes = tuple(range(f.grid.dim))
    spectrum = forward_array(f.samples, axes, f.grid.cell)
    return Field(f.grid, spectrum, Space.FREQUENCY, f.meta)


def idft(spectrum: Field) -> Field:
    spectrum.require(Space.FREQUENCY)
    axes = tuple(range(spectrum.grid.dim))
    samples = inverse_array(spectrum.samples, axes, spectrum.grid.cell)
    return Field(spectrum.grid, samples, Space.PHYSICAL, spectrum.meta)


def multiplier_values(m: Multiplier, grid: GridSpec) -> np.ndarray:
    """Evaluate ``m`` on the frequency lattice (FFT order)."""
    if callable(m):
        values = np.asarray(m(grid.frequencies()))
    else:
        values = np.asarray(m)
    if values.shape != grid.shape:
        raise GridMismatchError(
            f"multiplier shape {values.shape} does not match grid shape {grid.shape}"
        )
    return values


def multiplier_apply(m: Multiplier, f: Field) -> Field:
    """``m(D) f = F^{-1}[m F f]``."""
    f.require(Space.PHYSICAL)
    spectrum = dft(f)
    weighted = spectrum.with_samples(spectrum.samples * multiplier_values(m, f.grid))
    return idft(weighted)


def convolve(f: Field, g: Field) -> Field:
    """Periodic convolution approximating ``int f(x - y) g(y) dy``."""
    f.check_compatible(g)
    f.require(Space.PHYSICAL)
    product = dft(f).samples * dft(g).samples
    return idft(Field(f.grid, product, Space.FREQUENCY))


def spectrum_leakage(f: Field, support: Callable[[np.ndarray], np.ndarray]) -> float:
    """Largest spectral modulus outside ``support`` relative to the peak."""
    spectrum = np.abs(dft(f).samples)
    peak = float(spectrum.max())
    if peak == 0.0:
        return 0.0
    outside = ~np.asarray(support(f.grid.frequencies()), dtype=bool)
    if not outside.any():
        return 0.0
    return float(spectrum[outside].max()) / peak
