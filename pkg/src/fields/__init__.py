"""Uniform periodic grids, sampled fields and their Fourier machinery."""

from __future__ import annotations

from fields.grid import Field, GridSpec, Space, is_power_of_two, next_power_of_two
from fields.transforms import (
    convolve,
    dft,
    forward_array,
    idft,
    inverse_array,
    multiplier_apply,
    multiplier_values,
    spectrum_leakage,
)


def describe() -> str:
    return (
        "Periodic box [-T/2, T/2)^n sampled with N points per axis; "
        "dft/idft, Fourier multipliers and convolution."
    )


fields_describe = describe

__all__ = [
    "Field",
    "GridSpec",
    "Space",
    "convolve",
    "describe",
    "dft",
    "fields_describe",
    "forward_array",
    "idft",
    "inverse_array",
    "is_power_of_two",
    "multiplier_apply",
    "multiplier_values",
    "next_power_of_two",
    "spectrum_leakage",
]
