"""Counterexample families probing the sharpness of the symbol-class indices."""

from __future__ import annotations

from sharpness.dilation import (
    dilate_symbol,
    dilation_row,
    dilation_transfer,
    relevant_shells,
    transfer_exponent,
    transfer_holds,
    transfer_slope,
)
from sharpness.families import (
    EpsFamily,
    build_family,
    closed_form_error,
    dyadic_eps,
    eps_sweep,
    expected_slope,
    family_grid,
    family_s12,
    symbol_norm,
)
from sharpness.s0 import (
    closed_form_s0,
    double_radial_sum,
    evaluate_bilinear,
    family_s0,
    input_spectrum,
    lattice_sum,
    lower_bound_sum,
    phi_lp_norm,
    s0_sweep,
    s0_symbol,
)
from sharpness.sweep import Family, SharpnessSweep, SweepRow, run_sweep
from sharpness.wainger import (
    default_cut,
    lattice_coefficients,
    trig_sum,
    wainger,
    wainger_row,
    wainger_sweep,
    wainger_threshold,
)


def describe() -> str:
    return (
        "Sharpness families: the eps-concentrated s1/s2 family, oscillatory "
        "lattice sums, the lattice-sum symbol forcing s0 >= m + n and the "
        "shell-dilation transfer between rho classes."
    )


sharpness_describe = describe

__all__ = [
    "EpsFamily",
    "Family",
    "SharpnessSweep",
    "SweepRow",
    "build_family",
    "closed_form_error",
    "closed_form_s0",
    "default_cut",
    "describe",
    "dilate_symbol",
    "dilation_row",
    "dilation_transfer",
    "double_radial_sum",
    "dyadic_eps",
    "eps_sweep",
    "evaluate_bilinear",
    "expected_slope",
    "family_grid",
    "family_s0",
    "family_s12",
    "input_spectrum",
    "lattice_coefficients",
    "lattice_sum",
    "lower_bound_sum",
    "phi_lp_norm",
    "relevant_shells",
    "run_sweep",
    "s0_sweep",
    "s0_symbol",
    "sharpness_describe",
    "symbol_norm",
    "transfer_exponent",
    "transfer_holds",
    "transfer_slope",
    "trig_sum",
    "wainger",
    "wainger_row",
    "wainger_sweep",
    "wainger_threshold",
]
