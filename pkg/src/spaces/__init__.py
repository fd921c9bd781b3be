"""Discrete norms of sampled fields and the auxiliary smoothing operators."""

from __future__ import annotations

from spaces.hardy import bmo_norms, cube_sides, h1_norm, maximal_scales
from spaces.norms import (
    besov_blocks,
    besov_norm,
    covers_nyquist,
    lp_norm,
    sobolev_norm,
    ul2_array,
    ul2_blocks,
    ul2_norm,
    unit_cube_masses,
)
from spaces.operators import (
    BmoMultiplierRow,
    bmo_multiplier_bound,
    smoothing_S,
    smoothing_kernel,
    smoothing_tail_mass,
    square_function,
)
from spaces.report import NormReport, SpaceTag


def describe() -> str:
    return (
        "L^p, uniformly local L^2, Besov, Sobolev, h^1, bmo and BMO norms; "
        "the S operator and windowed square functions."
    )


spaces_describe = describe

__all__ = [
    "BmoMultiplierRow",
    "NormReport",
    "SpaceTag",
    "besov_blocks",
    "besov_norm",
    "bmo_multiplier_bound",
    "bmo_norms",
    "covers_nyquist",
    "cube_sides",
    "describe",
    "h1_norm",
    "lp_norm",
    "maximal_scales",
    "smoothing_S",
    "smoothing_kernel",
    "smoothing_tail_mass",
    "sobolev_norm",
    "spaces_describe",
    "square_function",
    "ul2_array",
    "ul2_blocks",
    "ul2_norm",
    "unit_cube_masses",
]
