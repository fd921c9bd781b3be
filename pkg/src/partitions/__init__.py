"""Partitions of unity: dyadic families, the three-way shell split and unit cubes."""

from __future__ import annotations

from partitions.littlewood_paley import (
    DEFAULT_DELTA,
    PartitionFamily,
    delta_preset,
    export_csv,
    make_lp,
)
from partitions.moments import MomentReport, check_moments, moment_grid
from partitions.profiles import (
    AnnularBump,
    NormalizedBump,
    RadialCutoff,
    bump,
    scaled_argument,
    shifted,
    smooth_step,
)
from partitions.splits import ShellSplit, make_shell_split
from partitions.uniform import UniformPair, make_uniform_pair


def describe() -> str:
    return (
        "Littlewood-Paley families on R^n and R^2n, the low/high shell split "
        "and the unit-cube kappa/chi pair."
    )


partitions_describe = describe

__all__ = [
    "AnnularBump",
    "DEFAULT_DELTA",
    "MomentReport",
    "NormalizedBump",
    "PartitionFamily",
    "RadialCutoff",
    "ShellSplit",
    "UniformPair",
    "bump",
    "check_moments",
    "delta_preset",
    "describe",
    "export_csv",
    "make_lp",
    "make_shell_split",
    "make_uniform_pair",
    "moment_grid",
    "partitions_describe",
    "scaled_argument",
    "shifted",
    "smooth_step",
]
