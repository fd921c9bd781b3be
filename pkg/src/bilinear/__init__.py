"""Bilinear operators ``T_sigma``, their dual-form decomposition and ratio probes."""

from __future__ import annotations

from bilinear.decomposition import (
    AuditRow,
    BlockTable,
    DecompositionParams,
    DualFormLedger,
    Route,
    decompose,
    route_multipliers,
    shell_scale,
)
from bilinear.operator import (
    apply,
    apply_x_independent,
    check_band_limit,
    convolve_spectra,
    direct_oracle,
    dual_pairing,
    frequency_leakage,
    lattice_points,
)
from bilinear.probe import (
    ProbeStats,
    probe_trend,
    random_band_limited,
    ratio_probe,
    shell_family,
    shell_indices,
    shell_norm,
)


def describe() -> str:
    return (
        "T_sigma(f, g) on the frequency lattice, the dual pairing with h, the "
        "I0..I3 block ledger and randomized L2 x L2 / L2 x bmo ratio probes."
    )


bilinear_describe = describe

__all__ = [
    "AuditRow",
    "BlockTable",
    "DecompositionParams",
    "DualFormLedger",
    "ProbeStats",
    "Route",
    "apply",
    "apply_x_independent",
    "bilinear_describe",
    "check_band_limit",
    "convolve_spectra",
    "decompose",
    "describe",
    "direct_oracle",
    "dual_pairing",
    "frequency_leakage",
    "lattice_points",
    "probe_trend",
    "random_band_limited",
    "ratio_probe",
    "route_multipliers",
    "shell_family",
    "shell_indices",
    "shell_norm",
    "shell_scale",
]
