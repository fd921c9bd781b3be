"""Symbols, their dyadic localisation and the symbol-class norms."""

from __future__ import annotations

from symbols.dagger import (
    DaggerCheck,
    dagger_seminorm,
    dilation_check,
    product_check,
    sample_joint,
)
from symbols.decay import DecayReport, hormander_decay_check
from symbols.localize import (
    BlockGrid,
    BlockNorm,
    LocalizedSymbol,
    LocalizedSymbolBlock,
    SampledFactor,
    dual_grid,
    fit_block_grid,
    localize,
    shell_is_flat,
    shell_radius,
    triple_block,
)
from symbols.norms import (
    DEFAULT_K_MAX,
    TruncationParams,
    Variant,
    block_norm_rows,
    bs_norm,
    default_families,
    export_blocks_csv,
    j_bounds,
    sweep_shells,
)
from symbols.symbol import (
    Symbol,
    check_symbol,
    lattice_symbol,
    separable_symbol,
    symbol_from_callable,
    x_independent_symbol,
    x_separable_symbol,
    zero_symbol,
)


def describe() -> str:
    return (
        "Symbols sigma(x, xi, eta), dyadic localisation sigma_j and the plain, "
        "star and dagger block norms."
    )


symbols_describe = describe

__all__ = [
    "DEFAULT_K_MAX",
    "BlockGrid",
    "BlockNorm",
    "DaggerCheck",
    "DecayReport",
    "LocalizedSymbol",
    "LocalizedSymbolBlock",
    "SampledFactor",
    "Symbol",
    "TruncationParams",
    "Variant",
    "block_norm_rows",
    "bs_norm",
    "check_symbol",
    "dagger_seminorm",
    "default_families",
    "describe",
    "dilation_check",
    "dual_grid",
    "export_blocks_csv",
    "fit_block_grid",
    "hormander_decay_check",
    "j_bounds",
    "lattice_symbol",
    "localize",
    "product_check",
    "sample_joint",
    "separable_symbol",
    "shell_is_flat",
    "shell_radius",
    "sweep_shells",
    "symbol_from_callable",
    "symbols_describe",
    "triple_block",
    "x_independent_symbol",
    "x_separable_symbol",
    "zero_symbol",
]
