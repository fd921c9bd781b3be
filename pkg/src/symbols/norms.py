"""Symbol-class norms: plain, star and dagger aggregations of block norms."""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, NamedTuple, Sequence

from fields import GridSpec
from partitions import PartitionFamily, make_lp
from spaces import NormReport, SpaceTag
from symbols.localize import BlockNorm, LocalizedSymbol, localize
from symbols.symbol import Symbol
from utils.errors import PreconditionError, UnsupportedSymbolError

LOGGER = logging.getLogger("bilinpdo.symbols")

DEFAULT_K_MAX = 64


class Variant(str, Enum):
    PLAIN = "plain"
    STAR = "star"
    DAGGER = "dagger"


@dataclass(frozen=True)
class TruncationParams:
    """Knobs for the j range, the k-shell sweep and the per-j sampling grids."""

    tol: float = 1e-9
    quiet_shells: int = 8
    dual_levels: int = 3
    j_max: int | None = None
    j_range: tuple[int, int] | None = None
    k_max: int | None = None
    frequency_grid: GridSpec | None = None
    xi_grid: GridSpec | None = None
    eta_grid: GridSpec | None = None

    def __post_init__(self) -> None:
        if self.quiet_shells < 1:
            raise PreconditionError(
                f"quiet_shells must be >= 1, got: {self.quiet_shells}"
            )
        if self.dual_levels < 0:
            raise PreconditionError(
                f"dual_levels must be >= 0, got: {self.dual_levels}"
            )
        if self.j_range is not None and not 0 <= self.j_range[0] <= self.j_range[1]:
            raise PreconditionError(f"invalid j_range: {self.j_range}")


class SweepResult(NamedTuple):
    value: float
    last_shell: int
    quiet_stop: bool


def default_families(dim: int) -> tuple[PartitionFamily, PartitionFamily]:
    """``(lp2n, lp)``: shell family on ``R^{2n}`` and block family on ``R^n``."""
    return make_lp(2 * dim, DEFAULT_K_MAX), make_lp(dim, DEFAULT_K_MAX)


def j_bounds(
    symbol: Symbol, rho: float, truncation: TruncationParams
) -> tuple[int, int]:
    if truncation.j_range is not None:
        return truncation.j_range
    if truncation.j_max is not None:
        return 0, truncation.j_max
    if symbol.freq_support_radius is None:
        raise UnsupportedSymbolError(
            f"symbol {symbol.label!r} has no frequency support radius; pass j_max"
        )
    j_max = math.ceil(math.log2(symbol.freq_support_radius) / (1.0 - rho)) + 2
    return 0, max(0, j_max)


def shell_indices(level: int, caps: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Index tuples with ``max(k) == level`` and ``k_i <= caps_i``."""
    ranges = [range(min(level, cap) + 1) for cap in caps]
    for k in itertools.product(*ranges):
        if max(k, default=0) == level:
            yield k


def sweep_shells(
    caps: Sequence[int],
    term: Callable[[tuple[int, ...]], float],
    truncation: TruncationParams,
    *,
    use_max: bool = False,
) -> SweepResult:
    """Sum (or maximise) ``term`` over shells ``max(k) = 0, 1, ...``.

    Stops once ``quiet_shells`` consecutive shells stay below ``tol`` times
    the largest shell seen, or when the caps are exhausted.
    """
    total = 0.0
    running = 0.0
    quiet = 0
    last = max(caps, default=0)
    if truncation.k_max is not None:
        last = min(last, truncation.k_max)
    for level in range(last + 1):
        values = [term(k) for k in shell_indices(level, caps)]
        shell = max(values, default=0.0) if use_max else math.fsum(values)
        total = max(total, shell) if use_max else total + shell
        running = max(running, shell)
        if shell <= truncation.tol * running:
            quiet += 1
            if quiet >= truncation.quiet_shells:
                return SweepResult(total, level, True)
        else:
            quiet = 0
    return SweepResult(total, last, False)


def _weight(j: int, k: Sequence[int], m: float, s: Sequence[float]) -> float:
    return 2.0 ** (-j * m + sum(ki * si for ki, si in zip(k, s)))


def _check_s(s: Sequence[float]) -> tuple[float, float, float]:
    if len(s) != 3:
        raise PreconditionError(f"s must be a triple, got: {s}")
    return float(s[0]), float(s[1]), float(s[2])


def localized_family(
    symbol: Symbol,
    rho: float,
    truncation: TruncationParams,
    lp2n: PartitionFamily,
) -> dict[int, LocalizedSymbol]:
    lo, hi = j_bounds(symbol, rho, truncation)
    return {
        j: localize(
            symbol,
            j,
            rho,
            lp2n,
            truncation.frequency_grid,
            dual_levels=truncation.dual_levels,
            xi_grid=truncation.xi_grid,
            eta_grid=truncation.eta_grid,
        )
        for j in range(lo, hi + 1)
    }


def bs_norm(
    symbol: Symbol,
    m: float,
    rho: float,
    s: Sequence[float],
    variant: Variant | str = Variant.PLAIN,
    truncation: TruncationParams | None = None,
    *,
    lp2n: PartitionFamily | None = None,
    lp: PartitionFamily | None = None,
) -> NormReport:
    """Symbol-class norm with weights ``2^{-jm + k.s}``.

    * plain: ``sup_j sum_k w ||Delta_k sigma_j||_{L2ul}``
    * star: ``sum_{k0} sup_j sum_{k1,k2} w ||Delta_k sigma_j||_{L2ul}``
    * dagger: ``sup_{j,k} w ||Delta_k sigma_j||_{L^inf}``
    """
    variant = Variant(variant)
    truncation = truncation or TruncationParams()
    s = _check_s(s)
    default_2n, default_n = default_families(symbol.dim)
    lp2n = lp2n or default_2n
    lp = lp or default_n
    localized = localized_family(symbol, rho, truncation, lp2n)
    kind = BlockNorm.SUP if variant is Variant.DAGGER else BlockNorm.UL2

    def block(j: int, k: tuple[int, ...]) -> float:
        return _weight(j, k, m, s) * localized[j].block_norm(tuple(k), lp, kind)

    last_shell = 0
    quiet_stop = True
    if variant is Variant.STAR:
        inner: dict[tuple[int, int], float] = {}

        def outer_term(k0: tuple[int, ...]) -> float:
            nonlocal last_shell, quiet_stop
            best = 0.0
            for j, loc in localized.items():
                caps = loc.caps(lp)
                if k0[0] > caps[0]:
                    continue
                result = sweep_shells(
                    caps[1:],
                    lambda k12: block(j, (k0[0], *k12)),
                    truncation,
                )
                inner[(j, k0[0])] = result.value
                last_shell = max(last_shell, result.last_shell)
                quiet_stop = quiet_stop and result.quiet_stop
                best = max(best, result.value)
            return best

        x_cap = max((loc.caps(lp)[0] for loc in localized.values()), default=0)
        outer = sweep_shells([x_cap], outer_term, truncation)
        value = outer.value
        last_shell = max(last_shell, outer.last_shell)
    else:
        value = 0.0
        for j, loc in localized.items():
            result = sweep_shells(
                loc.caps(lp),
                lambda k: block(j, k),
                truncation,
                use_max=variant is Variant.DAGGER,
            )
            value = max(value, result.value)
            last_shell = max(last_shell, result.last_shell)
            quiet_stop = quiet_stop and result.quiet_stop
    lo, hi = j_bounds(symbol, rho, truncation)
    LOGGER.info(
        "BS norm (%s) of %s: m=%g rho=%g j=%d..%d value=%.6e",
        variant.value,
        symbol.label,
        m,
        rho,
        lo,
        hi,
        value,
    )
    return NormReport(
        value,
        SpaceTag.SYMBOL,
        {
            "variant": variant.value,
            "m": m,
            "rho": rho,
            "s": s,
            "j_range": (lo, hi),
            "k_stop": last_shell,
            "quiet_stop": quiet_stop,
            "tol": truncation.tol,
            "dual_levels": truncation.dual_levels,
        },
    )


def block_norm_rows(
    symbol: Symbol,
    rho: float,
    truncation: TruncationParams | None = None,
    *,
    lp2n: PartitionFamily | None = None,
    lp: PartitionFamily | None = None,
) -> list[tuple[int, int, int, int, float]]:
    """``(j, k0, k1, k2, ul2_norm)`` for every block inside the grid caps."""
    truncation = truncation or TruncationParams()
    default_2n, default_n = default_families(symbol.dim)
    lp2n = lp2n or default_2n
    lp = lp or default_n
    rows = []
    for j, loc in localized_family(symbol, rho, truncation, lp2n).items():
        caps = loc.caps(lp)
        if truncation.k_max is not None:
            caps = tuple(min(c, truncation.k_max) for c in caps)
        for k in itertools.product(*(range(c + 1) for c in caps)):
            rows.append((j, *k, loc.block_norm(k, lp)))
    return rows


def export_blocks_csv(
    symbol: Symbol,
    rho: float,
    path: Path,
    truncation: TruncationParams | None = None,
    *,
    lp2n: PartitionFamily | None = None,
    lp: PartitionFamily | None = None,
) -> Path:
    rows = block_norm_rows(symbol, rho, truncation, lp2n=lp2n, lp=lp)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["j", "k0", "k1", "k2", "ul2_norm"])
        for j, k0, k1, k2, value in rows:
            writer.writerow([j, k0, k1, k2, f"{value:.17g}"])
    LOGGER.info("Exported %d block norms to %s", len(rows), path)
    return path
