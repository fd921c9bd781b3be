"""Empirical operator-norm ratios over random band-limited inputs."""

from __future__ import annotations

import csv
import functools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from bilinear.operator import apply
from fields import Field, GridSpec, inverse_array
from partitions import PartitionFamily, make_lp
from spaces import bmo_norms, h1_norm, lp_norm
from symbols import (
    Symbol,
    TruncationParams,
    Variant,
    bs_norm,
    x_independent_symbol,
)
from utils.errors import PreconditionError
from utils.slopes import SlopeFit, fit_line

LOGGER = logging.getLogger("bilinpdo.bilinear")

IN_SPACES = ("L2", "bmo")
OUT_SPACES = ("h1", "L2", "L1")
MAX_RESAMPLES = 16
DEFAULT_QUANTILES = (0.1, 0.25, 0.75, 0.9)
# Psi_j is smooth at scale 2^j, so its blocks sit in the lowest dual piece
SHELL_DUAL_LEVELS = 0

NormFunc = Callable[[Field], float]


def _in_norm(tag: str) -> NormFunc:
    if tag == "L2":
        return lambda f: lp_norm(f, 2.0).value
    if tag == "bmo":
        return lambda f: bmo_norms(f)[0].value
    raise PreconditionError(f"input space must be one of {IN_SPACES}, got: {tag!r}")


def _out_norm(tag: str) -> NormFunc:
    if tag == "h1":
        return lambda f: h1_norm(f).value
    if tag == "L2":
        return lambda f: lp_norm(f, 2.0).value
    if tag == "L1":
        return lambda f: lp_norm(f, 1.0).value
    raise PreconditionError(f"output space must be one of {OUT_SPACES}, got: {tag!r}")


def random_band_limited(
    grid: GridSpec, radius: float, rng: np.random.Generator
) -> Field:
    """Complex Gaussian spectrum on ``|xi| <= radius``, zero elsewhere."""
    inside = grid.frequency_radius() <= radius
    spectrum = np.zeros(grid.shape, dtype=complex)
    count = int(inside.sum())
    spectrum[inside] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    samples = inverse_array(spectrum, tuple(range(grid.dim)), grid.cell)
    return Field(grid, samples, meta={"band_radius": radius})


@dataclass(frozen=True)
class ProbeStats:
    ratios: np.ndarray
    in_spaces: tuple[str, str]
    out_space: str
    params: Mapping[str, Any] = field(default_factory=dict)
    truncated: bool = False

    @property
    def max(self) -> float:
        return float(np.max(self.ratios))

    @property
    def median(self) -> float:
        return float(np.median(self.ratios))

    def quantiles(
        self, levels: Sequence[float] = DEFAULT_QUANTILES
    ) -> dict[float, float]:
        return {q: float(np.quantile(self.ratios, q)) for q in levels}

    def summary(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "in": "x".join(self.in_spaces),
            "out": self.out_space,
            "trials": int(self.ratios.size),
            "max": self.max,
            "median": self.median,
            "truncation": "truncated" if self.truncated else "none",
        }
        row.update({f"q{q:g}": value for q, value in self.quantiles().items()})
        row.update(self.params)
        return row

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["trial", "ratio"])
            for trial, ratio in enumerate(self.ratios):
                writer.writerow([trial, f"{ratio:.17g}"])
        LOGGER.info("Wrote %d probe ratios to %s", self.ratios.size, path)
        return path


def _draw(
    grid: GridSpec,
    radius: float,
    norm: NormFunc,
    rng: np.random.Generator,
) -> tuple[Field, float]:
    for _ in range(MAX_RESAMPLES):
        candidate = random_band_limited(grid, radius, rng)
        value = norm(candidate)
        if value > 0.0:
            return candidate, value
        LOGGER.debug("Resampling zero-norm input (band radius %.4g)", radius)
    raise PreconditionError(
        f"no input with nonzero norm after {MAX_RESAMPLES} draws; "
        f"band radius {radius:.4g} holds no lattice frequency"
    )


def ratio_probe(
    symbol: Symbol,
    in_spaces: tuple[str, str] = ("L2", "L2"),
    out_space: str = "h1",
    trials: int = 50,
    seed: int = 0,
    *,
    grid: GridSpec,
    f_radius: float | None = None,
    g_radius: float | None = None,
    truncate: bool = False,
) -> ProbeStats:
    """``||T(f, g)||_out / (||f|| ||g||)`` over ``trials`` random input pairs.

    Inputs are band-limited to ``f_radius`` and ``g_radius`` (half the Nyquist
    radius by default).  Draws use ``numpy.random.default_rng(seed)`` so the
    ratios are reproducible.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got: {trials}")
    f_norm = _in_norm(in_spaces[0])
    g_norm = _in_norm(in_spaces[1])
    out_norm = _out_norm(out_space)
    f_radius = 0.5 * grid.nyquist if f_radius is None else f_radius
    g_radius = 0.5 * grid.nyquist if g_radius is None else g_radius
    rng = np.random.default_rng(seed)
    ratios = np.empty(trials)
    truncated = False
    for trial in range(trials):
        f, f_size = _draw(grid, f_radius, f_norm, rng)
        g, g_size = _draw(grid, g_radius, g_norm, rng)
        output = apply(symbol, f, g, truncate=truncate)
        truncated = truncated or bool(output.meta.get("truncated"))
        ratios[trial] = out_norm(output) / (f_size * g_size)
    stats = ProbeStats(
        ratios,
        (in_spaces[0], in_spaces[1]),
        out_space,
        {"symbol": symbol.label, "seed": seed, **grid.describe()},
        truncated,
    )
    LOGGER.info(
        "Probe %s %s->%s over %d trials: median %.4e, max %.4e",
        symbol.label,
        "x".join(in_spaces),
        out_space,
        trials,
        stats.median,
        stats.max,
    )
    return stats


def _shell(dim: int, j: int, lp2n: PartitionFamily, weight: float) -> Symbol:
    def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        radius = np.sqrt(np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1))
        return weight * lp2n.piece_radial(j, radius)

    return x_independent_symbol(
        tau,
        dim,
        label=f"shell-{j}",
        freq_support_radius=lp2n.outer * 2.0**j,
    )


def shell_indices(dim: int, s0: float | None = None) -> tuple[float, float, float]:
    """``(s0, n/2, n/2)``; ``s0`` defaults to ``n/2 + 0.1``."""
    half = dim / 2.0
    return (half + 0.1 if s0 is None else s0, half, half)


@functools.lru_cache(maxsize=64)
def shell_norm(
    dim: int, j: int, rho: float, s0: float, lp2n: PartitionFamily
) -> float:
    """``||Psi_j||`` in ``BS^{m,*}_rho(s0, n/2, n/2)`` with ``m = -(1 - rho) n / 2``.

    ``Psi_j`` meets only the shells ``j - 1 .. j + 1`` of ``lp2n``.
    """
    m = -(1.0 - rho) * dim / 2.0
    truncation = TruncationParams(
        j_range=(max(j - 1, 0), j + 1), dual_levels=SHELL_DUAL_LEVELS
    )
    report = bs_norm(
        _shell(dim, j, lp2n, 1.0),
        m,
        rho,
        shell_indices(dim, s0),
        Variant.STAR,
        truncation,
        lp2n=lp2n,
    )
    if not report.value > 0.0:
        raise PreconditionError(f"shell {j} has zero BS^{{m,*}} norm")
    LOGGER.debug("Shell %d (rho=%g, s0=%g): norm %.6e", j, rho, s0, report.value)
    return report.value


def shell_family(
    dim: int,
    j: int,
    rho: float = 0.0,
    lp2n: PartitionFamily | None = None,
    *,
    s0: float | None = None,
) -> Symbol:
    """``Psi_j(xi, eta)`` scaled to unit ``BS^{m,*}_rho(s0, n/2, n/2)`` norm.

    ``m = -(1 - rho) n / 2``; ``s0 = n/2`` gives the ``L^2 x L^2 -> L^1`` class.
    """
    lp2n = lp2n or make_lp(2 * dim, max(j, 1) + 1)
    s0 = shell_indices(dim, s0)[0]
    return _shell(dim, j, lp2n, 1.0 / shell_norm(dim, j, rho, s0, lp2n))


def probe_trend(medians: Mapping[int, float]) -> SlopeFit:
    """Slope of ``log2`` median ratio against the shell index."""
    js = sorted(medians)
    values = [medians[j] for j in js]
    if any(not math.isfinite(v) or v <= 0 for v in values):
        raise PreconditionError("probe trend needs positive finite medians")
    return fit_line(js, np.log2(values))
