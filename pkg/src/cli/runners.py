"""Experiment runners turning an ``ExperimentConfig`` into an ``ExperimentResult``."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from bilinear import (
    DecompositionParams,
    apply,
    decompose,
    direct_oracle,
    random_band_limited,
    ratio_probe,
    shell_family,
)
from cli.experiments import ExperimentConfig, ExperimentName
from cli.report import PlotSeries
from fields import Field, GridSpec
from partitions import (
    ShellSplit,
    RadialCutoff,
    make_shell_split,
    make_lp,
    make_uniform_pair,
)
from sharpness import (
    SharpnessSweep,
    dilation_transfer,
    dyadic_eps,
    eps_sweep,
    expected_slope,
    family_grid,
    s0_sweep,
    transfer_exponent,
    transfer_slope,
    wainger_sweep,
    wainger_threshold,
)
from sharpness.dilation import SLOPE_SLACK
from sharpness.s0 import PHI_HALF_WIDTH, X_NODES
from sharpness.sweep import SweepRow
from sharpness.wainger import wainger_grid
from spaces import (
    besov_norm,
    bmo_norms,
    h1_norm,
    lp_norm,
    sobolev_norm,
    ul2_norm,
)
from symbols import (
    Symbol,
    separable_symbol,
    x_independent_symbol,
    x_separable_symbol,
)
from utils.config_validator import ConfigValidationError
from utils.slopes import fit_loglog

LOGGER = logging.getLogger("bilinpdo.cli")

PARTITION_TOL = 1e-12
UNIFORM_TOL = 1e-8
APPLY_TOL = 1e-9
DECOMPOSE_TOL = 1e-6
EPS_SLOPE_TOL = 0.1
WAINGER_BOUNDED_SPREAD = 2.0
WAINGER_MIN_GROWTH = 1.5
CLOSED_FORM_TOL = 1e-6
MAX_ORACLE_WORK = 1 << 21
SPLIT_BOXES = {
    "phi_prime": (0.0, 2.0**-5),
    "psi_prime": (2.0**-4, 2.0**2),
    "psi_dprime": (2.0**-6, 2.0**2),
}


@dataclass
class ExperimentResult:
    """Outcome of one run; ``rows`` become ``results.csv``."""

    experiment: str
    passed: bool
    metric: str
    value: float
    tolerance: str
    rows: list[dict[str, Any]]
    offending: dict[str, Any] | None = None
    plot: PlotSeries | None = None
    attachments: list[Callable[[Path], Path]] = field(default_factory=list)
    value_format: str = ".3e"

    def summary_line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.experiment}: {self.metric} = "
            f"{self.value:{self.value_format}} ({self.tolerance})"
        )


def _worst(rows: list[dict[str, Any]], key: str = "passed") -> dict[str, Any] | None:
    return next((row for row in rows if not row[key]), None)


def _ball_points(
    rng: np.random.Generator, count: int, dim: int, radius: float
) -> np.ndarray:
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * radius * rng.random((count, 1)) ** (1.0 / dim)


def run_lp_check(config: ExperimentConfig) -> ExperimentResult:
    """Residual of ``sum_{k<=K} psi_k - 1`` on the ball where it must vanish."""
    p = config.params
    dim = config.grid.n
    family = make_lp(dim, p["K"], float(p["sharpness"]))
    rng = np.random.default_rng(config.seed)
    rows = []
    for k_last in range(p["K"] + 1):
        radius = family.inner * 2.0**k_last
        points = _ball_points(rng, p["points"], dim, radius)
        residual = float(np.max(np.abs(family.partial_sum(k_last, points) - 1.0)))
        rows.append(
            {
                "k_last": k_last,
                "radius": radius,
                "residual": residual,
                "passed": residual <= PARTITION_TOL,
            }
        )
    worst = max(row["residual"] for row in rows)
    return ExperimentResult(
        ExperimentName.LP_CHECK.value,
        worst <= PARTITION_TOL,
        "max partition residual",
        worst,
        f"<= {PARTITION_TOL:g}",
        rows,
        _worst(rows),
    )


def run_uniform_check(config: ExperimentConfig) -> ExperimentResult:
    """``sum_nu kappa chi (xi - nu) = 1`` plus the support and positivity conditions."""
    p = config.params
    dim = config.grid.n
    pair = make_uniform_pair(dim)
    rng = np.random.default_rng(config.seed)
    half = float(p["span"]) / 2.0
    points = rng.uniform(-half, half, (p["points"], dim))
    identity = float(np.max(np.abs(pair.partition_sum(points) - 1.0)))
    outside = rng.uniform(1.0, 2.0, (p["points"], dim)) * rng.choice(
        [-1.0, 1.0], (p["points"], dim)
    )
    leak = float(np.max(np.abs(pair.kappa(outside))))
    floor = pair.chi_lower_bound()
    rows = [
        {
            "check": "identity",
            "value": identity,
            "limit": UNIFORM_TOL,
            "passed": identity <= UNIFORM_TOL,
        },
        {
            "check": "kappa_outside_cube",
            "value": leak,
            "limit": 0.0,
            "passed": leak == 0.0,
        },
        {
            "check": "chi_lower_bound",
            "value": floor,
            "limit": 0.0,
            "passed": floor > 0.0,
        },
        {
            "check": "chi_spectral_radius",
            "value": pair.spectral_radius,
            "limit": 1.0,
            "passed": pair.spectral_radius <= 1.0,
        },
    ]
    offending = _worst(rows)
    return ExperimentResult(
        ExperimentName.UNIFORM_CHECK.value,
        offending is None,
        "max identity deviation",
        identity,
        f"<= {UNIFORM_TOL:g}, side conditions hold",
        rows,
        offending,
    )


def split_rows(
    split: ShellSplit, j_max: int, samples: int, rng: np.random.Generator
) -> list[dict[str, Any]]:
    """Identity residual per shell and the three support boxes."""
    dim = split.dim
    rows = []
    for j in range(1, j_max + 1):
        reach = 2.0 ** (j + 2)
        xi = rng.uniform(-reach, reach, (samples * samples, dim))
        eta = rng.uniform(-reach, reach, (samples * samples, dim))
        residual = split.residual(j, xi, eta)
        rows.append(
            {
                "check": f"identity_j{j}",
                "value": residual,
                "limit": PARTITION_TOL,
                "passed": residual <= PARTITION_TOL,
            }
        )
    radii = np.linspace(0.0, 8.0, 64 * samples + 1)
    profiles = {
        "phi_prime": split.phi_prime_radial,
        "psi_prime": split.psi_prime_radial,
        "psi_dprime": split.psi_dprime_radial,
    }
    for name, (lo, hi) in SPLIT_BOXES.items():
        values = profiles[name](radii)
        outside = (radii < lo) | (radii > hi)
        leak = float(np.max(np.abs(values[outside]), initial=0.0))
        rows.append(
            {
                "check": f"support_{name}",
                "value": leak,
                "limit": 0.0,
                "passed": leak == 0.0,
            }
        )
    return rows


def run_split_check(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    split = make_shell_split(make_lp(2 * config.grid.n, p["K"]))
    return split_result(split, config)


def split_result(split: ShellSplit, config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    rng = np.random.default_rng(config.seed)
    rows = split_rows(split, p["j_max"], p["samples"], rng)
    worst = max(row["value"] for row in rows if row["check"].startswith("identity"))
    offending = _worst(rows)
    return ExperimentResult(
        ExperimentName.SPLIT_CHECK.value,
        offending is None,
        "max split residual",
        worst,
        f"<= {PARTITION_TOL:g}, supports inside their boxes",
        rows,
        offending,
    )


def _input_field(config: ExperimentConfig, grid: GridSpec) -> Field:
    p = config.params
    if p["input"] == "gaussian":
        width = float(p["width"])
        return grid.sample(
            lambda x: np.exp(-np.sum(x**2, axis=-1) / (2.0 * width**2))
        )
    rng = np.random.default_rng(config.seed)
    return random_band_limited(grid, 0.5 * grid.nyquist, rng)


def _covering_lp(grid: GridSpec):
    family = make_lp(grid.dim, 1)
    corner = grid.nyquist * math.sqrt(grid.dim)
    return make_lp(grid.dim, max(1, family.covering_level(corner)))


def run_norm(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    grid = config.grid.spec()
    f = _input_field(config, grid)
    space = p["space"]
    if space == "lp":
        report = lp_norm(f, float(p["p"]))
    elif space == "ul2":
        report = ul2_norm(f)
    elif space == "besov":
        report = besov_norm(
            f, float(p["s"]), float(p["p"]), float(p["q"]), _covering_lp(grid)
        )
    elif space == "sobolev":
        report = sobolev_norm(f, float(p["s"]))
    elif space == "h1":
        report = h1_norm(f)
    else:
        local, global_ = bmo_norms(f)
        report = local if space == "bmo" else global_
    value = report.value
    passed = math.isfinite(value) and value >= 0
    row = {"space": space, "input": p["input"], "value": value, "passed": passed}
    return ExperimentResult(
        ExperimentName.NORM.value,
        passed,
        f"{space} norm",
        value,
        "finite and non-negative",
        [row],
        None if passed else row,
    )


def _ones(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return np.ones(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))


def _apply_symbol(config: ExperimentConfig) -> Symbol:
    p = config.params
    dim = config.grid.n
    if p["symbol"] == "one":
        return x_independent_symbol(_ones, dim, label="one")
    if p["symbol"] == "separable":
        low = RadialCutoff(1.0, 2.0)
        high = RadialCutoff(2.0, 4.0)
        return separable_symbol(
            lambda x: np.exp(-np.sum(np.asarray(x) ** 2, axis=-1) / 8.0),
            low,
            high,
            dim,
            label="separable",
            freq_support_radius=math.hypot(2.0, 4.0),
        )
    return shell_family(dim, p["j"], float(p["rho"]))


def run_apply(config: ExperimentConfig) -> ExperimentResult:
    """Fast ``T_sigma`` route against the scalar triple loop."""
    grid = config.grid.spec()
    work = grid.points ** (3 * grid.dim)
    if work > MAX_ORACLE_WORK:
        raise ConfigValidationError(
            f"direct oracle needs N^(3n) = {work} evaluations; limit is "
            f"{MAX_ORACLE_WORK}, lower N"
        )
    symbol = _apply_symbol(config)
    rng = np.random.default_rng(config.seed)
    f = random_band_limited(grid, 0.5 * grid.nyquist, rng)
    g = random_band_limited(grid, 0.5 * grid.nyquist, rng)
    fast = apply(symbol, f, g, truncate=True)
    slow = direct_oracle(symbol, f, g)
    scale = float(np.max(np.abs(slow.samples)))
    error = float(np.max(np.abs(fast.samples - slow.samples))) / max(scale, 1e-300)
    passed = error <= APPLY_TOL
    row = {
        "symbol": symbol.label,
        "route": fast.meta.get("route", ""),
        "rel_error": error,
        "truncation": "truncated" if fast.meta.get("truncated") else "none",
        "passed": passed,
    }
    return ExperimentResult(
        ExperimentName.APPLY.value,
        passed,
        "relative error vs direct sum",
        error,
        f"<= {APPLY_TOL:g}",
        [row],
        None if passed else row,
    )


def run_decompose_check(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    grid = config.grid.spec()
    rng = np.random.default_rng(config.seed)
    radius = 0.8 * grid.nyquist
    f, g, h = (random_band_limited(grid, radius, rng) for _ in range(3))
    symbol = shell_family(grid.dim, p["j0"])
    ledger = decompose(
        symbol,
        f,
        g,
        h,
        float(p["rho"]),
        DecompositionParams(j_low=p["j_low"]),
    )
    error = ledger.relative_error()
    audits = ledger.audit_supports()
    failed_audits = [row for row in audits if not row.passed]
    truncation = "truncated" if ledger.truncated else "none"
    rows: list[dict[str, Any]] = [
        {
            "route": route.value,
            "re": value.real,
            "im": value.imag,
            "truncation": truncation,
        }
        for route, value in ledger.block_sums().items()
    ]
    rows.append(
        {
            "route": "direct",
            "re": ledger.direct_value.real,
            "im": ledger.direct_value.imag,
            "truncation": truncation,
        }
    )
    passed = error <= DECOMPOSE_TOL and not failed_audits
    offending = None
    if failed_audits:
        audit = failed_audits[0]
        offending = {**asdict(audit), "route": audit.route.value}
    elif not passed:
        offending = {"relative_error": error}
    LOGGER.info("Support audit: %d rows, %d failed", len(audits), len(failed_audits))
    return ExperimentResult(
        ExperimentName.DECOMPOSE_CHECK.value,
        passed,
        "|sum parts - direct| / |direct|",
        error,
        f"<= {DECOMPOSE_TOL:g}, {len(audits)} support audits",
        rows,
        offending,
        attachments=[lambda out: ledger.to_csv(out / "blocks.csv")],
    )


def run_ratio_probe(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    grid = config.grid.spec()
    s0 = grid.dim / 2.0 if p["out"] == "L1" else None
    symbol = shell_family(grid.dim, p["j"], float(p["rho"]), s0=s0)
    stats = ratio_probe(
        symbol,
        (p["in_f"], p["in_g"]),
        p["out"],
        p["trials"],
        config.seed,
        grid=grid,
        truncate=True,
    )
    truncation = "truncated" if stats.truncated else "none"
    rows = [
        {"trial": index, "ratio": float(ratio), "truncation": truncation}
        for index, ratio in enumerate(stats.ratios)
    ]
    passed = bool(np.all(np.isfinite(stats.ratios)))
    offending = next((row for row in rows if not math.isfinite(row["ratio"])), None)
    return ExperimentResult(
        ExperimentName.RATIO_PROBE.value,
        passed,
        f"median {'x'.join(stats.in_spaces)}->{stats.out_space} ratio",
        stats.median,
        f"max {stats.max:.3e}, all finite",
        rows,
        offending,
    )


def hormander_symbol(m: float, dim: int = 1) -> Symbol:
    """``(1 + |xi|^2 + |eta|^2)^{m/2}`` times a compactly supported plateau in ``x``."""
    plateau = RadialCutoff(2.0, 6.0)

    def tau(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return (1.0 + np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1)) ** (m / 2)

    return x_separable_symbol(
        lambda x: plateau.of_radius(np.linalg.norm(np.asarray(x), axis=-1)),
        tau,
        dim,
        label=f"hormander(m={m:g})",
        x_support_radius=6.0,
    )


def sweep_rows(
    sweep: SharpnessSweep, provenance: Callable[[SweepRow], dict[str, Any]]
) -> list[dict[str, Any]]:
    rows = []
    for row in sweep.rows:
        rows.append(
            {
                "family": sweep.family.value,
                **row.params,
                "lhs": row.lhs,
                "rhs": row.rhs,
                "ratio": row.ratio,
                **provenance(row),
            }
        )
    return rows


def _eps_provenance(row: SweepRow) -> dict[str, Any]:
    grid = family_grid(row.params["eps"], row.params["dim"])
    return {"T": grid.extent, "N": grid.points, "truncation": "none"}


def _lattice_provenance(row: SweepRow) -> dict[str, Any]:
    k_cut = int(row.details["k_cut"])
    grid = wainger_grid(k_cut, row.params["dim"])
    return {"T": grid.extent, "N": grid.points, "truncation": f"K_cut={k_cut}"}


def _s0_provenance(row: SweepRow) -> dict[str, Any]:
    side = row.details["side"]
    sampled = side == "sampled"
    return {
        "side": side,
        "T": 2.0 * PHI_HALF_WIDTH if sampled else "",
        "N": X_NODES if sampled else "",
        "truncation": f"K_cut={row.details['k_cut']}",
    }


def _dilation_provenance(row: SweepRow) -> dict[str, Any]:
    return {"T": "", "N": "", "truncation": "relevant shells"}


def run_sharpness(config: ExperimentConfig) -> ExperimentResult:
    p = config.params
    dim = config.grid.n
    levels = range(p["lo"], p["hi"] + 1)
    family = p["family"]
    if family == "eps_s12":
        return _eps_result(p, dim, levels)
    if family == "wainger":
        return _wainger_result(p, dim, levels)
    if family == "s0":
        return _s0_result(p, dim, levels)
    return _dilation_result(p, dim, levels)


def _eps_result(p: dict[str, Any], dim: int, levels: range) -> ExperimentResult:
    s1 = float(p["s1"])
    sweep = eps_sweep(
        dyadic_eps(levels),
        p=float(p["p"]),
        q=float(p["q"]),
        r=float(p["r"]),
        s1=s1,
        s2=float(p["s2"]),
        dim=dim,
    )
    fit = sweep.fitted_slope()
    target = expected_slope(s1, dim)
    passed = abs(fit.slope - target) <= EPS_SLOPE_TOL
    rows = sweep_rows(sweep, _eps_provenance)
    return ExperimentResult(
        ExperimentName.SHARPNESS.value,
        passed,
        "eps_s12 slope",
        fit.slope,
        f"expected {target:+.3f} +/- {EPS_SLOPE_TOL:g}",
        rows,
        None if passed else {"slope": fit.slope, "expected": target},
        PlotSeries(sweep.values, sweep.ratios, "eps_s12", "eps", fit=fit),
        value_format="+.4f",
    )


def _wainger_result(p: dict[str, Any], dim: int, levels: range) -> ExperimentResult:
    a, b, exponent = float(p["a"]), float(p["b"]), float(p["p"])
    sweep = wainger_sweep(dyadic_eps(levels), a=a, b=b, p=exponent, dim=dim)
    threshold = wainger_threshold(a, exponent, dim)
    norms = [row.lhs for row in sweep.rows]
    fit = sweep.fitted_slope()
    rows = sweep_rows(sweep, _lattice_provenance)
    if b > threshold:
        spread = max(norms) / min(norms)
        passed = spread < WAINGER_BOUNDED_SPREAD
        tolerance = (
            f"b={b:g} > threshold {threshold:.4f}: max/min {spread:.3f} "
            f"< {WAINGER_BOUNDED_SPREAD:g}"
        )
    else:
        growth = norms[0] / norms[-1]
        passed = growth >= WAINGER_MIN_GROWTH
        tolerance = (
            f"b={b:g} <= threshold {threshold:.4f}: growth {growth:.3f} "
            f">= {WAINGER_MIN_GROWTH:g}"
        )
    return ExperimentResult(
        ExperimentName.SHARPNESS.value,
        passed,
        "wainger slope",
        fit.slope,
        tolerance,
        rows,
        None if passed else rows[0],
        PlotSeries(sweep.values, sweep.ratios, "wainger", "t", "L^p norm", fit=fit),
        value_format="+.4f",
    )


def _s0_result(p: dict[str, Any], dim: int, levels: range) -> ExperimentResult:
    family = {key: float(p[key]) for key in ("a1", "a2", "b1", "b2", "m", "s0")}
    r = float(p.get("r", 1.0))
    check = s0_sweep(
        dyadic_eps([int(p.get("check", 1))]), **family, r=r, dim=dim, sampled=True
    )
    sweep = s0_sweep(dyadic_eps(levels), **family, r=r, dim=dim)
    checked = sweep_rows(check, _s0_provenance)
    rows = checked + sweep_rows(sweep, _s0_provenance)
    sampled = check.rows[0]
    error = abs(sampled.lhs - sampled.rhs) / sampled.rhs
    passed = error <= CLOSED_FORM_TOL
    lhs = [row.lhs for row in sweep.rows]
    fit = fit_loglog(sweep.values, lhs, min_points=len(lhs))
    exponent = sweep.rows[0].details["exponent"]
    LOGGER.info(
        "s0 family exponent %.3f: growth %.3f over the t sweep, lower bound %.3f",
        exponent,
        lhs[0] / lhs[-1],
        1.0 / sweep.growth("lower_bound"),
    )
    return ExperimentResult(
        ExperimentName.SHARPNESS.value,
        passed,
        f"s0 sampled vs closed form at t={sampled.params['t']:g}",
        error,
        f"<= {CLOSED_FORM_TOL:g}; lattice exponent {exponent:+.3f}",
        rows,
        None if passed else checked[0],
        PlotSeries(sweep.values, lhs, "s0_family", "t", "|T(f,g)|_r", fit=fit),
    )


def _dilation_result(p: dict[str, Any], dim: int, levels: range) -> ExperimentResult:
    m, mp, rho = float(p["m"]), float(p["mp"]), float(p["rho"])
    s = float(p["s"])
    sweep = dilation_transfer(hormander_symbol(mp, dim), m, mp, rho, (s, s, s), levels)
    slope = transfer_slope(sweep)
    bound = transfer_exponent(m, mp, rho)
    passed = slope <= bound + SLOPE_SLACK
    rows = sweep_rows(sweep, _dilation_provenance)
    return ExperimentResult(
        ExperimentName.SHARPNESS.value,
        passed,
        "dilation transfer slope",
        slope,
        f"<= {bound:+.3f} + {SLOPE_SLACK:g}",
        rows,
        None if passed else rows[-1],
        PlotSeries(
            sweep.values,
            sweep.ratios,
            "dilation_transfer",
            "ell",
            logx=False,
            fit=sweep.fitted_slope(logx=False),
        ),
        value_format="+.4f",
    )


RUNNERS: dict[ExperimentName, Callable[[ExperimentConfig], ExperimentResult]] = {
    ExperimentName.LP_CHECK: run_lp_check,
    ExperimentName.UNIFORM_CHECK: run_uniform_check,
    ExperimentName.SPLIT_CHECK: run_split_check,
    ExperimentName.NORM: run_norm,
    ExperimentName.APPLY: run_apply,
    ExperimentName.DECOMPOSE_CHECK: run_decompose_check,
    ExperimentName.RATIO_PROBE: run_ratio_probe,
    ExperimentName.SHARPNESS: run_sharpness,
}


def run(config: ExperimentConfig) -> ExperimentResult:
    LOGGER.info("Running %s with seed %d", config.experiment.value, config.seed)
    return RUNNERS[config.experiment](config)
