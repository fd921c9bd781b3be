"""Acceptance suite behind ``bilinpdo selftest``."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

import numpy as np

from bilinear import apply, probe_trend, random_band_limited, ratio_probe, shell_family
from cli.experiments import build_config
from cli.runners import (
    ExperimentResult,
    hormander_symbol,
    run_decompose_check,
    run_lp_check,
    run_split_check,
    run_uniform_check,
    split_result,
)
from fields import Field, GridSpec, dft, multiplier_apply, next_power_of_two
from partitions import RadialCutoff, ShellSplit, make_lp
from sharpness import (
    closed_form_error,
    dilation_transfer,
    dyadic_eps,
    eps_sweep,
    expected_slope,
    family_s0,
    lower_bound_sum,
    transfer_holds,
    wainger,
    wainger_sweep,
    wainger_threshold,
)
from spaces import lp_norm, square_function
from symbols import hormander_decay_check, separable_symbol, x_independent_symbol
from utils.config_validator import ConfigValidationError
from utils.errors import BilinpdoError
from utils.logging_config import LogContext
from utils.slopes import fit_loglog

LOGGER = logging.getLogger("bilinpdo.selftest")

MODULES = ("field_core", "partitions", "spaces", "symbols", "bilinear", "sharpness")
FAULTS = ("split-profile",)
FAULT_SCALE = 1e-3


@dataclass(frozen=True)
class Outcome:
    passed: bool
    detail: str


@dataclass(frozen=True)
class Criterion:
    number: int
    module: str
    name: str
    check: Callable[[frozenset[str]], Outcome]


class _PerturbedSplit(ShellSplit):
    """Split whose cutoff profile is off by a relative ``FAULT_SCALE``."""

    def _phi(self, radius: np.ndarray, exponent: float) -> np.ndarray:
        return super()._phi(radius, exponent) * (1.0 + FAULT_SCALE)


def _from_result(results: Iterable[ExperimentResult]) -> Outcome:
    collected = list(results)
    failed = [r for r in collected if not r.passed]
    shown = failed[0] if failed else collected[-1]
    detail = shown.summary_line()
    if failed and shown.offending:
        detail += f"; offending row {shown.offending}"
    return Outcome(not failed, detail)


def check_dft_oracle(faults: frozenset[str]) -> Outcome:
    worst = 0.0
    for trial in range(20):
        grid = GridSpec(1, 4, (8, 16, 32, 64)[trial % 4])
        rng = np.random.default_rng(trial)
        samples = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        f = Field(grid, samples)
        x = grid.axis()
        xi = grid.frequency_axis()
        direct = grid.spacing * np.exp(-1j * np.outer(xi, x)) @ f.samples
        fast = dft(f).samples
        error = float(np.max(np.abs(fast - direct)) / np.max(np.abs(direct)))
        worst = max(worst, error)
    return Outcome(
        worst <= 1e-10, f"max FFT vs direct-sum error {worst:.3e} (<= 1e-10)"
    )


def check_partition(faults: frozenset[str]) -> Outcome:
    return _from_result(
        run_lp_check(build_config("lp-check", overrides=[f"n={dim}"]))
        for dim in (1, 2)
    )


def check_uniform(faults: frozenset[str]) -> Outcome:
    return _from_result(
        run_uniform_check(
            build_config("uniform-check", overrides=[f"n={dim}", f"span={span}"])
        )
        for dim, span in ((1, 20.0), (2, 10.0))
    )


def check_split(faults: frozenset[str]) -> Outcome:
    config = build_config("split-check")
    if "split-profile" in faults:
        family = make_lp(2, config.params["K"])
        LOGGER.warning("Injecting a perturbed split profile")
        return _from_result([split_result(_PerturbedSplit(family), config)])
    return _from_result([run_split_check(config)])


def _ones(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return np.ones(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))


def check_trivial_laws(faults: frozenset[str]) -> Outcome:
    grid = GridSpec(1, 8, 64)
    rng = np.random.default_rng(5)
    f = random_band_limited(grid, 0.5 * grid.nyquist, rng)
    g = random_band_limited(grid, 0.5 * grid.nyquist, rng)
    product = f.samples * g.samples
    one = apply(x_independent_symbol(_ones, 1), f, g, truncate=True).samples
    product_error = float(np.max(np.abs(one - product)) / np.max(np.abs(product)))

    low = RadialCutoff(1.0, 2.0)
    high = RadialCutoff(2.0, 4.0)
    expected = multiplier_apply(low, f).samples * multiplier_apply(high, g).samples
    separable = apply(separable_symbol(None, low, high, 1), f, g, truncate=True)
    separable_error = float(
        np.max(np.abs(separable.samples - expected)) / np.max(np.abs(expected))
    )
    closed = closed_form_error(1.0 / 8.0, 2.0, 2.0, 1)
    passed = product_error <= 1e-9 and separable_error <= 1e-9 and closed <= 1e-8
    return Outcome(
        passed,
        f"product {product_error:.2e}, separable {separable_error:.2e} (<= 1e-9); "
        f"closed form {closed:.2e} (<= 1e-8)",
    )


def _decompose_extent(j0: int, points: int) -> int:
    """Largest period in {8, 4, 2, 1} whose inputs reach the shell ``j0``."""
    for extent in (8, 4, 2, 1):
        nyquist = math.pi * points / extent
        if 0.8 * nyquist >= 1.1 * 2.0 ** (j0 + 1):
            return extent
    return 1


def check_decomposition(faults: frozenset[str]) -> Outcome:
    results = []
    for j0 in (3, 5, 7):
        for rho in (0.0, 0.5):
            config = build_config(
                "decompose-check",
                overrides=[
                    f"j0={j0}",
                    f"rho={rho}",
                    "N=256",
                    f"T={_decompose_extent(j0, 256)}",
                ],
            )
            with LogContext(experiment="decompose-check", j0=j0, rho=rho):
                results.append(run_decompose_check(config))
    return _from_result(results)


def check_decay_signature(faults: frozenset[str]) -> Outcome:
    rho = 0.5
    m = -(1.0 - rho) / 2.0
    report = hormander_decay_check(
        hormander_symbol(m), m, rho, (2, 2, 2), j_values=range(4, 9)
    )
    return Outcome(
        report.passed,
        f"j-slope {report.j_slope:+.3f} (m = {m:+.3f} +/- 0.15), "
        f"k-slopes {report.k_slopes}",
    )


def check_square_function(faults: frozenset[str]) -> Outcome:
    grid = GridSpec(1, 64, 256)
    f = grid.sample(lambda x: np.exp(-np.sum(x**2, axis=-1) / 32.0))
    radii = [1.0, 2.0, 4.0, 8.0]
    slopes = {}
    for p in (2.0, 4.0, math.inf):
        norm = lp_norm(f, p).value
        values = [square_function(f, R, p=p).value / norm for R in radii]
        slopes[p] = fit_loglog(radii, values).slope
    worst = max(abs(s - 0.5) for s in slopes.values())
    shown = ", ".join(f"p={p:g}: {s:.3f}" for p, s in slopes.items())
    return Outcome(worst <= 0.2, f"R-slopes {shown} (0.5 +/- 0.2)")


# (inputs, target, s0); the L^1 target sits at s0 = n/2 exactly
PROBE_PAIRINGS = (
    (("L2", "L2"), "h1", 0.6),
    (("L2", "bmo"), "L2", 0.6),
    (("L2", "L2"), "L1", 0.5),
)
PROBE_SHELLS = range(0, 9)
PROBE_TRIALS = 50
PROBE_FLATNESS = 0.05


def check_probe_flatness(faults: frozenset[str]) -> Outcome:
    trends = {}
    for in_spaces, out_space, s0 in PROBE_PAIRINGS:
        medians = {}
        for j in PROBE_SHELLS:
            extent = 8
            points = max(64, next_power_of_two(2.0 ** (j + 2) * extent / math.pi))
            grid = GridSpec(1, extent, points)
            stats = ratio_probe(
                shell_family(1, j, s0=s0),
                in_spaces,
                out_space,
                PROBE_TRIALS,
                seed=j,
                grid=grid,
                f_radius=2.0 ** (j + 1),
                g_radius=2.0 ** (j + 1),
                truncate=True,
            )
            medians[j] = stats.median
        trends["x".join(in_spaces) + "->" + out_space] = probe_trend(medians).slope
    worst = max(abs(slope) for slope in trends.values())
    shown = ", ".join(f"{name}: {slope:+.3f}" for name, slope in trends.items())
    return Outcome(
        worst <= PROBE_FLATNESS, f"trend slopes {shown} (|slope| <= {PROBE_FLATNESS})"
    )


def check_eps_slope(faults: frozenset[str]) -> Outcome:
    parts = []
    passed = True
    for s1 in (0.0, 0.25, 0.5):
        slope = eps_sweep(dyadic_eps(range(6, 11)), s1=s1).fitted_slope().slope
        target = expected_slope(s1, 1)
        passed = passed and abs(slope - target) <= 0.1
        parts.append(f"s1={s1:g}: {slope:+.3f} vs {target:+.3f}")
    return Outcome(passed, "; ".join(parts) + " (+/- 0.1)")


def check_wainger(faults: frozenset[str]) -> Outcome:
    threshold = wainger_threshold(0.5, 4.0)
    bounded = wainger_sweep(
        dyadic_eps(range(3, 11)), a=0.5, b=threshold + 0.3, p=4.0
    )
    norms = [row.lhs for row in bounded.rows]
    spread = max(norms) / min(norms)
    growth = {}
    for b in (threshold - 0.2, threshold + 0.3):
        _, coarse = wainger(0.5, b, 2.0**-2, 4.0)
        _, fine = wainger(0.5, b, 2.0**-10, 4.0)
        growth[b] = fine.value / coarse.value
    low = growth[threshold - 0.2]
    passed = spread < 2.0 and low >= 1.5 and low > growth[threshold + 0.3]
    return Outcome(
        passed,
        f"threshold {threshold:.4f}: bounded spread {spread:.3f} (< 2), "
        f"divergent growth {low:.3f} (>= 1.5)",
    )


def check_s0_and_transfer(faults: frozenset[str]) -> Outcome:
    row = family_s0(0.5, 0.5, 0.7, 0.7, -1.0, 0.0, 0.5)
    closed = abs(row.ratio - 1.0)
    stable = [lower_bound_sum(t, -3.0) for t in dyadic_eps(range(6, 11))]
    change = abs(stable[-1] - stable[-2]) / stable[-2]
    doubling = lower_bound_sum(2.0**-10, -0.8) / lower_bound_sum(2.0**-4, -0.8)
    sweep = dilation_transfer(
        hormander_symbol(-0.5), -0.25, -0.5, 0.5, (0.5, 0.5, 0.5), range(1, 5)
    )
    transfer = transfer_holds(sweep, -0.25, -0.5, 0.5)
    passed = closed <= 1e-6 and change < 0.1 and doubling >= 2.0 and transfer
    return Outcome(
        passed,
        f"closed form {closed:.2e} (<= 1e-6), stable change {change:.3f} (< 0.1), "
        f"divergent growth {doubling:.2f} (>= 2), transfer "
        f"{'holds' if transfer else 'fails'}",
    )


CRITERIA = (
    Criterion(1, "field_core", "dft-oracle", check_dft_oracle),
    Criterion(2, "partitions", "lp-check", check_partition),
    Criterion(3, "partitions", "uniform-check", check_uniform),
    Criterion(4, "partitions", "split-check", check_split),
    Criterion(5, "bilinear", "trivial-laws", check_trivial_laws),
    Criterion(6, "bilinear", "decompose-check", check_decomposition),
    Criterion(7, "symbols", "decay-signature", check_decay_signature),
    Criterion(8, "spaces", "square-function", check_square_function),
    Criterion(9, "bilinear", "probe-flatness", check_probe_flatness),
    Criterion(10, "sharpness", "eps-slope", check_eps_slope),
    Criterion(11, "sharpness", "wainger-threshold", check_wainger),
    Criterion(12, "sharpness", "s0-and-transfer", check_s0_and_transfer),
)


def select(module: str | None = None) -> list[Criterion]:
    if module is None:
        return list(CRITERIA)
    if module not in MODULES:
        choices = ", ".join(MODULES)
        raise ConfigValidationError(f"filter must be one of [{choices}], got: {module}")
    return [c for c in CRITERIA if c.module == module]


def run_selftest(
    stream: TextIO,
    module: str | None = None,
    faults: Iterable[str] = (),
) -> int:
    """Print one line per criterion; 0 when all pass, 2 otherwise."""
    injected = frozenset(faults)
    unknown = sorted(injected - set(FAULTS))
    if unknown:
        raise ConfigValidationError(
            f"inject-fault must be one of [{', '.join(FAULTS)}], got: {unknown[0]}"
        )
    failures = 0
    for criterion in select(module):
        started = time.perf_counter()
        with LogContext(criterion=criterion.number):
            try:
                outcome = criterion.check(injected)
            except BilinpdoError as exc:
                outcome = Outcome(False, f"{type(exc).__name__}: {exc}")
        elapsed = time.perf_counter() - started
        verdict = "PASS" if outcome.passed else "FAIL"
        failures += not outcome.passed
        stream.write(
            f"{verdict} [{criterion.number:2d}] {criterion.module}/{criterion.name}: "
            f"{outcome.detail} ({elapsed:.1f}s)\n"
        )
        stream.flush()
    return 0 if failures == 0 else 2
