"""Tests for T_sigma, the dual pairing, the block ledger and the ratio statistics."""

from __future__ import annotations

import csv

import numpy as np
import pytest

from bilinear import (
    DecompositionParams,
    Route,
    apply,
    decompose,
    direct_oracle,
    dual_pairing,
    probe_trend,
    random_band_limited,
    ratio_probe,
    shell_family,
    shell_indices,
    shell_norm,
    shell_scale,
)
from fields import Field, GridSpec, multiplier_apply
from partitions import RadialCutoff, make_lp
from symbols import (
    TruncationParams,
    Variant,
    bs_norm,
    separable_symbol,
    symbol_from_callable,
    x_independent_symbol,
    x_separable_symbol,
    zero_symbol,
)
from utils.errors import (
    GridMismatchError,
    PreconditionError,
    UnsupportedSymbolError,
)
from utils.summation import stable_sum

GRID = GridSpec(1, 8, 32)


def _ones(xi, eta):
    return np.ones(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))


def _joint_radius(xi, eta):
    return np.sqrt(np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1))


def _inputs(grid=GRID, seed=0, radius=None):
    rng = np.random.default_rng(seed)
    radius = 0.5 * grid.nyquist if radius is None else radius
    return (
        random_band_limited(grid, radius, rng),
        random_band_limited(grid, radius, rng),
        random_band_limited(grid, radius, rng),
    )


def _low_symbol():
    cutoff = RadialCutoff(1.0, 2.0)

    def tau(xi, eta):
        return cutoff.of_radius(_joint_radius(xi, eta)) * np.exp(1j * xi[..., 0])

    return x_independent_symbol(tau, 1, label="low", freq_support_radius=2.0)


def test_constant_symbol_gives_pointwise_product():
    """sigma = 1 collapses the double sum to f * g."""
    f, g, _ = _inputs()
    ones = x_independent_symbol(_ones, 1, label="one")
    out = apply(ones, f, g, truncate=True)
    assert out.meta["route"] == "convolution"
    assert out.meta["truncated"] is True
    np.testing.assert_allclose(out.samples, f.samples * g.samples, atol=1e-10)


def test_band_limit_needs_consent():
    """Symbols reaching past the Nyquist box need truncate=True."""
    f, g, _ = _inputs()
    ones = x_independent_symbol(_ones, 1, label="one")
    with pytest.raises(PreconditionError, match="Nyquist"):
        apply(ones, f, g)
    wide = x_independent_symbol(_ones, 1, freq_support_radius=10 * GRID.nyquist)
    with pytest.raises(PreconditionError, match="truncate=True"):
        apply(wide, f, g)


def test_separable_multiplier_rule():
    """m1(xi) m2(eta) acts as (m1(D) f)(m2(D) g) on every route."""
    f, g, _ = _inputs(seed=1)

    def m1(v):
        return np.exp(-np.sum(v**2, axis=-1) / 4.0)

    def m2(v):
        return np.cos(v[..., 0])

    expected = multiplier_apply(m1, f).samples * multiplier_apply(m2, g).samples
    fast = separable_symbol(None, m1, m2, 1)
    slow = x_independent_symbol(lambda xi, eta: m1(xi) * m2(eta), 1)
    fast_out = apply(fast, f, g, truncate=True)
    slow_out = apply(slow, f, g, truncate=True)
    assert fast_out.meta["route"] == "separable"
    scale = np.max(np.abs(expected))
    np.testing.assert_allclose(fast_out.samples, expected, atol=1e-10 * scale)
    np.testing.assert_allclose(slow_out.samples, expected, atol=1e-10 * scale)


def test_x_separable_symbol_multiplies_output():
    """a(x) tau(xi, eta) equals a(x) times the x-independent output."""
    f, g, _ = _inputs(seed=2)

    def a(x):
        return 1.0 + 0.5 * np.cos(x[..., 0])

    def tau(xi, eta):
        return np.exp(-(xi[..., 0] ** 2) / 8.0) * np.sin(eta[..., 0] + 0.3)

    plain = apply(x_independent_symbol(tau, 1), f, g, truncate=True)
    modulated = apply(x_separable_symbol(a, tau, 1), f, g, truncate=True)
    weight = a(GRID.coordinates())
    np.testing.assert_allclose(modulated.samples, weight * plain.samples, atol=1e-12)


def test_random_x_dependent_symbol_matches_triple_loop():
    """Chunked direct sums agree with the scalar (x, xi, eta) loop."""
    grid = GridSpec(1, 4, 16)
    rng = np.random.default_rng(7)
    c = rng.standard_normal(4)
    f, g, _ = _inputs(grid, seed=3)

    def sigma(x, xi, eta):
        x0, a, b = x[..., 0], xi[..., 0], eta[..., 0]
        return (c[0] + c[1] * np.cos(x0 + 0.2 * a) + c[2] * np.sin(x0 * b / 7.0)) * (
            np.exp(-(a**2 + b**2) / (30.0 + c[3] ** 2))
        )

    symbol = symbol_from_callable(sigma, 1, label="random")
    fast = apply(symbol, f, g, truncate=True)
    slow = direct_oracle(symbol, f, g)
    assert fast.meta["route"] == "direct"
    scale = max(np.max(np.abs(slow.samples)), 1.0)
    np.testing.assert_allclose(fast.samples, slow.samples, atol=1e-10 * scale)


def test_apply_is_bilinear():
    """T(a f1 + b f2, g) = a T(f1, g) + b T(f2, g) and likewise in g."""
    f1, f2, g = _inputs(seed=4)
    symbol = _low_symbol()
    a, b = 0.7 - 0.2j, -1.3 + 0.4j
    mixed = Field(GRID, a * f1.samples + b * f2.samples)
    lhs = apply(symbol, mixed, g).samples
    rhs = a * apply(symbol, f1, g).samples + b * apply(symbol, f2, g).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(rhs).max()))
    lhs = apply(symbol, g, mixed).samples
    rhs = a * apply(symbol, g, f1).samples + b * apply(symbol, g, f2).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(rhs).max()))


def test_grid_mismatch_is_rejected():
    f, _, _ = _inputs()
    other = random_band_limited(GridSpec(1, 8, 64), 2.0, np.random.default_rng(0))
    with pytest.raises(GridMismatchError, match="grid mismatch"):
        apply(_low_symbol(), f, other)


def test_dual_pairing_constant_symbol_and_trilinearity():
    """sigma = 1 pairs to int f g h; the pairing is linear in h."""
    f, g, h = _inputs(seed=5)
    ones = x_independent_symbol(_ones, 1)
    value = dual_pairing(ones, f, g, h, truncate=True)
    expected = stable_sum(f.samples * g.samples * h.samples) * GRID.cell
    assert value == pytest.approx(expected, rel=1e-10)

    symbol = _low_symbol()
    _, _, h2 = _inputs(seed=6)
    c = 2.5 - 1j
    combined = Field(GRID, h.samples + c * h2.samples)
    lhs = dual_pairing(symbol, f, g, combined)
    rhs = dual_pairing(symbol, f, g, h) + c * dual_pairing(symbol, f, g, h2)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_shell_scale_rounds_to_nearest_exponent():
    assert shell_scale(0, 0.5) == 0
    assert shell_scale(3, 0.5) == 2
    assert shell_scale(5, 0.0) == 0
    assert shell_scale(6, 0.25) == 2


def test_decompose_low_frequency_symbol_uses_only_i0():
    """A symbol inside |(xi, eta)| <= 2 lives in the low-frequency route."""
    f, g, h = _inputs(seed=8)
    ledger = decompose(_low_symbol(), f, g, h, rho=0.5)
    assert ledger.relative_error() <= 1e-8
    for route in (Route.I1, Route.I2, Route.I3):
        assert ledger.parts[route] == 0
    assert all(table.route is Route.I0 for table in ledger.tables)


@pytest.mark.parametrize("rho", [0.0, 0.5])
@pytest.mark.parametrize("j_low", [1, 8])
def test_decompose_shell_symbol_is_exact(rho, j_low):
    """The four routed parts reassemble the direct pairing for a shell multiplier."""
    grid = GridSpec(1, 8, 64)
    f, g, h = _inputs(grid, seed=9, radius=0.8 * grid.nyquist)
    symbol = shell_family(1, 3)
    params = DecompositionParams(j_low=j_low)
    ledger = decompose(symbol, f, g, h, rho=rho, params=params)
    assert abs(ledger.direct_value) > 0
    assert ledger.relative_error() <= 1e-8
    assert ledger.bookkeeping_error() <= 1e-10
    if j_low == 1:
        assert ledger.parts[Route.I0] == 0
        assert any(ledger.parts[r] != 0 for r in (Route.I1, Route.I2, Route.I3))
    assert ledger.scales == {j: shell_scale(j, rho) for j in ledger.scales}


def test_ledger_regrouping_and_audit(tmp_path):
    """Regrouping by j keeps the total; supports pass the audit; CSV has every block."""
    grid = GridSpec(1, 8, 64)
    f, g, h = _inputs(grid, seed=10, radius=0.8 * grid.nyquist)
    ledger = decompose(
        shell_family(1, 3), f, g, h, rho=0.0, params=DecompositionParams(j_low=1)
    )
    by_j = ledger.by_j()
    by_tag = ledger.block_sums()
    total_j = stable_sum(list(by_j.values()))
    total_tag = stable_sum(list(by_tag.values()))
    assert abs(total_j - total_tag) <= 1e-10 * abs(total_tag)
    assert set(by_j) <= set(ledger.scales)

    rows = ledger.audit_supports()
    assert rows
    assert all(row.passed for row in rows), [r for r in rows if not r.passed]
    assert {row.check for row in rows} >= {"nu1", "nu2", "output_shell"}

    blocks = ledger.block_values()
    path = ledger.to_csv(tmp_path / "ledger.csv")
    with path.open(encoding="utf-8") as handle:
        reader = list(csv.reader(handle))
    assert reader[0] == ["tag", "j", "k0", "k1", "k2", "nu1", "nu2", "re", "im"]
    assert len(reader) - 1 == len(blocks)
    assert {row[0] for row in reader[1:]} <= {"I1", "I2", "I3"}


def test_decompose_x_separable_symbol():
    """x-modulated shells route the x factor through the k0 blocks."""
    grid = GridSpec(1, 8, 64)
    f, g, h = _inputs(grid, seed=11, radius=0.8 * grid.nyquist)
    shell = shell_family(1, 2)
    bump = RadialCutoff(1.0, 3.0)
    symbol = x_separable_symbol(
        lambda x: bump.of_radius(np.abs(x[..., 0])),
        shell.freq_factor,
        1,
        freq_support_radius=shell.freq_support_radius,
        x_support_radius=3.0,
    )
    ledger = decompose(symbol, f, g, h, rho=0.0, params=DecompositionParams(j_low=1))
    assert ledger.relative_error() <= 1e-8
    assert ledger.bookkeeping_error() <= 1e-10
    assert any(table.k[0] > 0 for table in ledger.tables)


def test_decompose_rejects_unsupported_inputs():
    f, g, h = _inputs()
    with pytest.raises(PreconditionError, match="rho"):
        decompose(_low_symbol(), f, g, h, rho=1.0)
    with pytest.raises(UnsupportedSymbolError, match="not band-limited"):
        decompose(x_independent_symbol(_ones, 1), f, g, h, rho=0.0)
    general = symbol_from_callable(
        lambda x, xi, eta: np.cos(x[..., 0] * xi[..., 0]) + 0 * eta[..., 0],
        1,
        freq_support_radius=2.0,
    )
    with pytest.raises(UnsupportedSymbolError, match="x-independent or x-separable"):
        decompose(general, f, g, h, rho=0.0)
    with pytest.raises(PreconditionError, match="j_low"):
        DecompositionParams(j_low=0)


def test_ratio_probe_zero_symbol():
    """The zero symbol gives zero ratios for every target space."""
    for out_space in ("h1", "L2", "L1"):
        stats = ratio_probe(zero_symbol(1), out_space=out_space, trials=3, grid=GRID)
        assert stats.max == 0.0
        assert stats.median == 0.0


def test_ratio_probe_is_seeded_and_writes_csv(tmp_path):
    symbol = shell_family(1, 2)
    first = ratio_probe(symbol, out_space="L2", trials=4, seed=3, grid=GRID)
    second = ratio_probe(symbol, out_space="L2", trials=4, seed=3, grid=GRID)
    np.testing.assert_array_equal(first.ratios, second.ratios)
    assert np.all(first.ratios > 0)
    quantiles = first.quantiles()
    assert min(first.ratios) <= quantiles[0.1] <= quantiles[0.9] <= first.max
    summary = first.summary()
    assert summary["in"] == "L2xL2"
    assert summary["trials"] == 4

    path = first.to_csv(tmp_path / "probe.csv")
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["trial", "ratio"]
    assert len(rows) == 5


def test_ratio_probe_bmo_input_and_bad_spaces():
    stats = ratio_probe(
        shell_family(1, 1), ("L2", "bmo"), "L2", trials=2, seed=1, grid=GRID
    )
    assert np.all(np.isfinite(stats.ratios))
    with pytest.raises(PreconditionError, match="output space"):
        ratio_probe(zero_symbol(1), out_space="L3", trials=1, grid=GRID)
    with pytest.raises(PreconditionError, match="input space"):
        ratio_probe(zero_symbol(1), ("L2", "H1"), trials=1, grid=GRID)
    with pytest.raises(PreconditionError, match="trials"):
        ratio_probe(zero_symbol(1), trials=0, grid=GRID)


def test_ratio_statistics_record_truncation():
    """Shells past the Nyquist box are flagged once truncation is accepted."""
    inside = ratio_probe(shell_family(1, 1), trials=2, grid=GRID, truncate=True)
    outside = ratio_probe(shell_family(1, 3), trials=2, grid=GRID, truncate=True)
    assert not inside.truncated
    assert inside.summary()["truncation"] == "none"
    assert outside.truncated
    assert outside.summary()["truncation"] == "truncated"


@pytest.mark.parametrize("j", [0, 2, 4])
def test_shell_family_has_unit_class_norm(j):
    """Rescaled shells have norm 1 in BS^{m,*}(n/2 + 0.1, n/2, n/2)."""
    lp2n = make_lp(2, max(j, 1) + 1)
    symbol = shell_family(1, j, lp2n=lp2n)
    truncation = TruncationParams(j_range=(max(j - 1, 0), j + 1), dual_levels=0)
    report = bs_norm(
        symbol, -0.5, 0.0, shell_indices(1), Variant.STAR, truncation, lp2n=lp2n
    )
    assert report.value == pytest.approx(1.0, rel=1e-9)


def test_shell_norm_grows_like_the_class_weight():
    """``||Psi_j|| ~ 2^{-jm}`` with ``m = -(1 - rho) n / 2``."""
    for rho in (0.0, 0.5):
        norms = {
            j: shell_norm(1, j, rho, 0.6, make_lp(2, j + 1)) for j in range(3, 7)
        }
        assert probe_trend(norms).slope == pytest.approx((1.0 - rho) / 2.0, abs=0.1)


def test_shell_norm_ignores_s0_for_x_independent_shells():
    """Only ``k0 = 0`` blocks survive, so ``s0 = n/2`` gives the same scale."""
    lp2n = make_lp(2, 4)
    assert shell_indices(1, 0.5) == (0.5, 0.5, 0.5)
    assert shell_norm(1, 3, 0.0, 0.5, lp2n) == shell_norm(1, 3, 0.0, 0.6, lp2n)
    exact = shell_family(1, 3, lp2n=lp2n, s0=0.5)
    default = shell_family(1, 3, lp2n=lp2n)
    xi = np.array([[6.0], [9.0]])
    eta = np.array([[2.0], [-3.0]])
    np.testing.assert_allclose(
        exact.frequency_part(xi, eta), default.frequency_part(xi, eta)
    )


def test_ratio_probe_resamples_empty_bands():
    """A band without lattice frequencies cannot produce a nonzero input."""
    with pytest.raises(PreconditionError, match="nonzero norm"):
        ratio_probe(zero_symbol(1), trials=1, grid=GRID, f_radius=-1.0)


def test_probe_trend_slope():
    fit = probe_trend({0: 1.0, 1: 2.0, 2: 4.0, 3: 8.0})
    assert fit.slope == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        probe_trend({0: 1.0, 1: 0.0})
