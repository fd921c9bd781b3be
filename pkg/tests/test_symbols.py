"""Tests for symbols, dyadic localisation and the symbol-class norms."""

from __future__ import annotations

import csv
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fields import GridSpec, forward_array, inverse_array
from partitions import RadialCutoff, delta_preset, make_lp
from spaces import ul2_array
from symbols import (
    TruncationParams,
    Variant,
    block_norm_rows,
    bs_norm,
    check_symbol,
    dagger_seminorm,
    dilation_check,
    export_blocks_csv,
    hormander_decay_check,
    lattice_symbol,
    localize,
    product_check,
    sample_joint,
    separable_symbol,
    symbol_from_callable,
    triple_block,
    x_independent_symbol,
    x_separable_symbol,
    zero_symbol,
)
from utils.errors import PreconditionError, UnsupportedSymbolError

LP2 = make_lp(2, 64)
LP1 = make_lp(1, 64)


def _ones(xi, eta):
    return np.ones(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))


def _joint_radius(xi, eta):
    return np.sqrt(np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1))


def _compact_tau(radius):
    cutoff = RadialCutoff(0.5 * radius, radius)

    def tau(xi, eta):
        wave = np.cos(xi[..., 0] - eta[..., 0])
        return cutoff.of_radius(_joint_radius(xi, eta)) * wave

    return tau


def _bump_1d(inner, outer):
    cutoff = RadialCutoff(inner, outer)
    return lambda v: cutoff.of_radius(np.abs(v[..., 0]))


def test_check_symbol_flags():
    """Support radius and x-independence are spot-checked."""
    good = x_independent_symbol(_compact_tau(2.0), 1, freq_support_radius=2.0)
    check_symbol(good)
    liar = x_independent_symbol(_ones, 1, freq_support_radius=1.0)
    with pytest.raises(UnsupportedSymbolError, match="does not vanish"):
        check_symbol(liar)
    varying = symbol_from_callable(
        lambda x, xi, eta: np.cos(x[..., 0]) + 0 * xi[..., 0] + 0 * eta[..., 0],
        1,
        x_independent=True,
    )
    with pytest.raises(UnsupportedSymbolError, match="varies in x"):
        check_symbol(varying)


def test_symbol_metadata_validation():
    """Dimensions, radii and periods are validated."""
    with pytest.raises(PreconditionError, match="dim"):
        x_independent_symbol(_ones, 3)
    with pytest.raises(PreconditionError, match="freq_support_radius"):
        x_independent_symbol(_ones, 1, freq_support_radius=-1.0)
    with pytest.raises(PreconditionError, match="x_period"):
        x_separable_symbol(lambda x: x[..., 0], _ones, 1, x_period=2.5)


def test_separable_symbol_evaluates_product():
    """``a(x) b(xi) c(eta)`` with and without the x factor."""
    sym = separable_symbol(
        lambda x: np.cos(x[..., 0]),
        lambda xi: np.exp(-xi[..., 0] ** 2),
        lambda eta: 1.0 + eta[..., 0] ** 2,
        1,
    )
    x, xi, eta = np.array([[0.3]]), np.array([[0.7]]), np.array([[-1.1]])
    expected = np.cos(0.3) * np.exp(-0.49) * (1 + 1.21)
    assert sym(x, xi, eta)[0] == pytest.approx(expected)
    assert sym.fully_separable
    flat = separable_symbol(None, lambda v: v[..., 0], lambda v: v[..., 0], 1)
    assert flat.x_independent
    assert flat(x, xi, eta)[0] == pytest.approx(0.7 * -1.1)


def test_lattice_symbol_reads_table():
    """Lattice symbols pick the nearest table entry and vanish off the box."""
    grid = GridSpec(1, 8, 16)
    table = np.zeros(grid.shape * 2)
    table[1, 15] = 2.5
    sym = lattice_symbol(table, grid)
    step = grid.frequency_step
    xi = np.array([[step]])
    eta = np.array([[-step]])
    assert sym(np.zeros((1, 1)), xi, eta)[0] == pytest.approx(2.5)
    assert sym(np.zeros((1, 1)), xi, -eta)[0] == 0
    assert sym(np.zeros((1, 1)), np.array([[100.0]]), eta)[0] == 0
    with pytest.raises(PreconditionError, match="shape"):
        lattice_symbol(np.zeros((4, 4)), grid)


def test_localize_constant_symbol_gives_shell_piece():
    """Localising ``sigma = 1`` at rho = 0 reproduces ``Psi_j``."""
    sym = x_independent_symbol(_ones, 1, label="one")
    loc = localize(sym, 2, 0.0, LP2)
    xi = loc.grid.xi.axis()
    eta = loc.grid.eta.axis()
    expected = LP2.piece_radial(2, np.hypot(xi[:, None], eta[None, :]))
    np.testing.assert_allclose(loc.dense(), expected, atol=1e-15)


def test_localize_with_narrow_partition_keeps_only_first_shell():
    """A symbol inside the plateau of the narrow family lives in ``j = 0`` only."""
    family = delta_preset(2, 64)
    cutoff = RadialCutoff(0.5, 1.0)
    sym = x_independent_symbol(
        lambda xi, eta: cutoff.of_radius(_joint_radius(xi, eta)),
        1,
        freq_support_radius=1.0,
    )
    first = localize(sym, 0, 0.5, family)
    xi = first.grid.xi.axis()
    expected = cutoff.of_radius(np.hypot(xi[:, None], xi[None, :]))
    np.testing.assert_allclose(first.dense(), expected, atol=1e-15)
    for j in (1, 2, 3):
        loc = localize(sym, j, 0.5, family)
        assert loc.is_zero
        assert loc.block_norm((0, 0, 0), LP1) == 0.0


def test_localized_shells_reassemble_symbol():
    """Summing ``sigma_j`` over j on a shared grid returns sigma."""
    tau = _compact_tau(3.0)
    sym = x_independent_symbol(tau, 1, freq_support_radius=3.0)
    grid = GridSpec(1, 16, 64)
    total = np.zeros(grid.shape * 2, dtype=complex)
    for j in range(5):
        loc = localize(sym, j, 0.0, LP2, grid)
        if not loc.is_zero:
            total += loc.dense()
    xi = grid.axis()
    expected = tau(xi[:, None, None], xi[None, :, None])
    np.testing.assert_allclose(total, expected, atol=1e-14)


def test_localize_preconditions():
    """Grid too small, bad rho, mismatched family and unsupported symbols."""
    sym = x_independent_symbol(_ones, 1)
    with pytest.raises(PreconditionError, match="too small"):
        localize(sym, 4, 0.0, LP2, GridSpec(1, 8, 16))
    with pytest.raises(PreconditionError, match="rho"):
        localize(sym, 1, 1.0, LP2)
    with pytest.raises(PreconditionError, match="2n"):
        localize(sym, 1, 0.0, LP1)
    unbounded = symbol_from_callable(lambda x, xi, eta: x[..., 0] * xi[..., 0], 1)
    with pytest.raises(UnsupportedSymbolError, match="x support radius"):
        localize(unbounded, 1, 0.0, LP2)
    periodic = x_separable_symbol(
        lambda x: np.cos(2 * np.pi * x[..., 0]), _ones, 1, x_period=1
    )
    with pytest.raises(UnsupportedSymbolError, match="rho = 0"):
        localize(periodic, 1, 0.5, LP2)
    assert localize(periodic, 1, 0.0, LP2).grid.x.extent == 2


def test_triple_block_x_independent_has_no_x_blocks():
    """x-independent symbols have zero blocks for ``k0 >= 1``."""
    sym = x_independent_symbol(_compact_tau(4.0), 1, freq_support_radius=4.0)
    loc = localize(sym, 1, 0.0, LP2)
    block = triple_block(loc, (1, 0, 0), LP1)
    assert block.block_norm_ul2 == 0.0
    assert block.block_norm_sup == 0.0
    assert not np.any(block.samples)
    assert triple_block(loc, (0, 1, 0), LP1).block_norm_ul2 > 0.0


def test_triple_blocks_telescope_to_localized_symbol():
    """The blocks up to the grid caps sum back to ``sigma_j``."""
    sym = x_separable_symbol(
        _bump_1d(2.0, 4.0),
        _compact_tau(4.0),
        1,
        freq_support_radius=4.0,
        x_support_radius=4.0,
    )
    loc = localize(sym, 1, 0.0, LP2)
    caps = loc.caps(LP1)
    total = np.zeros_like(loc.dense(), dtype=complex)
    for k in itertools.product(*(range(c + 1) for c in caps)):
        total += triple_block(loc, k, LP1).samples
    np.testing.assert_allclose(total, loc.dense(), atol=1e-10)


def _block_1d(values, grid, k):
    spectrum = forward_array(values, (0,), 1.0)
    piece = LP1.piece_radial(k, grid.frequency_radius())
    block = inverse_array(spectrum * piece, (0,), 1.0)
    return ul2_array(block, [grid.axis()], (0,), grid.cell)


def test_separable_block_norm_factorizes():
    """For ``a(x) b(xi) c(eta)`` the block norm is the product of 1-D block norms."""
    a = _bump_1d(1.0, 3.0)
    b = _bump_1d(0.2, 0.5)
    c = lambda v: _bump_1d(0.1, 0.5)(v) * np.cos(3 * v[..., 0])
    sym = separable_symbol(a, b, c, 1, x_support_radius=3.0)
    loc = localize(sym, 0, 0.0, LP2)
    grids = loc.grid
    a_vals = a(grids.x.coordinates())
    b_vals = b(grids.xi.coordinates())
    c_vals = c(grids.eta.coordinates())
    for k in [(0, 0, 0), (1, 0, 1), (0, 1, 2)]:
        expected = (
            _block_1d(a_vals, grids.x, k[0])
            * _block_1d(b_vals, grids.xi, k[1])
            * _block_1d(c_vals, grids.eta, k[2])
        )
        assert loc.block_norm(k, LP1) == pytest.approx(expected, rel=1e-10)


def test_localize_flat_shell_samples_each_slot_on_its_own_grid():
    """A separable symbol inside the ``Psi_0`` plateau keeps one factor per slot."""
    b = _bump_1d(0.01, 0.02)
    c = _bump_1d(0.5, 1.0)
    sym = separable_symbol(None, b, c, 1, freq_support_radius=1.01)
    narrow = delta_preset(2, 64)
    fine = GridSpec(1, 4, 2048)
    coarse = GridSpec(1, 4, 64)
    loc = localize(sym, 0, 0.0, narrow, xi_grid=fine, eta_grid=coarse)
    assert [factor.groups for factor in loc.factors] == [("xi",), ("eta",)]
    assert loc.grid.xi is fine
    assert loc.grid.eta is coarse
    b_vals = b(fine.coordinates())
    c_vals = c(coarse.coordinates())
    np.testing.assert_allclose(loc.dense(), np.multiply.outer(b_vals, c_vals))
    for k in [(0, 0, 0), (0, 3, 1), (0, 6, 0)]:
        expected = _block_1d(b_vals, fine, k[1]) * _block_1d(c_vals, coarse, k[2])
        assert loc.block_norm(k, LP1) == pytest.approx(expected, rel=1e-10)
    assert loc.block_norm((1, 0, 0), LP1) == 0.0


def test_localize_rejects_small_slot_grid():
    """Slot grids must still hold the rescaled shell."""
    sym = separable_symbol(
        None, _bump_1d(0.5, 1.0), _bump_1d(0.5, 1.0), 1, freq_support_radius=1.5
    )
    with pytest.raises(PreconditionError, match="too small"):
        localize(sym, 0, 0.0, LP2, xi_grid=GridSpec(1, 2, 64))


def test_bs_norm_of_zero_symbol_is_zero():
    """All three variants vanish on the zero symbol."""
    for variant in Variant:
        report = bs_norm(zero_symbol(1), 0.0, 0.0, (1.0, 0.5, 0.5), variant)
        assert report.value == 0.0
        assert report.params["variant"] == variant.value


def test_bs_norm_requires_bounded_j_range():
    """Symbols without a frequency radius need an explicit j_max."""
    sym = x_independent_symbol(_ones, 1)
    with pytest.raises(UnsupportedSymbolError, match="j_max"):
        bs_norm(sym, 0.0, 0.0, (0.0, 0.0, 0.0))
    with pytest.raises(PreconditionError, match="triple"):
        bs_norm(zero_symbol(1), 0.0, 0.0, (0.5, 0.5))


def _oracle_plain_norm(tau, grid, j_values, m, s):
    """Direct DFT matrices and unit-cube sums, no truncation."""
    x = grid.axis()
    freqs = grid.frequency_axis()
    forward = np.exp(-1j * np.outer(freqs, x))
    backward = forward.conj().T / grid.points
    radius = np.hypot(x[:, None], x[None, :])
    values = tau(x[:, None, None], x[None, :, None])
    pieces = grid.points // 2
    best = 0.0
    for j in j_values:
        sigma_j = values * LP2.piece_radial(j, radius)
        spectrum = forward @ sigma_j @ forward.T
        total = 0.0
        for k1, k2 in itertools.product(range(4), repeat=2):
            mult = np.outer(
                LP1.piece_radial(k1, np.abs(freqs)), LP1.piece_radial(k2, np.abs(freqs))
            )
            block = backward @ (spectrum * mult) @ backward.T
            masses = (np.abs(block) ** 2).reshape(pieces, 2, pieces, 2).sum(axis=(1, 3))
            norm = np.sqrt(masses.max() * grid.cell)
            total += 2.0 ** (-j * m + k1 * s[1] + k2 * s[2]) * norm
        best = max(best, total)
    return best


def test_bs_norm_matches_direct_summation_oracle():
    """Plain norm on a 16-point grid equals an independent direct computation."""
    grid = GridSpec(1, 8, 16)
    tau = _compact_tau(3.0)
    sym = x_independent_symbol(tau, 1, freq_support_radius=3.0)
    m, s = -0.5, (0.3, 0.6, 0.4)
    truncation = TruncationParams(j_range=(0, 2), frequency_grid=grid)
    report = bs_norm(sym, m, 0.0, s, Variant.PLAIN, truncation)
    expected = _oracle_plain_norm(tau, grid, range(3), m, s)
    assert report.value == pytest.approx(expected, rel=1e-10)
    assert report.params["j_range"] == (0, 2)
    assert report.params["k_stop"] == 3
    assert not report.params["quiet_stop"]


def _x_dependent_symbol():
    return x_separable_symbol(
        _bump_1d(2.0, 5.0),
        _compact_tau(3.0),
        1,
        label="bump",
        freq_support_radius=3.0,
        x_support_radius=5.0,
    )


def test_plain_norm_is_bounded_by_star_norm():
    """``sup_j sum_k <= sum_{k0} sup_j sum_{k1,k2}``."""
    sym = _x_dependent_symbol()
    s = (0.5, 0.5, 0.5)
    plain = bs_norm(sym, 0.0, 0.0, s, Variant.PLAIN).value
    star = bs_norm(sym, 0.0, 0.0, s, Variant.STAR).value
    dagger = bs_norm(sym, 0.0, 0.0, s, Variant.DAGGER).value
    assert 0.0 < plain <= star * (1.0 + 1e-8)
    assert dagger > 0.0


@given(st.floats(min_value=0.1, max_value=10.0), st.sampled_from(list(Variant)))
@settings(max_examples=5, deadline=None)
def test_bs_norm_is_absolutely_homogeneous(scale, variant):
    """Scaling the symbol by ``c`` scales every variant by ``|c|``."""
    sym = x_independent_symbol(_compact_tau(3.0), 1, freq_support_radius=3.0)
    base = bs_norm(sym, 0.0, 0.0, (0.0, 0.5, 0.5), variant).value
    scaled = bs_norm(sym.scaled(-1j * scale), 0.0, 0.0, (0.0, 0.5, 0.5), variant).value
    assert scaled == pytest.approx(scale * base, rel=1e-9)


def test_export_blocks_csv(tmp_path):
    """Block norms are written one row per ``(j, k)``."""
    sym = x_independent_symbol(_compact_tau(3.0), 1, freq_support_radius=3.0)
    truncation = TruncationParams(j_range=(0, 1), frequency_grid=GridSpec(1, 8, 16))
    path = export_blocks_csv(sym, 0.0, tmp_path / "blocks.csv", truncation)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["j", "k0", "k1", "k2", "ul2_norm"]
    expected = block_norm_rows(sym, 0.0, truncation)
    assert len(rows) - 1 == len(expected) == 2 * 16
    assert float(rows[1][4]) == pytest.approx(expected[0][4])


def _hormander_symbol(m):
    plateau = RadialCutoff(2.0, 6.0)

    def tau(xi, eta):
        return (1.0 + np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1)) ** (m / 2)

    return x_separable_symbol(
        lambda x: plateau.of_radius(np.abs(x[..., 0])),
        tau,
        1,
        label=f"hormander(m={m})",
        x_support_radius=6.0,
    )


def test_hormander_decay_signature():
    """j-slope near m and fast decay along every k axis."""
    report = hormander_decay_check(
        _hormander_symbol(-0.5), -0.5, 0.5, (2, 2, 2), j_values=range(4, 9)
    )
    assert report.j_slope == pytest.approx(-0.5, abs=0.15)
    assert report.k_slopes_ok()
    assert report.passed


def test_hormander_decay_slope_ignores_constant_factor():
    """Scaling the symbol moves the intercept, not the slope."""
    sym = _hormander_symbol(-0.5)
    kwargs = {"j_values": range(2, 6), "k_dual_levels": 4}
    base = hormander_decay_check(sym, -0.5, 0.5, **kwargs)
    scaled = hormander_decay_check(sym.scaled(2.0**-3), -0.5, 0.5, **kwargs)
    assert scaled.j_slope == pytest.approx(base.j_slope, abs=1e-9)
    assert scaled.j_fit.intercept == pytest.approx(base.j_fit.intercept - 3.0, abs=1e-9)


def test_hormander_decay_reports_missing_x_blocks():
    """x-independent symbols have nothing to fit along ``k0``."""
    sym = x_independent_symbol(
        lambda xi, eta: (1.0 + np.sum(xi**2 + eta**2, axis=-1)) ** -0.25, 1
    )
    report = hormander_decay_check(
        sym, -0.5, 0.5, j_values=range(2, 6), k_dual_levels=4
    )
    assert report.k_slopes[0] is None
    assert report.notes["k0"] == "all-zero blocks"


def _gaussian(xi, eta):
    return np.exp(-0.5 * (xi[..., 0] ** 2 + eta[..., 0] ** 2))


def _modulated(xi, eta):
    return np.cos(xi[..., 0] + 0.5 * eta[..., 0]) * np.exp(
        -0.25 * (xi[..., 0] ** 2 + eta[..., 0] ** 2)
    )


def test_dagger_seminorm_of_gaussian_is_order_one():
    """A Gaussian is dominated by its lowest block."""
    grid = GridSpec(1, 16, 128)
    value = dagger_seminorm(sample_joint(_gaussian, grid), grid, (0.5, 0.5))
    assert 0.5 < value < 2.0


def test_dagger_product_inequality():
    """``N(f1 f2) <= C N(f1) N(f2)`` on smooth samples."""
    grid = GridSpec(1, 16, 128)
    pairs = [(_gaussian, _gaussian), (_gaussian, _modulated), (_modulated, _modulated)]
    for f1, f2 in pairs:

        check = product_check(f1, f2, grid)
        assert check.passed
        assert check.lhs > 0.0


@pytest.mark.parametrize("lam", list(itertools.product((0.5, 1.0, 2.0, 4.0), repeat=2)))
def test_dagger_dilation_inequality(lam):
    """Dilations cost at most ``max(1, l1^s1) max(1, l2^s2)``."""
    grid = GridSpec(1, 32, 256)
    for f in (_gaussian, _modulated):
        check = dilation_check(f, grid, lam)
        assert check.passed, check
