"""Tests for function-space norms and the auxiliary operators."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fields import Field, GridSpec, Space, convolve, idft
from partitions import RadialCutoff, bump, make_lp
from spaces import (
    NormReport,
    SpaceTag,
    besov_norm,
    bmo_multiplier_bound,
    bmo_norms,
    h1_norm,
    lp_norm,
    smoothing_S,
    smoothing_kernel,
    sobolev_norm,
    square_function,
    ul2_norm,
)
from utils.errors import PreconditionError
from utils.slopes import fit_line, fit_loglog


def _gaussian(grid, width=1.0):
    return grid.sample(lambda x: np.exp(-np.sum(x**2, axis=-1) / (2 * width**2)))


def _band_limited(grid, radius, seed):
    rng = np.random.default_rng(seed)
    spectrum = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spectrum *= grid.frequency_radius() <= radius
    return idft(Field(grid, spectrum, space=Space.FREQUENCY))


def test_norm_report_rejects_negative_values():
    """Reports hold nonnegative values."""
    with pytest.raises(PreconditionError, match="nonnegative"):
        NormReport(-1.0, SpaceTag.LP)
    assert float(NormReport(2.0, SpaceTag.LP, {"p": 2})) == 2.0


def test_lp_norm_examples():
    """Constants, Gaussians and a scalar-loop oracle."""
    grid = GridSpec(1, 8, 64)
    ones = grid.sample(lambda x: np.ones(x.shape[:-1]))
    assert lp_norm(ones, 2).value == pytest.approx(np.sqrt(8))
    wide = GridSpec(1, 32, 512)
    assert lp_norm(_gaussian(wide), 2).value == pytest.approx(np.pi**0.25, rel=1e-10)
    rng = np.random.default_rng(1)
    f = Field(grid, rng.standard_normal(64))
    direct = sum(abs(v) ** 4 * grid.spacing for v in f.samples) ** 0.25
    assert lp_norm(f, 4).value == pytest.approx(direct, rel=1e-12)
    assert lp_norm(f, np.inf).value == pytest.approx(np.max(np.abs(f.samples)))
    with pytest.raises(PreconditionError, match="p must lie"):
        lp_norm(f, 0.5)


def test_ul2_norm_examples():
    """Unit-cube L^2 masses for constants, one-cube bumps and periodic fields."""
    grid = GridSpec(1, 8, 64)
    ones = grid.sample(lambda x: np.ones(x.shape[:-1]))
    assert ul2_norm(ones).value == pytest.approx(1.0)
    single = grid.sample(lambda x: bump(4.0 * (x[..., 0] - 1.5)))
    assert ul2_norm(single).value == pytest.approx(lp_norm(single, 2).value, rel=1e-12)
    periodic = grid.sample(lambda x: np.cos(2 * np.pi * x[..., 0]) + 2.0)
    one_cell = np.sqrt(np.sum(np.abs(periodic.samples[:8]) ** 2) * grid.spacing)
    assert ul2_norm(periodic).value == pytest.approx(one_cell, rel=1e-12)
    plane = GridSpec(2, 4, 16)
    flat = plane.sample(lambda x: np.ones(x.shape[:-1]))
    assert ul2_norm(flat).value == pytest.approx(1.0)


def test_besov_single_block_and_oracle():
    """A field in one annulus picks up 2^{k s}; random fields match a direct sum."""
    grid = GridSpec(1, 32, 256)
    narrow = make_lp(1, 5, profile_sharpness=4.0)
    k0 = 2
    spectrum = RadialCutoff(0.5, 1.0)(grid.frequencies() - 5.5)
    f = idft(Field(grid, spectrum, space=Space.FREQUENCY))
    # psi_2 == 1 on 4 <= |xi| <= 7, which holds the spectrum.
    value = besov_norm(f, 1.5, 2, 2, narrow).value
    assert value == pytest.approx(2.0 ** (k0 * 1.5) * lp_norm(f, 2).value, rel=1e-10)

    lp = make_lp(1, 5)
    g = _band_limited(grid, 20.0, 3)
    radius = grid.frequency_radius()
    phi = RadialCutoff()
    spectrum = np.fft.fft(np.fft.ifftshift(g.samples)) * grid.spacing
    total = 0.0
    for k in range(6):
        weight = phi.of_radius(radius / 2**k)
        if k:
            weight = weight - phi.of_radius(radius / 2 ** (k - 1))
        block = np.fft.fftshift(np.fft.ifft(spectrum * weight)) / grid.spacing
        mass = np.sum(np.abs(block) ** 2) * grid.spacing
        total += 2.0**k * mass
    expected = np.sqrt(total)
    assert besov_norm(g, 0.5, 2, 2, lp).value == pytest.approx(expected, rel=1e-10)


def test_besov_requires_nyquist_cover():
    """Families too short for the frequency box are rejected."""
    grid = GridSpec(1, 8, 256)
    with pytest.raises(PreconditionError, match="Nyquist"):
        besov_norm(grid.delta(), 0.0, 2, 2, make_lp(1, 3))


def test_besov_dilation_and_sobolev_equivalence():
    """Dilations obey lambda^{-n/p} max(1, lambda^s) and B^s_{2,2} tracks H^s."""
    grid = GridSpec(1, 64, 4096)
    lp = make_lp(1, 8)
    s, p = 1.0, 2.0
    base = besov_norm(_gaussian(grid), s, p, 2, lp).value
    ratios = []
    for lam in (1, 2, 4, 8):
        dilated = grid.sample(lambda x: np.exp(-((lam * x[..., 0]) ** 2) / 2))
        value = besov_norm(dilated, s, p, 2, lp).value
        ratios.append(value / (lam ** (-1 / p) * max(1.0, lam**s) * base))
        equivalence = value / sobolev_norm(dilated, s).value
        assert 0.2 <= equivalence <= 5.0
    assert max(ratios) / min(ratios) <= 8.0


def test_besov_monotone_in_s():
    """Raising s never lowers the norm."""
    grid = GridSpec(1, 16, 256)
    f = _band_limited(grid, 30.0, 8)
    lp = make_lp(1, 7)
    values = [besov_norm(f, s, 2, 1, lp).value for s in (-1.0, 0.0, 0.5, 2.0)]
    assert values == sorted(values)


@settings(max_examples=10, deadline=None)
@given(alpha=st.floats(min_value=-50, max_value=50).filter(lambda a: abs(a) > 1e-3))
def test_norms_are_homogeneous(alpha):
    """norm(alpha f) = |alpha| norm(f)."""
    grid = GridSpec(1, 8, 128)
    f = _band_limited(grid, 20.0, 5)
    scaled = alpha * f
    lp = make_lp(1, 7)
    for norm in (
        lambda g: lp_norm(g, 3).value,
        lambda g: ul2_norm(g).value,
        lambda g: besov_norm(g, 0.5, 2, 2, lp).value,
        lambda g: bmo_norms(g)[1].value,
        lambda g: h1_norm(g, 2).value,
    ):
        assert norm(scaled) == pytest.approx(abs(alpha) * norm(f), rel=1e-12)


def test_h1_norm_examples():
    """Positive bumps dominate their L^1 norm; cancelling pairs shrink; zero is zero."""
    grid = GridSpec(1, 8, 1024)
    positive = grid.sample(lambda x: bump(x[..., 0] / 0.1))
    assert h1_norm(positive).value >= 0.999 * lp_norm(positive, 1).value
    assert h1_norm(grid.zeros()).value == 0.0

    def pair(separation):
        return grid.sample(
            lambda x: bump((x[..., 0] - separation) / 0.1)
            - bump((x[..., 0] + separation) / 0.1)
        )

    far, near = pair(1.0), pair(13 / 128)
    assert lp_norm(far, 1).value == pytest.approx(lp_norm(near, 1).value, rel=1e-12)
    assert h1_norm(near).value <= h1_norm(far).value
    with pytest.raises(PreconditionError, match="t_levels"):
        h1_norm(positive, 0)


def _brute_force_bmo(values):
    n = values.size
    best = 0.0
    for side in range(2, n + 1):
        windows = np.stack([np.roll(values, -start)[:side] for start in range(n)])
        mean = windows.mean(axis=1, keepdims=True)
        best = max(best, float(np.abs(windows - mean).mean(axis=1).max()))
    return best


def test_bmo_constants_and_sawtooth():
    """Constants have BMO 0 and bmo |c|; a sawtooth matches exhaustive cubes."""
    grid = GridSpec(1, 8, 64)
    local, homogeneous = bmo_norms(grid.sample(lambda x: np.full(x.shape[:-1], -3.0)))
    assert homogeneous.value == pytest.approx(0.0, abs=1e-14)
    assert local.value == pytest.approx(3.0)
    saw = grid.sample(lambda x: x[..., 0] - np.floor(x[..., 0]) - 0.5)
    local, homogeneous = bmo_norms(saw)
    assert homogeneous.value == pytest.approx(7 / 16)
    assert homogeneous.value == pytest.approx(_brute_force_bmo(saw.samples.real))
    assert local.value == pytest.approx(7 / 16 + 1 / 4)


def test_bmo_scaling_invariance_and_embedding():
    """BMO is dilation invariant and bounded by twice bmo."""
    grid = GridSpec(1, 16, 512)

    def profile(lam):
        return grid.sample(
            lambda x: np.cos(2 * np.pi * lam * x[..., 0] / 4)
            + 0.5 * np.sin(2 * np.pi * lam * x[..., 0] / 2)
        )

    reference = bmo_norms(profile(1.0))[1].value
    for lam in (0.5, 2.0):
        local, homogeneous = bmo_norms(profile(lam))
        assert homogeneous.value == pytest.approx(reference, rel=0.05)
        assert homogeneous.value <= 2 * local.value


def test_l2ul_embedding():
    """||f||_{L2ul} <= ||f||_{L2}."""
    grid = GridSpec(2, 8, 32)
    f = _band_limited(grid, 5.0, 12)
    assert ul2_norm(f).value <= lp_norm(f, 2).value


def test_smoothing_operator_properties():
    """S commutes with convolution, compares locally and maps 1 to the kernel mass."""
    grid = GridSpec(1, 32, 256)
    rng = np.random.default_rng(6)
    inside = np.abs(grid.axis()) < 4.0
    f = Field(grid, rng.random(256) * inside)
    g = Field(grid, rng.random(256) * inside)
    lhs = smoothing_S(convolve(f, g)).samples
    rhs = convolve(smoothing_S(f), g).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(rhs))

    values = smoothing_S(f).samples.real
    step = int(1.0 / grid.spacing)
    central = np.flatnonzero(inside)[: -step]
    ratios = values[central] / values[central + step]
    assert ratios.max() <= 4.0 and ratios.min() >= 0.25

    ones = smoothing_S(grid.sample(lambda x: np.ones(x.shape[:-1])))
    mass = np.sum(smoothing_kernel(f).samples.real) * grid.spacing
    assert np.allclose(ones.samples, mass, rtol=1e-12)
    assert ones.meta["tail_mass"] == pytest.approx(2.0 / 17.0)


def test_square_function_single_cell_and_restricted():
    """One window cell gives ||f||; constants vanish in the restricted variant."""
    grid = GridSpec(1, 16, 128)
    window = RadialCutoff(0.2, 0.45)
    spectrum = RadialCutoff(0.1, 0.2)(grid.frequencies() - 3.0)
    f = idft(Field(grid, spectrum, space=Space.FREQUENCY))
    for p in (2.0, np.inf):
        report = square_function(f, 1.0, window, p=p)
        assert report.params["terms"] == 1
        assert report.value == pytest.approx(lp_norm(f, p).value, rel=1e-10)
    constant = grid.sample(lambda x: np.ones(x.shape[:-1]))
    restricted = square_function(constant, 2.0, restrict_to_zero_of_window=True)
    assert restricted.value == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(PreconditionError, match="R must be"):
        square_function(f, 0.5)


def test_square_function_scaling_law():
    """The square function grows like R^{n/2}."""
    grid = GridSpec(1, 64, 256)
    f = _gaussian(grid, width=4.0)
    radii = [1.0, 2.0, 4.0, 8.0]
    for p in (2.0, 4.0, np.inf):
        norm = lp_norm(f, p).value
        values = [square_function(f, R, p=p).value for R in radii]
        raw = fit_loglog(radii, [v / norm for v in values])
        assert raw.slope == pytest.approx(0.5, abs=0.2)
        flat = fit_loglog(radii, [v / (R**0.5 * norm) for v, R in zip(values, radii)])
        assert abs(flat.slope) <= 0.2


def test_bmo_multiplier_bound():
    """Constants give 1/(1+a) and 0; lacunary sums stay bounded; psi(0) must vanish."""

    phi = RadialCutoff()

    def psi(xi):
        return phi(xi) - phi(2 * xi)

    grid = GridSpec(1, 8, 256)
    constant = grid.sample(lambda x: np.full(x.shape[:-1], 2.0))
    rows = bmo_multiplier_bound(constant, [0, 1, 3], phi, psi)
    for row in rows:
        assert row.phi_ratio == pytest.approx(1 / (1 + row.a))
        assert row.psi_ratio == 0.0

    wide = GridSpec(1, 8, 8192)
    lacunary = wide.sample(
        lambda x: sum(np.cos(np.pi * 2.0 ** (k - 2) * x[..., 0]) for k in range(1, 13))
    )
    levels = list(range(11))
    rows = bmo_multiplier_bound(lacunary, levels, phi, psi)
    assert fit_line(levels, [r.phi_ratio for r in rows]).slope <= 0.05
    assert fit_line(levels, [r.psi_ratio for r in rows]).slope <= 0.05
    assert max(r.psi_ratio for r in rows) < 10.0
    with pytest.raises(PreconditionError, match="vanish at the origin"):
        bmo_multiplier_bound(constant, [0], phi, phi)
