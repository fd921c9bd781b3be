"""The lattice-sum symbol family that forces ``s_0 >= m + n``.

The symbol is
``phi(x) e^{-ix.(xi+eta)} sum_{k,l} (1+|k|+|l|)^{m-s0} e^{-i|k|^a1} e^{-i|l|^a2}
phi(xi-k) phi(eta-l)`` and the inputs have spectra
``sum_nu c_nu phi~(xi-nu)`` with the lattice-sum coefficients of
:mod:`sharpness.wainger`.  ``phi(. - k)`` meets only the ``nu = k`` term of
the input spectrum, so ``T(f, g) = C phi`` for one complex constant ``C``.

:func:`family_s0` samples ``sigma``, ``f^`` and ``g^`` and evaluates the
frequency double sum of ``T(f, g)`` at spatial nodes; :func:`closed_form_s0`
gives ``||C phi||_{L^r}`` from the lattice sum alone.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
from typing import Iterable

import numpy as np
from scipy import integrate

from partitions import RadialCutoff, bump
from sharpness.sweep import Family, SharpnessSweep, SweepRow, run_sweep
from sharpness.wainger import (
    check_cut,
    lattice_coefficients,
    lattice_mask,
    lattice_radii,
)
from symbols import Symbol, symbol_from_callable
from utils.errors import PreconditionError
from utils.summation import stable_norm, stable_real_sum, stable_sum

LOGGER = logging.getLogger("bilinpdo.sharpness")

ROW_CHUNK = 512
# midpoint nodes per axis on each supp phi(. - k) and on supp phi
CELL_NODES = 48
X_NODES = 65
# x nodes times f^ nodes times g^ nodes
EVAL_BUDGET = 1 << 30
# phi~ = 1 on [-1/4, 1/4]^n, supported in [-1/2, 1/2]^n
PLATEAU = RadialCutoff(0.25, 0.5)
PHI_HALF_WIDTH = 0.25


def phi(points: np.ndarray) -> np.ndarray:
    """Product bump supported in ``[-1/4, 1/4]^n``."""
    return np.prod(bump(4.0 * np.asarray(points, dtype=float)), axis=-1)


def phi_plateau(points: np.ndarray) -> np.ndarray:
    return np.prod(PLATEAU.of_radius(np.abs(np.asarray(points))), axis=-1)


@functools.lru_cache(maxsize=16)
def _profile_integral(power: float) -> float:
    value, _ = integrate.quad(
        lambda u: float(bump(4.0 * u)) ** power,
        -0.25,
        0.25,
        epsabs=1e-15,
        epsrel=1e-12,
        limit=200,
    )
    return value


def phi_lp_norm(r: float, dim: int) -> float:
    """Exact ``||phi||_{L^r}`` from the one-dimensional factor."""
    if math.isinf(r):
        return math.exp(-dim)
    return _profile_integral(r) ** (dim / r)


def _midpoints(count: int, half: float) -> np.ndarray:
    h = 2.0 * half / count
    return -half + h * (np.arange(count) + 0.5)


def _box_nodes(axis: np.ndarray, dim: int) -> np.ndarray:
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, dim)


def spatial_nodes(dim: int, count: int = X_NODES) -> tuple[np.ndarray, float]:
    """Midpoint nodes on ``[-1/4, 1/4]^n`` and their cell volume.

    ``count`` is odd so the origin, where ``|phi|`` peaks, is a node.
    """
    axis = _midpoints(count, PHI_HALF_WIDTH)
    return _box_nodes(axis, dim), (2.0 * PHI_HALF_WIDTH / count) ** dim


def frequency_nodes(
    k_cut: int, dim: int, count: int = CELL_NODES
) -> tuple[np.ndarray, float]:
    """Midpoint nodes on ``k + [-1/4, 1/4]^n`` for every ``k`` in ``[-K, K]^n``."""
    local = _midpoints(count, PHI_HALF_WIDTH)
    axis = (np.arange(-k_cut, k_cut + 1)[:, None] + local[None, :]).ravel()
    return _box_nodes(axis, dim), (2.0 * PHI_HALF_WIDTH / count) ** dim


def input_spectrum(coeffs: np.ndarray, k_cut: int, nodes: np.ndarray) -> np.ndarray:
    """``sum_nu c_nu phi~(xi - nu)`` at ``nodes``, all neighbouring ``nu`` included.

    ``coeffs`` is indexed by ``nu + K`` on ``[-K, K]^n``.
    """
    padded = np.pad(coeffs, 1)
    centre = np.rint(nodes).astype(np.int64)
    total = np.zeros(nodes.shape[0], dtype=complex)
    for offset in itertools.product((-1, 0, 1), repeat=nodes.shape[1]):
        nu = centre + np.asarray(offset)
        index = tuple((nu + k_cut + 1).T)
        total += padded[index] * phi_plateau(nodes - nu)
    return total


def s0_symbol(a1: float, a2: float, m: float, s0: float, dim: int = 1) -> Symbol:
    """The family symbol; each frequency meets the term of its nearest lattice point."""

    def sigma(x: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        k, l = np.rint(xi), np.rint(eta)
        rk = np.linalg.norm(k, axis=-1)
        rl = np.linalg.norm(l, axis=-1)
        left = np.exp(-1j * (rk**a1 + np.sum(x * xi, axis=-1))) * phi(xi - k)
        right = np.exp(-1j * (rl**a2 + np.sum(x * eta, axis=-1))) * phi(eta - l)
        return phi(x) * (1.0 + rk + rl) ** (m - s0) * left * right

    return symbol_from_callable(
        sigma,
        dim,
        label=f"s0-family(a1={a1:g}, a2={a2:g}, m={m:g}, s0={s0:g})",
        x_support_radius=PHI_HALF_WIDTH * math.sqrt(dim),
    )


def _check_budget(work: int) -> None:
    if work > EVAL_BUDGET:
        raise PreconditionError(
            f"the double sum needs {work} symbol samples, over the budget of "
            f"{EVAL_BUDGET}; use a larger t or dim=1"
        )


def evaluate_bilinear(
    symbol: Symbol,
    f_nodes: np.ndarray,
    f_hat: np.ndarray,
    g_nodes: np.ndarray,
    g_hat: np.ndarray,
    weight: float,
    x_nodes: np.ndarray,
) -> np.ndarray:
    """``(2 pi)^{-2n} sum_{xi,eta} e^{ix.(xi+eta)} sigma f^(xi) g^(eta) dxi deta``."""
    dim = symbol.dim
    _check_budget(x_nodes.shape[0] * f_nodes.shape[0] * g_nodes.shape[0])
    scale = weight**2 / (2.0 * math.pi) ** (2 * dim)
    values = np.zeros(x_nodes.shape[0], dtype=complex)
    for i, point in enumerate(x_nodes):
        left = np.exp(1j * (f_nodes @ point)) * f_hat
        right = np.exp(1j * (g_nodes @ point)) * g_hat
        partial = []
        for start in range(0, f_nodes.shape[0], ROW_CHUNK):
            rows = slice(start, start + ROW_CHUNK)
            block = symbol.evaluate(point, f_nodes[rows, None, :], g_nodes[None, :, :])
            partial.append(left[rows] @ (block @ right))
        values[i] = scale * stable_sum(partial)
    return values


def _radial_groups(
    radius: np.ndarray, values: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Distinct radii and the sum of ``values`` over each lattice sphere."""
    squared = np.rint(radius[mask] ** 2).astype(np.int64)
    unique, inverse = np.unique(squared, return_inverse=True)
    picked = values[mask]
    if np.iscomplexobj(picked):
        totals = np.bincount(inverse, picked.real) + 1j * np.bincount(
            inverse, picked.imag
        )
    else:
        totals = np.bincount(inverse, picked)
    return np.sqrt(unique.astype(float)), totals


def double_radial_sum(
    r1: np.ndarray,
    alpha: np.ndarray,
    r2: np.ndarray,
    beta: np.ndarray,
    exponent: float,
) -> complex:
    """``sum_{i,j} (1 + r1_i + r2_j)^exponent alpha_i beta_j`` in row chunks."""
    partial = []
    for start in range(0, r1.size, ROW_CHUNK):
        rows = slice(start, start + ROW_CHUNK)
        weight = (1.0 + r1[rows, None] + r2[None, :]) ** exponent
        partial.append(alpha[rows] @ (weight @ beta))
    return stable_sum(partial)


def lower_bound_sum(
    t: float, exponent: float, dim: int = 1, k_cut: int | None = None
) -> float:
    """``sum_{k != 0} e^{-2t|k|} (1 + |k|)^exponent``; decreasing in ``t``."""
    k_cut = check_cut(t, k_cut)
    radius = lattice_radii(k_cut, dim)
    mask = lattice_mask(radius, k_cut)
    r = radius[mask]
    return stable_real_sum(np.exp(-2.0 * t * r) * (1.0 + r) ** exponent)


def lattice_sum(
    b1: float, b2: float, m: float, s0: float, t: float, dim: int, k_cut: int
) -> float:
    """``sum_{k,l != 0} (1+|k|+|l|)^{m-s0} e^{-t|k|}|k|^{-b1} e^{-t|l|}|l|^{-b2}``."""
    radius = lattice_radii(k_cut, dim)
    mask = lattice_mask(radius, k_cut)
    safe = np.where(mask, radius, 1.0)
    f_mod = np.where(mask, np.exp(-t * radius) * safe ** (-b1), 0.0)
    g_mod = np.where(mask, np.exp(-t * radius) * safe ** (-b2), 0.0)
    r1, f_r = _radial_groups(radius, f_mod, mask)
    r2, g_r = _radial_groups(radius, g_mod, mask)
    return double_radial_sum(r1, f_r, r2, g_r, m - s0).real


def _check_chirps(a1: float, a2: float) -> None:
    for name, value in (("a1", a1), ("a2", a2)):
        if not 0 < value < 1:
            raise PreconditionError(f"{name} must lie in (0, 1), got: {value}")


def _s0_params(
    t: float,
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    m: float,
    s0: float,
    r: float,
    dim: int,
) -> dict[str, float]:
    return {
        "t": t,
        "a1": a1,
        "a2": a2,
        "b1": b1,
        "b2": b2,
        "m": m,
        "s0": s0,
        "r": r,
        "dim": dim,
    }


def _closed_norm(
    b1: float,
    b2: float,
    m: float,
    s0: float,
    t: float,
    r: float,
    dim: int,
    k_cut: int,
) -> tuple[float, float]:
    total = lattice_sum(b1, b2, m, s0, t, dim, k_cut)
    scale = (2.0 * math.pi) ** (-2 * dim) * _profile_integral(1.0) ** (2 * dim)
    return scale * total * phi_lp_norm(r, dim), total


def family_s0(
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    m: float,
    s0: float,
    t: float,
    r: float = 1.0,
    dim: int = 1,
    k_cut: int | None = None,
) -> SweepRow:
    """Sampled ``||T(f, g)||_{L^r}`` against its closed-form lattice sum.

    ``f^`` and ``g^`` are sampled from the full input spectra and ``sigma`` from
    :func:`s0_symbol`; the closed form assumes the supports are disjoint.  The
    double sum costs ``X_NODES^n (2K CELL_NODES)^{2n}`` symbol samples, so it is
    meant for ``dim=1`` and ``t >= 1/4``.
    """
    _check_chirps(a1, a2)
    k_cut = check_cut(t, k_cut)
    nodes, weight = frequency_nodes(k_cut, dim)
    x_nodes, x_cell = spatial_nodes(dim)
    _check_budget(x_nodes.shape[0] * nodes.shape[0] ** 2)
    f_hat = input_spectrum(lattice_coefficients(a1, b1, t, k_cut, dim), k_cut, nodes)
    g_hat = input_spectrum(lattice_coefficients(a2, b2, t, k_cut, dim), k_cut, nodes)
    f_keep, g_keep = f_hat != 0, g_hat != 0
    values = evaluate_bilinear(
        s0_symbol(a1, a2, m, s0, dim),
        nodes[f_keep],
        f_hat[f_keep],
        nodes[g_keep],
        g_hat[g_keep],
        weight,
        x_nodes,
    )
    lhs = stable_norm(values, r, x_cell)
    rhs, total = _closed_norm(b1, b2, m, s0, t, r, dim, k_cut)
    peak = values[x_nodes.shape[0] // 2]
    exponent = m - s0 - b1 - b2 + dim
    LOGGER.debug(
        "s0 family t=%g K=%d: sampled %.10e closed %.10e", t, k_cut, lhs, rhs
    )
    return SweepRow(
        Family.S0_FAMILY,
        _s0_params(t, a1, a2, b1, b2, m, s0, r, dim),
        lhs,
        rhs,
        {
            "k_cut": k_cut,
            "side": "sampled",
            "lattice_sum": total,
            "exponent": exponent,
            "lower_bound": lower_bound_sum(t, exponent, dim, k_cut),
            "phase": math.atan2(peak.imag, peak.real),
        },
    )


def closed_form_s0(
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    m: float,
    s0: float,
    t: float,
    r: float = 1.0,
    dim: int = 1,
    k_cut: int | None = None,
) -> SweepRow:
    """Closed-form ``||T(f, g)||_{L^r}`` against the same scale times the lower bound.

    Feasible down to ``t = 2^-10``; the ratio tracks how the off-diagonal
    lattice terms compare with ``sum_k e^{-2t|k|} (1+|k|)^{m-s0-b1-b2+n}``.
    """
    _check_chirps(a1, a2)
    k_cut = check_cut(t, k_cut)
    lhs, total = _closed_norm(b1, b2, m, s0, t, r, dim, k_cut)
    exponent = m - s0 - b1 - b2 + dim
    bound = lower_bound_sum(t, exponent, dim, k_cut)
    rhs = lhs / total * bound
    return SweepRow(
        Family.S0_FAMILY,
        _s0_params(t, a1, a2, b1, b2, m, s0, r, dim),
        lhs,
        rhs,
        {
            "k_cut": k_cut,
            "side": "closed",
            "lattice_sum": total,
            "exponent": exponent,
            "lower_bound": bound,
        },
    )


def s0_sweep(
    t_values: Iterable[float],
    *,
    a1: float,
    a2: float,
    b1: float,
    b2: float,
    m: float,
    s0: float,
    r: float = 1.0,
    dim: int = 1,
    sampled: bool = False,
) -> SharpnessSweep:
    """Rows of :func:`closed_form_s0`, or of :func:`family_s0` when ``sampled``."""
    points = [_s0_params(t, a1, a2, b1, b2, m, s0, r, dim) for t in t_values]
    row = family_s0 if sampled else closed_form_s0
    return run_sweep(Family.S0_FAMILY, "t", points, row)
