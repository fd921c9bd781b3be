"""Three-way split of a dyadic shell of ``R^{2n}`` into frequency regimes.

For ``j >= 1`` every shell piece ``Psi_j(xi, eta)`` is rewritten as

    Psi_j phi'_j(xi) psi'_j(eta) + Psi_j psi'_j(xi) phi'_j(eta)
        + Psi_j psi''_j(xi) psi''_j(eta)

with ``f_j(z) = f(z / 2^j)`` and

    phi'(z)  = phi(2^6 z)
    psi'(z)  = phi(z / 2) (1 - phi(2^4 z))
    psi''(z) = phi(z / 2) (1 - phi(2^6 z)).

The identity is exact: on the support of ``Psi_j`` the products that would
spoil it vanish identically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from partitions.littlewood_paley import PartitionFamily
from partitions.profiles import RadialCutoff
from utils.errors import PreconditionError

LOGGER = logging.getLogger("bilinpdo.partitions")

LOW_SHIFT = 6
MID_SHIFT = 4
HIGH_SHIFT = 1


@dataclass(frozen=True)
class ShellSplit:
    """Low/high split functions on ``R^n`` derived from a ``2n``-dimensional family."""

    family: PartitionFamily

    @property
    def dim(self) -> int:
        return self.family.ambient_dim // 2

    @property
    def base(self) -> RadialCutoff:
        return self.family.base

    def _phi(self, radius: np.ndarray, exponent: float) -> np.ndarray:
        return self.base.of_radius(radius / 2.0**exponent)

    def phi_prime_radial(self, radius: np.ndarray, j: int = 0) -> np.ndarray:
        return self._phi(np.asarray(radius, dtype=float), j - LOW_SHIFT)

    def psi_prime_radial(self, radius: np.ndarray, j: int = 0) -> np.ndarray:
        r = np.asarray(radius, dtype=float)
        return self._phi(r, j + HIGH_SHIFT) * (1.0 - self._phi(r, j - MID_SHIFT))

    def psi_dprime_radial(self, radius: np.ndarray, j: int = 0) -> np.ndarray:
        r = np.asarray(radius, dtype=float)
        return self._phi(r, j + HIGH_SHIFT) * (1.0 - self._phi(r, j - LOW_SHIFT))

    def phi_prime(self, points: np.ndarray, j: int = 0) -> np.ndarray:
        return self.phi_prime_radial(np.linalg.norm(points, axis=-1), j)

    def psi_prime(self, points: np.ndarray, j: int = 0) -> np.ndarray:
        return self.psi_prime_radial(np.linalg.norm(points, axis=-1), j)

    def psi_dprime(self, points: np.ndarray, j: int = 0) -> np.ndarray:
        return self.psi_dprime_radial(np.linalg.norm(points, axis=-1), j)

    def support_radii(self) -> dict[str, tuple[float, float]]:
        """Radii bounding the supports at ``j = 0``."""
        inner, outer = self.base.plateau, self.base.support
        return {
            "phi_prime": (0.0, outer * 2.0**-LOW_SHIFT),
            "psi_prime": (inner * 2.0**-MID_SHIFT, outer * 2.0**HIGH_SHIFT),
            "psi_dprime": (inner * 2.0**-LOW_SHIFT, outer * 2.0**HIGH_SHIFT),
        }

    def terms(
        self, j: int, xi: np.ndarray, eta: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return the three products multiplied by ``Psi_j``."""
        if j < 1:
            raise PreconditionError(f"split requires j >= 1, got: {j}")
        rx = np.linalg.norm(xi, axis=-1)
        ry = np.linalg.norm(eta, axis=-1)
        shell = self.family.piece_radial(j, np.hypot(rx, ry))
        first = shell * self.phi_prime_radial(rx, j) * self.psi_prime_radial(ry, j)
        second = shell * self.psi_prime_radial(rx, j) * self.phi_prime_radial(ry, j)
        third = shell * self.psi_dprime_radial(rx, j) * self.psi_dprime_radial(ry, j)
        return first, second, third

    def residual(self, j: int, xi: np.ndarray, eta: np.ndarray) -> float:
        """Largest ``|Psi_j - sum of terms|`` over the sampled points."""
        rx = np.linalg.norm(xi, axis=-1)
        ry = np.linalg.norm(eta, axis=-1)
        shell = self.family.piece_radial(j, np.hypot(rx, ry))
        first, second, third = self.terms(j, xi, eta)
        return float(np.max(np.abs(shell - (first + second + third)), initial=0.0))


def make_shell_split(lp2n: PartitionFamily) -> ShellSplit:
    if lp2n.ambient_dim % 2:
        raise PreconditionError(
            f"split needs an even-dimensional family, got dim {lp2n.ambient_dim}"
        )
    if lp2n.base.support != 2.0 or lp2n.base.plateau < 1.0:
        raise PreconditionError(
            "split needs phi = 1 on |z| <= 1 and supp phi in |z| <= 2, got "
            f"plateau {lp2n.base.plateau}, support {lp2n.base.support}"
        )
    LOGGER.debug("Built split functions for n=%d", lp2n.ambient_dim // 2)
    return ShellSplit(lp2n)
