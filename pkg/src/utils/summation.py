"""Order-fixed compensated reductions."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


def stable_sum(values: np.ndarray | Iterable[complex]) -> complex:
    """Sum in C (lexicographic) order with exact-rounding ``math.fsum``."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    flat = arr.ravel(order="C")
    if np.iscomplexobj(flat):
        return complex(math.fsum(flat.real.tolist()), math.fsum(flat.imag.tolist()))
    return complex(math.fsum(flat.astype(float).tolist()), 0.0)


def stable_real_sum(values: np.ndarray | Iterable[float]) -> float:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    return math.fsum(np.real(arr).ravel(order="C").astype(float).tolist())


def stable_norm(values: np.ndarray, p: float, cell: float = 1.0) -> float:
    """Discrete ``(sum |v|^p * cell)^(1/p)``; ``p = inf`` is the max modulus."""
    magnitude = np.abs(np.asarray(values))
    if magnitude.size == 0:
        return 0.0
    if math.isinf(p):
        return float(magnitude.max())
    peak = float(magnitude.max())
    if peak == 0.0:
        return 0.0
    # Normalise by the peak so large p cannot overflow.
    total = stable_real_sum((magnitude / peak) ** p)
    return peak * (total * cell) ** (1.0 / p)
