"""Exception hierarchy shared by the numerical packages."""

from __future__ import annotations

from typing import Any


class BilinpdoError(Exception):
    """Base class for every library error."""


class GridMismatchError(BilinpdoError, ValueError):
    """Raised when fields, grids or array shapes are structurally incompatible."""


class PreconditionError(BilinpdoError, ValueError):
    """Raised when a numerical precondition of an operation does not hold."""


class UnsupportedSymbolError(BilinpdoError, ValueError):
    """Raised for symbols outside the class an operation can evaluate."""


class DegenerateFitError(BilinpdoError, ValueError):
    """Raised when a slope fit has too few usable points."""


class ToleranceFailure(BilinpdoError):
    """Raised by acceptance checks when a measured quantity misses its tolerance."""

    def __init__(self, message: str, *, row: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.row = dict(row or {})
