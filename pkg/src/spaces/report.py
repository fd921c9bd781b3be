"""Tagged norm values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from utils.errors import PreconditionError


class SpaceTag(str, Enum):
    LP = "Lp"
    L2UL = "L2ul"
    BESOV = "Besov"
    SOBOLEV = "Hs"
    H1 = "h1"
    BMO_LOCAL = "bmo"
    BMO = "BMO"
    SQUARE = "square"
    SYMBOL = "BS"


@dataclass(frozen=True)
class NormReport:
    """A norm value with the parameters that produced it."""

    value: float
    space_tag: SpaceTag
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        value = float(self.value)
        if math.isnan(value) or value < 0:
            raise PreconditionError(
                f"{self.space_tag.value} norm must be nonnegative, got: {value}"
            )
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "params", dict(self.params))

    def __float__(self) -> float:
        return self.value

    def as_row(self) -> dict[str, Any]:
        return {"space": self.space_tag.value, "value": self.value, **self.params}
