from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class StabilityParams:
    """Prandtl number, Biot number and Marangoni number (lambda)."""

    Pr: float
    Bi: float
    lam: float

    def __post_init__(self):
        if not (self.Pr > 0 and math.isfinite(self.Pr)):
            raise ValueError(f"Pr must be positive, got {self.Pr}")
        if not (self.Bi >= 0 and math.isfinite(self.Bi)):
            raise ValueError(f"Bi must be nonnegative, got {self.Bi}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"the Marangoni number must be positive, got {self.lam}")

    def with_lambda(self, lam: float) -> "StabilityParams":
        return replace(self, lam=lam)
