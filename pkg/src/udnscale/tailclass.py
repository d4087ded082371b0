"""Tail classes of CCDFs at infinity."""

from __future__ import annotations

import math
from dataclasses import dataclass

REGULAR = "regularly_varying"
RAPID = "rapidly_varying"
LIGHTER = "lighter_than_rapid"


@dataclass(frozen=True)
class TailClass:
    """``regularly_varying`` carries a finite index rho >= 0 (CCDF ~ x^-rho L(x)).

    ``rapidly_varying`` is index -inf in the usual R_alpha notation (exponential,
    lognormal, Gamma). ``lighter_than_rapid`` means the CCDF is o(H) for some
    rapidly varying H, e.g. truncated or atomic laws.
    """

    kind: str
    index: float | None = None

    def __post_init__(self):
        if self.kind == REGULAR:
            if self.index is None or not (0.0 <= self.index < math.inf):
                raise ValueError(f"regular variation index must be finite and >= 0, got {self.index}")
        elif self.kind in (RAPID, LIGHTER):
            if self.index is not None:
                raise ValueError(f"{self.kind} carries no index")
        else:
            raise ValueError(f"unknown tail class {self.kind!r}")

    @classmethod
    def regular(cls, index: float) -> "TailClass":
        return cls(REGULAR, float(index))

    @property
    def is_regular(self) -> bool:
        return self.kind == REGULAR

    def __str__(self) -> str:
        if self.kind == REGULAR:
            return f"RegularlyVarying({self.index:g})"
        return {RAPID: "RapidlyVarying", LIGHTER: "LighterThanRapid"}[self.kind]


RAPIDLY_VARYING = TailClass(RAPID)
LIGHTER_THAN_RAPID = TailClass(LIGHTER)
