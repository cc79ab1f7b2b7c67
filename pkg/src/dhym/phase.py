"""Target-phase bookkeeping for the two supported complex dimensions.

The admissible window for the target angle is ((n-2)*pi/2, ((n-2)+2/n)*pi/2):
(pi/2, 5pi/6) for n = 3 and (pi, 5pi/4) for n = 4.  All trigonometric
constants that the level-set functions and path formulas reuse are cached on
construction.
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError


def admissible_interval(n: int) -> tuple[float, float]:
    if n not in (3, 4):
        raise DomainError(f"dimension must be 3 or 4, got {n}")
    lo = (n - 2) * math.pi / 2.0
    hi = ((n - 2) + 2.0 / n) * math.pi / 2.0
    return lo, hi


@dataclass(frozen=True)
class PhaseParams:
    """Dimension, target angle, and its cached trig constants."""

    n: int
    theta_hat: float
    sin: float = field(init=False)
    cos: float = field(init=False)
    tan: float = field(init=False)
    cot: float = field(init=False)
    sec: float = field(init=False)
    csc: float = field(init=False)

    def __post_init__(self):
        lo, hi = admissible_interval(self.n)
        th = float(self.theta_hat)
        if not (lo < th < hi):
            raise DomainError(
                f"theta_hat for n={self.n} must lie in ({lo:.12g}, {hi:.12g}), got {th}"
            )
        object.__setattr__(self, "theta_hat", th)
        object.__setattr__(self, "sin", math.sin(th))
        object.__setattr__(self, "cos", math.cos(th))
        object.__setattr__(self, "tan", math.tan(th))
        object.__setattr__(self, "cot", 1.0 / math.tan(th))
        object.__setattr__(self, "sec", 1.0 / math.cos(th))
        object.__setattr__(self, "csc", 1.0 / math.sin(th))

    @property
    def csc2(self) -> float:
        return self.csc * self.csc

    @property
    def sec2(self) -> float:
        return self.sec * self.sec

    @property
    def kappa(self) -> float:
        """3*csc^2 - 4, the constant-term weight of the n=4 equation."""
        return 3.0 * self.csc2 - 4.0

    @property
    def h_native(self) -> float:
        """Right-hand side of the undeformed equation: cos^2 (n=3), sin^2 (n=4)."""
        return self.cos * self.cos if self.n == 3 else self.sin * self.sin
