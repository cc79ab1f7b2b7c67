"""The arccos branch on (pi, 3pi/2] and the derived one-third angles.

Every trigonometric cubic-root computation in this package goes through this
branch: for x in [-1, 0] we return the angle A with cos A = x lying in
(pi, 3pi/2], i.e. 2*pi - acos(x).  Its derivative in x is +1/sqrt(1-x^2)
(opposite sign to the principal branch).
"""

import math

from .errors import DomainError

# inputs this far outside [-1, 0] are clamped; beyond it, rejected
CLAMP = 1e-12


def arccos_branch(x: float) -> float:
    """Angle in (pi, 3pi/2] whose cosine is x, for x in [-1, 0]."""
    x = float(x)
    if x < -1.0 - CLAMP or x > CLAMP:
        raise DomainError(f"arccos_branch needs x in [-1, 0], got {x}")
    x = min(0.0, max(-1.0, x))
    return 2.0 * math.pi - math.acos(x)


def third_angle(x: float) -> float:
    """arccos_branch(x)/3 - 2*pi/3, the angle entering all cubic roots."""
    return arccos_branch(x) / 3.0 - 2.0 * math.pi / 3.0


def third_angle_arr(x):
    """Vectorized third_angle with the same clamp semantics."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0 - CLAMP) or np.any(x > CLAMP):
        raise DomainError("third_angle_arr needs values in [-1, 0]")
    x = np.clip(x, -1.0, 0.0)
    return (2.0 * math.pi - np.arccos(x)) / 3.0 - 2.0 * math.pi / 3.0
