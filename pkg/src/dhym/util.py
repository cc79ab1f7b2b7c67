"""Small shared helpers: worker count, float formatting, array validation."""

import math
import os

import numpy as np

from .errors import DomainError


def thread_count() -> int:
    """Worker cap for data-parallel sweeps; DHYM_THREADS overrides."""
    env = os.environ.get("DHYM_THREADS", "")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError(f"DHYM_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise DomainError("DHYM_THREADS must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


def fmt17(x: float) -> str:
    """17 significant digits: round-trips doubles bit-faithfully."""
    return format(float(x), ".17g")


def as_eigs(values, n: int | None = None) -> np.ndarray:
    """Validate an eigenvalue tuple: finite floats, length 3 or 4."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError("eigenvalue tuple must be one-dimensional")
    if n is not None and arr.size != n:
        raise DomainError(f"expected {n} eigenvalues, got {arr.size}")
    if arr.size not in (3, 4):
        raise DomainError(f"eigenvalue tuples have length 3 or 4, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("eigenvalues must be finite")
    return arr


def check_finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite")
    return x
