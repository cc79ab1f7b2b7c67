"""Algebraic and numerical machinery of dHYM solvability in complex
dimensions three and four: Upsilon-cone membership, sharp Positivstellensatz
bounds with brute-force oracles, continuity-path construction and
certification, solvability-region tests on intersection numbers, and a
continuity-method solver on flat complex tori.
"""

from ._kernels import BACKEND as kernel_backend
from .errors import (
    ComponentError,
    ConeExitError,
    DomainError,
    MathFailure,
    NonConvergenceError,
    RegionRefusedError,
    SearchFailureError,
    SingularConfigurationError,
)
from .phase import PhaseParams
from .pointwise import LevelSpec
from .symmetric import ConeSpec

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "PhaseParams",
    "LevelSpec",
    "ConeSpec",
    "DomainError",
    "MathFailure",
    "ComponentError",
    "ConeExitError",
    "NonConvergenceError",
    "RegionRefusedError",
    "SearchFailureError",
    "SingularConfigurationError",
    "__version__",
]
