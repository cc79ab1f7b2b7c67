"""Exception hierarchy.

Two families, mirroring the CLI exit-code contract: ``DomainError`` for
malformed or out-of-hypothesis arguments (exit 2) and ``MathFailure`` for
mathematically meaningful refusals and breakdowns (exit 1).
"""


class DomainError(ValueError):
    """An argument violates a precondition or hypothesis."""


class MathFailure(RuntimeError):
    """A mathematically meaningful failure (not a usage error)."""


class SingularConfigurationError(MathFailure):
    """Eigenvalue solve hit the asymptote of the level set."""


class ComponentError(MathFailure):
    """No solution on the connected component reachable from the large diagonal."""


class ConeExitError(MathFailure):
    """An iterate left the admissible cone."""


class NonConvergenceError(MathFailure):
    """Damped Newton failed to converge."""


class RegionRefusedError(MathFailure):
    """Intersection numbers fail the solvability-region test."""


class SearchFailureError(MathFailure):
    """No passing value found within the search schedule."""
