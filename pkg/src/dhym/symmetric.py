"""Elementary symmetric polynomials, Upsilon/Gamma cone membership, the
Lagrangian phase operator, and the concrete nested cone chains of the two
level-set equations.

An Upsilon cone with arity i and coefficients (c_i, ..., c_0) is the open set
of n-tuples whose every i-element subset s satisfies sum_k c_k sigma_k(s) > 0.
Membership is decided by explicit subset enumeration (at most C(4,2) = 6
subsets for the dimensions supported here), and the returned margin is the
minimum of that expression over subsets, so callers choose their own strict
tolerance.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _kernels
from .branch import third_angle
from .errors import DomainError
from .phase import PhaseParams
from .util import as_eigs


def sigma_k(values, k: int) -> float:
    """k-th elementary symmetric polynomial; sigma_0 = 1 by convention."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1:
        raise DomainError("sigma_k expects a flat tuple of values")
    if not 0 <= k <= vals.size:
        raise DomainError(f"sigma index k={k} out of range for {vals.size} values")
    return float(_kernels.sigma_all(vals[None, :])[0, k])


@dataclass(frozen=True)
class ConeSpec:
    """Arity i and coefficients (c_i, ..., c_0), highest order first."""

    arity: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise DomainError("cone arity must be >= 1")
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != self.arity + 1:
            raise DomainError(
                f"cone with arity {self.arity} needs {self.arity + 1} coefficients, "
                f"got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    margin: float


def _subsets(n: int, arity: int) -> np.ndarray:
    return np.array(list(combinations(range(n), arity)), dtype=np.int64)


def upsilon_margin_batch(vals: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Margins for a batch of tuples; vals has shape (m, n)."""
    vals = np.ascontiguousarray(vals, dtype=float)
    n = vals.shape[1]
    if cone.arity > n:
        raise DomainError(f"cone arity {cone.arity} exceeds tuple length {n}")
    return _kernels.subset_margins(vals, _subsets(n, cone.arity), np.asarray(cone.coeffs))


def upsilon_membership(values, cone: ConeSpec, tol: float = 0.0) -> MembershipResult:
    """Strict membership with explicit margin; member iff margin > tol."""
    vals = as_eigs(values)
    margin = float(upsilon_margin_batch(vals[None, :], cone)[0])
    return MembershipResult(member=margin > tol, margin=margin)


def gamma_k_membership(values, k: int) -> bool:
    """k-positive cone: sigma_1 > 0, ..., sigma_k > 0."""
    vals = as_eigs(values)
    if not 1 <= k <= vals.size:
        raise DomainError(f"k={k} out of range for the {vals.size}-positive cones")
    sig = _kernels.sigma_all(vals[None, :])[0]
    return bool(np.all(sig[1 : k + 1] > 0.0))


def gamma_cones(n: int, k: int) -> list[ConeSpec]:
    """The k single-coefficient arity-n cones whose intersection is Gamma_k."""
    cones = []
    for j in range(1, k + 1):
        coeffs = [0.0] * (n + 1)
        coeffs[n - j] = 1.0  # highest order first: position n-j multiplies sigma_j
        cones.append(ConeSpec(arity=n, coeffs=tuple(coeffs)))
    return cones


def lagrangian_phase(values) -> float:
    """Sum of arctan of the eigenvalues, each branch in (-pi/2, pi/2)."""
    vals = as_eigs(values)
    return float(np.sum(np.arctan(vals)))


def lagrangian_phase_batch(vals: np.ndarray) -> np.ndarray:
    return np.sum(np.arctan(vals), axis=-1)


# ---------------------------------------------------------------------------
# Level-h admissibility and the concrete cone chains of the two equations.
# ---------------------------------------------------------------------------


def _unpack_coeffs(phase: PhaseParams, coeffs) -> tuple[float, ...]:
    coeffs = tuple(float(c) for c in coeffs)
    want = 2 if phase.n == 3 else 3
    if len(coeffs) != want:
        raise DomainError(f"n={phase.n} takes {want} path coefficients, got {len(coeffs)}")
    return coeffs


def level_theta(phase: PhaseParams, c1: float, c2: float, h: float) -> float:
    """One-third branch angle for the n=4 equation at level h."""
    if c2 <= 0.0:
        raise DomainError("c2 must be positive")
    return third_angle(-c1 * phase.cot * math.sqrt(h) / c2**1.5)


def validate_level(phase: PhaseParams, coeffs, h: float) -> None:
    """Admissible-level check: the h window that keeps the cone chain nested.

    n=3 requires 0 < h < c1^3 cot^2 / c0^2; n=4 additionally requires the
    level's branch-angle inequality c0*(3csc^2-4)*h + 24 c2^2 cos^2 cos(2.) > 0.
    """
    coeffs = _unpack_coeffs(phase, coeffs)
    if not h > 0.0:
        raise DomainError(f"level h must be positive, got {h}")
    if phase.n == 3:
        c1, c0 = coeffs
        if c1 <= 0.0:
            raise DomainError("c1 must be positive")
        if c0 != 0.0 and not h < c1**3 * phase.cot**2 / c0**2:
            raise DomainError(
                f"h={h} outside (0, c1^3*cot^2/c0^2) = (0, {c1**3 * phase.cot**2 / c0**2})"
            )
    else:
        c2, c1, c0 = coeffs
        if c2 <= 0.0:
            raise DomainError("c2 must be positive")
        if c1 != 0.0 and not h < c2**3 * phase.tan**2 / c1**2:
            raise DomainError(
                f"h={h} outside (0, c2^3*tan^2/c1^2) = (0, {c2**3 * phase.tan**2 / c1**2})"
            )
        th = level_theta(phase, c1, c2, h)
        gate = c0 * phase.kappa * h + 24.0 * c2**2 * math.cos(th) ** 2 * math.cos(2.0 * th)
        if not gate > 0.0:
            raise DomainError(f"level branch-angle inequality fails: {gate} <= 0")


def equation_cones(phase: PhaseParams, coeffs, h: float) -> list[list[ConeSpec]]:
    """Nested cones Upsilon_1 subset ... subset Upsilon_{n-1} at (coeffs, h).

    Each entry is the list of elementary cones whose intersection is that
    Upsilon level; dividing by h > 0 gives the subsolution normalization.
    """
    coeffs = _unpack_coeffs(phase, coeffs)
    positive = ConeSpec(1, (1.0, 0.0))
    if phase.n == 3:
        c1, _ = coeffs
        u1 = [ConeSpec(2, (h, 0.0, -c1)), positive]
        return [u1, [positive]]
    c2, c1, _ = coeffs
    u1 = [ConeSpec(3, (h, 0.0, -c2, 2.0 * c1 * phase.cot)), ConeSpec(2, (h, 0.0, -c2)), positive]
    u2 = [ConeSpec(2, (h, 0.0, -c2)), positive]
    return [u1, u2, [positive]]


@dataclass(frozen=True)
class ChainReport:
    """Per-level membership plus the no-gap consistency verdict."""

    levels: tuple[MembershipResult, ...]
    consistent: bool


def nested_cone_chain(values, phase: PhaseParams, coeffs, h: float) -> ChainReport:
    """Evaluate membership along the ascending cone chain at (coeffs, h).

    Raises on an invalid h; asserts no tuple is in a level but outside a
    later (larger) one.
    """
    vals = as_eigs(values, phase.n)
    validate_level(phase, coeffs, h)
    results = []
    for cone_list in equation_cones(phase, coeffs, h):
        margins = [upsilon_membership(vals, cone) for cone in cone_list]
        margin = min(m.margin for m in margins)
        results.append(MembershipResult(member=all(m.member for m in margins), margin=margin))
    consistent = True
    for earlier, later in zip(results, results[1:]):
        if earlier.member and not later.member:
            consistent = False
    return ChainReport(levels=tuple(results), consistent=consistent)
