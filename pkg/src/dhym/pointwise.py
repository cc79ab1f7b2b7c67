"""Pointwise level-set functions of the deformed equations, their closed-form
derivatives, eigenvalue solves, substitution maps, and the ellipticity and
convexity monitors.

For n = 3 the level function is (c1*s1 + 2*c0*tan)/s3 and for n = 4 it is
(c2*s2 - 2*c1*cot*s1 + c0*(3csc^2-4))/s4, with s_k the elementary symmetric
polynomials.  Both numerators share one structural form evaluated on
shrinking eigenvalue subsets, which is what the gradient and Hessian formulas
below exploit.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ComponentError, DomainError, SingularConfigurationError
from .phase import PhaseParams
from .symmetric import (
    ConeSpec,
    MembershipResult,
    upsilon_margin_batch,
    validate_level,
)
from .util import as_eigs


@dataclass(frozen=True)
class LevelSpec:
    """Path position t, level h, and the coefficients frozen at t."""

    h: float
    coeffs: tuple[float, ...]
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.h > 0.0:
            raise DomainError(f"level h must be positive, got {self.h}")


def native_level(phase: PhaseParams, t: float = 1.0, coeffs=None) -> LevelSpec:
    """LevelSpec at the equation's own right-hand side with unit coefficients."""
    if coeffs is None:
        coeffs = (1.0, 1.0) if phase.n == 3 else (1.0, 1.0, 1.0)
    return LevelSpec(h=phase.h_native, coeffs=tuple(coeffs), t=t)


# ---------------------------------------------------------------------------
# Coefficient expansion and the substitution maps.
# ---------------------------------------------------------------------------


def expand_dhym_coefficients(phase: PhaseParams) -> np.ndarray:
    """Wedge coefficients of (X^n, X^(n-1) w, ..., w^n) after substitution."""
    if phase.n == 3:
        return np.array([phase.cos**2, 0.0, -3.0, -2.0 * phase.tan])
    return np.array([phase.sin**2, 0.0, -6.0, 8.0 * phase.cot, -phase.kappa])


def expansion_oracle(phase: PhaseParams) -> np.ndarray:
    """Independent wedge-coefficient derivation via the shifted product.

    Expands Im - tan*Re of prod(1 + i*mu_j) with mu = lambda + shift through
    the binomial identity s_k(lambda + s) = sum_m C(n-m, k-m) s^(k-m) s_m,
    then rescales so the X^n coefficient matches the closed form's.
    """
    n = phase.n
    shift = phase.tan if n == 3 else -phase.cot
    w = np.zeros(n + 1)
    for k in range(n + 1):
        weight = (1j**k).imag - phase.tan * (1j**k).real
        for m in range(k + 1):
            w[m] += weight * math.comb(n - m, k - m) * shift ** (k - m)
    scale = phase.h_native / w[n]
    coeffs = np.array([scale * w[n - i] * math.comb(n, n - i) for i in range(n + 1)])
    return coeffs


def chi_to_x(mu, phase: PhaseParams) -> np.ndarray:
    """Eigenvalue shift of the substitution: lambda_i = mu_i - tan (n=3) or
    mu_i + cot (n=4)."""
    mu = np.asarray(mu, dtype=float)
    return mu - phase.tan if phase.n == 3 else mu + phase.cot


def x_to_chi(lam, phase: PhaseParams) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    return lam + phase.tan if phase.n == 3 else lam - phase.cot


# ---------------------------------------------------------------------------
# The level function and its derivatives.
# ---------------------------------------------------------------------------


def _num_batch(vals: np.ndarray, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    """Shared numerator form on an (m, s) batch of eigenvalue subsets."""
    sig = _kernels.sigma_all(vals)
    if phase.n == 3:
        c1, c0 = spec.coeffs
        return c1 * sig[:, 1] + 2.0 * c0 * phase.tan
    c2, c1, c0 = spec.coeffs
    s1 = sig[:, 1]
    s2 = sig[:, 2] if sig.shape[1] > 2 else np.zeros_like(s1)
    return c2 * s2 - 2.0 * c1 * phase.cot * s1 + c0 * phase.kappa


def f_eval_batch(vals: np.ndarray, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    vals = np.ascontiguousarray(vals, dtype=float)
    if np.any(vals == 0.0):
        raise DomainError("level function undefined at zero eigenvalues")
    prod = np.prod(vals, axis=1)
    return _num_batch(vals, spec, phase) / prod


def f_eval(lam, spec: LevelSpec, phase: PhaseParams) -> float:
    return float(f_eval_batch(as_eigs(lam, phase.n)[None, :], spec, phase)[0])


def f_gradient_batch(vals: np.ndarray, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    vals = np.ascontiguousarray(vals, dtype=float)
    if np.any(vals == 0.0):
        raise DomainError("level function undefined at zero eigenvalues")
    n = vals.shape[1]
    prod = np.prod(vals, axis=1)
    grad = np.empty_like(vals)
    idx = np.arange(n)
    for i in range(n):
        rest = vals[:, idx != i]
        grad[:, i] = -_num_batch(rest, spec, phase) / (prod * vals[:, i])
    return grad


def f_gradient(lam, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    return f_gradient_batch(as_eigs(lam, phase.n)[None, :], spec, phase)[0]


def f_hessian(lam, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    """Closed-form Hessian from the subset numerators: off-diagonal entries
    exclude both indices, diagonal entries carry twice the one-exclusion
    numerator (so f_ii = -2 f_i / lambda_i holds as a derived identity,
    checkable against the gradient)."""
    vals = as_eigs(lam, phase.n)
    if np.any(vals == 0.0):
        raise DomainError("level function undefined at zero eigenvalues")
    n = vals.size
    prod = float(np.prod(vals))
    hess = np.empty((n, n))
    for i in range(n):
        rest = vals[[k for k in range(n) if k != i]]
        num_i = float(_num_batch(rest[None, :], spec, phase)[0])
        hess[i, i] = 2.0 * num_i / (prod * vals[i] ** 2)
        for j in range(i + 1, n):
            keep = [k for k in range(n) if k not in (i, j)]
            num = float(_num_batch(vals[keep][None, :], spec, phase)[0])
            hess[i, j] = hess[j, i] = num / (prod * vals[i] * vals[j])
    return hess


def f_hessian_batch(vals: np.ndarray, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    """Closed-form Hessians for an (m, n) batch; returns (m, n, n)."""
    vals = np.ascontiguousarray(vals, dtype=float)
    m, n = vals.shape
    prod = np.prod(vals, axis=1)
    hess = np.empty((m, n, n))
    idx = np.arange(n)
    for i in range(n):
        rest = vals[:, idx != i]
        num_i = _num_batch(rest, spec, phase)
        hess[:, i, i] = 2.0 * num_i / (prod * vals[:, i] ** 2)
        for j in range(i + 1, n):
            keep = idx[(idx != i) & (idx != j)]
            num = _num_batch(vals[:, keep], spec, phase)
            hess[:, i, j] = hess[:, j, i] = num / (prod * vals[:, i] * vals[:, j])
    return hess


def tangent_min_eig_batch(vals: np.ndarray, spec: LevelSpec,
                          phase: PhaseParams) -> np.ndarray:
    """Smallest eigenvalue of the Hessian restricted to the level-set tangent
    plane, per point.  Householder frames give exact orthonormal tangent
    bases in one batched pass."""
    grad = f_gradient_batch(vals, spec, phase)
    hess = f_hessian_batch(vals, spec, phase)
    m, n = vals.shape
    g = grad / np.linalg.norm(grad, axis=1, keepdims=True)
    sign = np.where(g[:, 0] >= 0.0, 1.0, -1.0)
    v = g.copy()
    v[:, 0] += sign
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # Householder Q maps e1 to -sign*g; columns 2..n span the tangent plane
    q = np.eye(n)[None, :, :] - 2.0 * v[:, :, None] * v[:, None, :]
    frame = q[:, :, 1:]
    restricted = np.einsum("mik,mij,mjl->mkl", frame, hess, frame)
    return np.linalg.eigvalsh(restricted)[:, 0]


def solve_lambda1(rest, spec: LevelSpec, phase: PhaseParams) -> float:
    """Complete an (n-1)-tuple to a level-set point on the component reachable
    from the large diagonal."""
    rest = np.asarray(rest, dtype=float)
    if rest.ndim != 1 or rest.size != phase.n - 1:
        raise DomainError(f"rest must have {phase.n - 1} entries")
    prod_rest = float(np.prod(rest))
    sig = _kernels.sigma_all(rest[None, :])[0]
    if phase.n == 3:
        c1, _ = spec.coeffs
        denom = spec.h * prod_rest - c1
    else:
        c2, c1, _ = spec.coeffs
        denom = spec.h * prod_rest - c2 * sig[1] + 2.0 * c1 * phase.cot
    num = float(_num_batch(rest[None, :], spec, phase)[0])
    scale = max(abs(spec.h * prod_rest), abs(num), 1.0)
    if abs(denom) < 1e-14 * scale:
        raise SingularConfigurationError(
            "level-set asymptote: completing denominator vanishes"
        )
    lam1 = num / denom
    if lam1 <= 0.0:
        raise ComponentError(
            "no completion on the component reachable from the large diagonal"
        )
    return lam1


# ---------------------------------------------------------------------------
# Ellipticity, convexity, and subsolution-cone checks.
# ---------------------------------------------------------------------------


def _require_on_level(lam, spec, phase, tol):
    resid = abs(f_eval(lam, spec, phase) - spec.h)
    if resid > tol:
        raise DomainError(f"point is off the level set by {resid:.3e} (tol {tol:.1e})")


def ellipticity_check(lam, spec: LevelSpec, phase: PhaseParams,
                      tol: float = 1e-8) -> tuple[bool, float]:
    """On-level-set ellipticity: all -f_i positive; returns min(-f_i)."""
    vals = as_eigs(lam, phase.n)
    validate_level(phase, spec.coeffs, spec.h)
    _require_on_level(vals, spec, phase, tol)
    neg_grad = -f_gradient_batch(vals[None, :], spec, phase)[0]
    return bool(np.all(neg_grad > 0.0)), float(np.min(neg_grad))


@dataclass(frozen=True)
class ConvexityReport:
    min_quadratic_form: float
    discriminants: tuple[float, ...]
    sign_consistent: bool


def _tangent_frame(grad: np.ndarray, n_tangents: int, rng) -> np.ndarray:
    n = grad.size
    g = grad / np.linalg.norm(grad)
    basis = np.linalg.svd(np.eye(n) - np.outer(g, g))[0][:, : n - 1]
    extra = rng.standard_normal((max(n_tangents - (n - 1), 0), n - 1))
    vecs = [basis.T]
    if extra.size:
        combo = extra @ basis.T
        combo /= np.linalg.norm(combo, axis=1, keepdims=True)
        vecs.append(combo)
    return np.vstack(vecs)


def convexity_check(lam, spec: LevelSpec, phase: PhaseParams,
                    n_tangents: int = 16, tol: float = 1e-8,
                    seed: int = 0) -> ConvexityReport:
    """Minimum tangent quadratic form of the Hessian plus the analytic
    discriminant quantities, with a sign-consistency verdict."""
    vals = as_eigs(lam, phase.n)
    validate_level(phase, spec.coeffs, spec.h)
    _require_on_level(vals, spec, phase, tol)
    grad = f_gradient(vals, spec, phase)
    hess = f_hessian(vals, spec, phase)
    rng = np.random.default_rng(seed)
    tangents = _tangent_frame(grad, n_tangents, rng)
    # project out the residual normal component before forming the quadratic
    g = grad / np.linalg.norm(grad)
    tangents = tangents - np.outer(tangents @ g, g)
    quad = np.einsum("ki,ij,kj->k", tangents, hess, tangents)
    min_quad = float(np.min(quad))

    if phase.n == 3:
        c1, c0 = spec.coeffs
        sig = _kernels.sigma_all(vals[None, :])[0]
        disc = (c1**2 * sig[2] + 2.0 * c0 * c1 * phase.tan * sig[1]
                + 3.0 * c0**2 * phase.tan**2)
        psd_predicted = disc >= 0.0
        discs = (float(disc),)
    else:
        c2, c1, c0 = spec.coeffs
        ls = np.sort(vals)[::-1]  # l1 >= l2 >= l3 >= l4
        l1, l2, l3, l4 = ls
        quad_l3 = spec.h * c2 * l3**2 - 2.0 * spec.h * c1 * phase.cot * l3 + c2**2
        a_q = l1 * l2 + l1 * l4 + l2 * l4 - 3.0 * l4**2
        b_q = l1 + l2 - 2.0 * l4
        r1 = l1 * l2 * l4 * quad_l3
        r2 = l1 * l2 * l4 * (
            a_q * quad_l3
            + b_q * (-2.0 * spec.h * c1 * phase.cot * l3**2 + c2**2 * l3
                     + spec.h * c0 * phase.kappa * l3 - 2.0 * c1 * c2 * phase.cot)
        )
        psd_predicted = r1 > 0.0 and r2 >= -tol
        discs = (float(r1), float(r2))

    consistent = (not psd_predicted) or (min_quad >= -max(tol, 1e-8))
    return ConvexityReport(min_quadratic_form=min_quad, discriminants=discs,
                           sign_consistent=bool(consistent))


def csub_cones(spec: LevelSpec, phase: PhaseParams) -> list[ConeSpec]:
    """Subsolution cones at (coeffs, h), in the 1/h normalization."""
    positive = ConeSpec(1, (1.0, 0.0))
    if phase.n == 3:
        c1, _ = spec.coeffs
        return [ConeSpec(2, (1.0, 0.0, -c1 / spec.h)), positive]
    c2, c1, _ = spec.coeffs
    return [
        ConeSpec(3, (1.0, 0.0, -c2 / spec.h, 2.0 * c1 * phase.cot / spec.h)),
        ConeSpec(2, (1.0, 0.0, -c2 / spec.h)),
        positive,
    ]


def csub_margin_batch(vals: np.ndarray, spec: LevelSpec, phase: PhaseParams) -> np.ndarray:
    margins = None
    for cone in csub_cones(spec, phase):
        m = upsilon_margin_batch(vals, cone)
        margins = m if margins is None else np.minimum(margins, m)
    return margins


def csub_check(mu, spec: LevelSpec, phase: PhaseParams) -> MembershipResult:
    """Subsolution test at (coeffs, h): membership in the concrete cones."""
    vals = as_eigs(mu, phase.n)
    validate_level(phase, spec.coeffs, spec.h)
    margin = float(csub_margin_batch(vals[None, :], spec, phase)[0])
    return MembershipResult(member=margin > 0.0, margin=margin)


# ---------------------------------------------------------------------------
# Phase-constrained sampling and the substitution identity.
# ---------------------------------------------------------------------------


def verify_substitution_identity(phase: PhaseParams, trials: int = 1000,
                                 seed: int = 0) -> float:
    """Max residual of the expanded polynomial over random phase-constrained
    tuples; the last angle is solved so the arctan sum hits the target."""
    rng = np.random.default_rng(seed)
    coeffs = expand_dhym_coefficients(phase)
    n = phase.n
    worst = 0.0
    produced = 0
    while produced < trials:
        ang = rng.uniform(-0.45 * math.pi, 0.45 * math.pi, size=n - 1)
        last = phase.theta_hat - float(np.sum(ang))
        if not abs(last) < 0.49 * math.pi:
            continue
        mu = np.tan(np.append(ang, last))
        lam = chi_to_x(mu, phase)
        sig = _kernels.sigma_all(lam[None, :])[0]
        resid = sum(
            coeffs[i] * sig[n - i] / math.comb(n, n - i) for i in range(n + 1)
        )
        worst = max(worst, abs(float(resid)))
        produced += 1
    return worst


def sample_level_points(spec: LevelSpec, phase: PhaseParams, count: int,
                        seed: int = 0, spread: float = 2.5) -> np.ndarray:
    """Level-set points on the good component: random admissible (n-1)-tuples
    completed by solve_lambda1, filtered into the subsolution cones."""
    rng = np.random.default_rng(seed)
    diag = diagonal_solution(phase)
    pts = []
    attempts = 0
    while len(pts) < count and attempts < 200 * count + 1000:
        attempts += 1
        rest = diag * rng.uniform(1.0 / spread, spread, size=phase.n - 1)
        try:
            lam1 = solve_lambda1(rest, spec, phase)
        except (SingularConfigurationError, ComponentError):
            continue
        lam = np.concatenate(([lam1], rest))
        if csub_margin_batch(lam[None, :], spec, phase)[0] > 0.0:
            pts.append(lam)
    if len(pts) < count:
        raise DomainError("level-set sampling starved; widen the spread")
    return np.array(pts)


def diagonal_solution(phase: PhaseParams) -> float:
    """The diagonal level-set value tan(theta/n) shifted into X-coordinates."""
    mu = math.tan(phase.theta_hat / phase.n)
    return float(chi_to_x(np.array([mu]), phase)[0])
