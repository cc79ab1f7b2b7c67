"""Sharp cone-containment bounds and their brute-force verification oracles.

The closed forms come from the trigonometric solution of the depressed cubic
B^3 - 12c*B + 8d = 0 (three real roots; casus irreducibilis).  Every closed
form here is paired with an independent numeric check: a grid/...-refined
minimization for the infimum, and seeded Monte-Carlo cone sampling for the
containment claims themselves.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .branch import arccos_branch, third_angle
from .errors import DomainError
from .symmetric import ConeSpec, upsilon_margin_batch

__all__ = [
    "PsatzParams",
    "arccos_branch",
    "theta_cd",
    "cubic_roots",
    "e_lower_bound",
    "infimum_closed_form",
    "infimum_oracle",
    "containment_check",
    "CheckResult",
]


@dataclass(frozen=True)
class PsatzParams:
    """Cone parameters c > 0, d >= 0 and the optional third coefficient e."""

    c: float
    d: float = 0.0
    e: float | None = None

    def __post_init__(self):
        if not self.c > 0.0:
            raise DomainError(f"c must be positive, got {self.c}")
        if self.d < 0.0:
            raise DomainError(f"d must be nonnegative, got {self.d}")

    @property
    def d_max(self) -> float:
        return 2.0 * self.c**1.5

    def require_strict(self):
        if not self.d < self.d_max:
            raise DomainError(f"need 2c^(3/2) > d, got c={self.c}, d={self.d}")


def _ratio(c: float, d: float) -> float:
    return -d / (2.0 * c**1.5)


def theta_cd(c: float, d: float) -> float:
    """Branch angle arccos(-d/2c^(3/2))/3 - 2pi/3, in [-pi/3, -pi/6]."""
    p = PsatzParams(c, d)
    if p.d > p.d_max * (1.0 + 1e-12):
        raise DomainError(f"theta_cd needs d <= 2c^(3/2), got c={c}, d={d}")
    return third_angle(_ratio(c, d))


def cubic_roots(c: float, d: float) -> np.ndarray:
    """Roots B_k = 4 sqrt(c) cos(arccos(-d/2c^(3/2))/3 - 2pi k/3), k = 0,1,2.

    Ordered as returned (k = 0, 1, 2); they satisfy
    2 sqrt(3c) >= B_1 > 2 sqrt(c) > B_0 >= 0 > -2 sqrt(3c) >= B_2 > -4 sqrt(c).
    """
    p = PsatzParams(c, d)
    p.require_strict()
    base = arccos_branch(_ratio(c, d)) / 3.0
    ks = np.arange(3)
    return 4.0 * math.sqrt(c) * np.cos(base - 2.0 * math.pi * ks / 3.0)


def e_lower_bound(c: float, d: float) -> float:
    """-24 c^2 cos^2(theta) cos(2 theta): containment (e) holds for e above it."""
    p = PsatzParams(c, d)
    p.require_strict()
    th = theta_cd(c, d)
    return -24.0 * c * c * math.cos(th) ** 2 * math.cos(2.0 * th)


def infimum_closed_form(c: float, d: float) -> float:
    """5c^3 + d^2 + (-18 c^(3/2) d cos(theta) + 3(2c^3+d^2)) / (4cos^2(theta)-1)."""
    p = PsatzParams(c, d)
    p.require_strict()
    th = theta_cd(c, d)
    cs = math.cos(th)
    return 5.0 * c**3 + d * d + (-18.0 * c**1.5 * d * cs + 3.0 * (2.0 * c**3 + d * d)) / (
        4.0 * cs * cs - 1.0
    )


def _g(c: float, d: float, A, B):
    return c * c * A - c * d * B + c**3 * B * B / A


def infimum_oracle(c: float, d: float, boundary_points: int = 20001,
                   interior_points: int = 160) -> float:
    """Numerically minimize g(A,B) = c^2 A - c d B + c^3 B^2/A over the region
    A > 0, B >= 2 sqrt(A+c) - d/c.

    The minimum sits on the boundary curve; a 1-D grid over the substituted
    variable Bt = B + d/c (with A = Bt^2/4 - c) plus bounded scalar refinement
    finds it, and a coarse interior scan guards the boundary restriction.
    """
    p = PsatzParams(c, d)
    p.require_strict()
    rc = math.sqrt(c)
    bt_lo = 2.0 * rc
    bt_hi = max(2.0 * rc + 2.0 * math.sqrt(2.0 * c - d / rc), 8.0 * rc)

    def on_curve(bt):
        A = bt * bt / 4.0 - c
        return _g(c, d, A, bt - d / c)

    bts = np.linspace(bt_lo, bt_hi, boundary_points)[1:]
    vals = on_curve(bts)
    k = int(np.argmin(vals))
    lo = bts[max(k - 1, 0)]
    hi = bts[min(k + 1, bts.size - 1)]
    res = minimize_scalar(on_curve, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    best = min(float(vals[k]), float(res.fun))

    # interior guard: g is minimized on the curve, a coarse scan confirms
    a_grid = np.geomspace(1e-3 * c, 400.0 * c, interior_points)
    b_lo = 2.0 * np.sqrt(a_grid + c) - d / c
    for frac in (0.0, 0.1, 0.5, 1.0, 2.0):
        b_grid = b_lo + frac * (abs(b_lo) + rc)
        best = min(best, float(np.min(_g(c, d, a_grid, b_grid))))
    return best


# ---------------------------------------------------------------------------
# Containment claims (a)-(f) with Monte-Carlo + boundary-biased sampling.
# ---------------------------------------------------------------------------

_CLAIMS = ("a", "b", "c", "d", "e", "f")


@dataclass(frozen=True)
class CheckResult:
    claim: str
    passed: bool
    worst_margin: float
    witness: tuple[float, ...] | None
    n_accepted: int
    segment_checks: int


def _hyp_cones(claim: str, c: float, d: float, e: float | None) -> list[ConeSpec]:
    positive = ConeSpec(1, (1.0, 0.0))
    pair = ConeSpec(2, (1.0, 0.0, -c))
    triple = ConeSpec(3, (1.0, 0.0, -c, d))
    if claim in ("a", "d"):
        return [pair, positive]
    if claim in ("b", "e"):
        return [triple, pair, positive]
    if claim == "c":
        return [ConeSpec(3, (0.0, c, -d, e)), pair, positive]
    if claim == "f":
        return [ConeSpec(4, (1.0, 0.0, -c, d, -e)), triple, pair, positive]
    raise DomainError(f"unknown claim {claim!r}")


def _conclusion_cones(claim: str, c: float, d: float, e: float | None) -> list[ConeSpec]:
    if claim == "d":
        return [ConeSpec(2, (0.0, c, -d))]
    if claim == "e":
        return [ConeSpec(3, (0.0, c, -d, e))]
    return []  # (a), (b), (c), (f): connectedness-style claims


def _sample_hypothesis(claim, c, d, e, n, samples, rng):
    """Box sampling plus boundary-biased families, filtered into the cone."""
    R = 20.0 * max(1.0, math.sqrt(c), d / c)
    pool = [rng.uniform(0.0, R, size=(samples, n))]

    m = max(samples // 4, 64)
    # pair-product boundary sigma_2 ~ c
    x = np.exp(rng.uniform(math.log(math.sqrt(c) / 3), math.log(3 * math.sqrt(c)), m))
    delta = c * np.exp(rng.uniform(math.log(1e-6), math.log(0.5), m))
    fam = rng.uniform(0.0, R, size=(m, n))
    fam[:, 0] = x
    fam[:, 1] = (c + delta) / x
    pool.append(fam)

    if d < 2.0 * c**1.5 and claim in ("b", "e", "f"):
        # near the analytic minimizer: lam2 = lam3 = B1/2 on the critical curve
        b1 = float(cubic_roots(c, d)[1])
        half = b1 / 2.0
        lam1_star = (c * b1 - d) / (b1 * b1 / 4.0 - c)
        jit = 1.0 + rng.uniform(-1e-3, 1e-3, size=(m, 2))
        delta = np.exp(rng.uniform(math.log(1e-9), math.log(1.0), m)) * max(lam1_star, 1.0)
        fam = rng.uniform(0.5 * R, R, size=(m, n))
        fam[:, 0] = lam1_star + delta
        fam[:, 1] = half * jit[:, 0]
        fam[:, 2] = half * jit[:, 1]
        pool.append(fam)

    cand = np.vstack(pool)
    mask = np.ones(cand.shape[0], dtype=bool)
    for cone in _hyp_cones(claim, c, d, e):
        mask &= upsilon_margin_batch(cand, cone) > 0.0
    return cand[mask]


def _segment_consistency(claim, accepted, cones, rng, pairs=200):
    """Coordinate-wise interpolation checks mirroring the containment proofs.

    For claim (a) the intersection is convex, so arbitrary midpoints are
    tested; otherwise two accepted points differing in a single coordinate
    must have their connecting segment inside the intersection.
    """
    m = accepted.shape[0]
    if m < 2:
        return 0, True
    idx = rng.integers(0, m, size=(pairs, 2))
    lam, mu = accepted[idx[:, 0]], accepted[idx[:, 1]]
    checks = 0
    ok = True
    fractions = (0.25, 0.5, 0.75)
    if claim == "a":
        for f in fractions:
            mid = f * lam + (1.0 - f) * mu
            for cone in cones:
                ok &= bool(np.all(upsilon_margin_batch(mid, cone) > 0.0))
            checks += mid.shape[0]
        return checks, ok
    n = accepted.shape[1]
    for j in range(n):
        hybrid = lam.copy()
        hybrid[:, j] = mu[:, j]
        inside = np.ones(hybrid.shape[0], dtype=bool)
        for cone in cones:
            inside &= upsilon_margin_batch(hybrid, cone) > 0.0
        if not np.any(inside):
            continue
        for f in fractions:
            mid = f * lam[inside] + (1.0 - f) * hybrid[inside]
            for cone in cones:
                ok &= bool(np.all(upsilon_margin_batch(mid, cone) > 0.0))
            checks += mid.shape[0]
    return checks, ok


def containment_check(claim: str, c: float, d: float = 0.0, e: float | None = None,
                      n: int = 4, samples: int = 10000, seed: int = 0) -> CheckResult:
    """Sample the hypothesis cone of one containment claim and verify its
    conclusion, returning the worst conclusion margin and any witness.

    Claims (a), (b), (c), (f) carry no conclusion inequality beyond the
    hypothesis; for them the verdict is the coordinate-wise segment
    consistency check used in the corresponding proofs.
    """
    claim = str(claim).lower()
    if claim not in _CLAIMS:
        raise DomainError(f"claim must be one of {_CLAIMS}, got {claim!r}")
    if n not in (3, 4):
        raise DomainError("containment sampling supports n in {3, 4}")
    p = PsatzParams(c, d, e)
    if claim in ("b", "d", "e", "f"):
        p.require_strict()
    if claim == "f":
        if e is None:
            raise DomainError("claim (f) needs e")
        if not e > e_lower_bound(c, d):
            raise DomainError("claim (f) hypothesis needs e above the sharp bound")
    if claim in ("c", "e") and e is None:
        raise DomainError(f"claim ({claim}) needs e")
    if claim == "f" and n == 3:
        raise DomainError("claim (f) involves arity-4 cones; needs n = 4")
    if claim in ("b", "c", "e") and n < 3:
        raise DomainError("claims (b), (c), (e) need n >= 3")

    rng = np.random.default_rng(seed)
    accepted = _sample_hypothesis(claim, c, d, e, n, samples, rng)
    hyp = _hyp_cones(claim, c, d, e)

    worst = math.inf
    witness = None
    passed = True
    for cone in _conclusion_cones(claim, c, d, e):
        margins = upsilon_margin_batch(accepted, cone)
        if margins.size:
            k = int(np.argmin(margins))
            if margins[k] < worst:
                worst = float(margins[k])
                witness = tuple(accepted[k])
            passed &= bool(margins[k] > 0.0)

    checks, seg_ok = _segment_consistency(claim, accepted, hyp, rng)
    passed &= seg_ok
    if not math.isfinite(worst):
        worst = float("nan")
    return CheckResult(claim=claim, passed=passed, worst_margin=worst,
                       witness=witness, n_accepted=int(accepted.shape[0]),
                       segment_checks=checks)
