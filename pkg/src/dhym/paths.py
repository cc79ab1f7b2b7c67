"""Continuity-path construction and certification.

A path deforms the equation's coefficient tuple from a solvable endpoint at
t = 0 to the original equation at t = 1 while keeping four constraints:
the integral (topological) identity, the endpoint boundary values, a
coefficient inequality preserving the sharp cone containment, and the
monotonicity conditions that keep subsolutions subsolutions as t grows.

The closed-form families implemented here:
    n = 3:  c1(t) = (cos^2 * W0 - 2 t tan * W3) / (3 W2),  c0(t) = t
    n = 4:  c2(t) = [1 + (1-t) l cos]^(2/3),  c1(t) = t,
            c0(t) solved from the topological identity,
with W_k the intersection numbers and l in [1, -sec).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .branch import third_angle_arr
from .errors import DomainError, SearchFailureError
from .phase import PhaseParams
from .pointwise import LevelSpec, csub_margin_batch, diagonal_solution, native_level
from .util import thread_count


@dataclass(frozen=True)
class IntersectionNumbers:
    """Mixed volumes W_k = integral of w^k wedge X^(n-k), k = 0..n."""

    omega: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.omega)
        if len(vals) not in (4, 5):
            raise DomainError("need n+1 intersection numbers with n in {3, 4}")
        if not vals[-1] > 0.0:
            raise DomainError("the volume W_n must be positive")
        object.__setattr__(self, "omega", vals)

    @property
    def n(self) -> int:
        return len(self.omega) - 1

    def __getitem__(self, k: int) -> float:
        return self.omega[k]


def omegas_from_moments(weights, eigs, n: int) -> IntersectionNumbers:
    """Intersection numbers of a piecewise-constant diagonal eigenvalue field:
    W_k = sum_j w_j sigma_(n-k)(eigs_j) / C(n, n-k), with unit total volume."""
    weights = np.asarray(weights, dtype=float)
    eigs = np.asarray(eigs, dtype=float)
    sig = _kernels.sigma_all(eigs)
    vals = [float(weights @ sig[:, n - k]) / math.comb(n, n - k) for k in range(n + 1)]
    return IntersectionNumbers(tuple(vals))


# ---------------------------------------------------------------------------
# Path families.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """Closed-form coefficient path for one dimension and one Omega tuple."""

    phase: PhaseParams
    omega: IntersectionNumbers
    ell: float | None = None

    def __post_init__(self):
        if self.omega.n != self.phase.n:
            raise DomainError("intersection numbers and phase disagree on n")
        if self.phase.n == 3:
            if self.ell is not None:
                raise DomainError("the n=3 family has no ell parameter")
            if not self.omega[2] > 0.0:
                raise DomainError("the n=3 family needs W2 > 0")
        else:
            if self.ell is None:
                raise DomainError("the n=4 family needs ell")
            ell_max = -self.phase.sec
            if not 1.0 <= self.ell < ell_max:
                raise DomainError(f"ell must lie in [1, {ell_max}), got {self.ell}")

    # -- coefficients -------------------------------------------------------

    def c2(self, t):
        if self.phase.n == 3:
            raise DomainError("c2 undefined for n=3 paths")
        return np.exp((2.0 / 3.0) * np.log1p((1.0 - np.asarray(t, dtype=float))
                                             * self.ell * self.phase.cos))

    def one_minus_c2(self, t):
        """1 - c2(t) without cancellation near t = 1."""
        return -np.expm1((2.0 / 3.0) * np.log1p((1.0 - np.asarray(t, dtype=float))
                                                * self.ell * self.phase.cos))

    def c1(self, t):
        t = np.asarray(t, dtype=float)
        if self.phase.n == 4:
            return t + 0.0
        ph, om = self.phase, self.omega
        return (ph.cos**2 * om[0] - 2.0 * t * ph.tan * om[3]) / (3.0 * om[2])

    def c0(self, t):
        t = np.asarray(t, dtype=float)
        if self.phase.n == 3:
            return t + 0.0
        ph, om = self.phase, self.omega
        return (ph.sin**2 * om[0] - 6.0 * self.c2(t) * om[2]
                + 8.0 * t * ph.cot * om[3]) / (ph.kappa * om[4])

    def coeffs_at(self, t: float) -> tuple[float, ...]:
        if self.phase.n == 3:
            return (float(self.c1(t)), float(self.c0(t)))
        return (float(self.c2(t)), float(self.c1(t)), float(self.c0(t)))

    def level_at(self, t: float) -> LevelSpec:
        return LevelSpec(h=self.phase.h_native, coeffs=self.coeffs_at(t), t=float(t))

    # -- derivatives (analytic) --------------------------------------------

    def c1_prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.phase.n == 4:
            return np.ones_like(t)
        ph, om = self.phase, self.omega
        return np.full_like(t, -2.0 * ph.tan * om[3] / (3.0 * om[2]))

    def c2_prime(self, t):
        lc = self.ell * self.phase.cos
        return -(2.0 / 3.0) * lc * np.exp(
            -(1.0 / 3.0) * np.log1p((1.0 - np.asarray(t, dtype=float)) * lc)
        )

    def c2_pow32_prime(self, t):
        """d/dt of c2^(3/2); constant -l cos for this family."""
        return np.full_like(np.asarray(t, dtype=float), -self.ell * self.phase.cos)

    # -- derived path quantities -------------------------------------------

    def theta(self, t):
        """Branch angle of the n=4 coefficient pair along the path."""
        if self.phase.n == 3:
            raise DomainError("theta undefined for n=3 paths")
        ratio = self.c1(t) * self.phase.cos / self.c2(t) ** 1.5
        return third_angle_arr(ratio)

    def c0_tilde(self, t):
        ph = self.phase
        th = self.theta(t)
        return ph.kappa + 24.0 * self.c2(t) ** 2 * ph.csc2 * np.cos(th) ** 2 * np.cos(2.0 * th)

    def topological_residual(self, t):
        ph, om = self.phase, self.omega
        t = np.asarray(t, dtype=float)
        if ph.n == 3:
            return ph.cos**2 * om[0] - 3.0 * self.c1(t) * om[2] - 2.0 * self.c0(t) * ph.tan * om[3]
        return (ph.sin**2 * om[0] - 6.0 * self.c2(t) * om[2]
                + 8.0 * self.c1(t) * ph.cot * om[3] - self.c0(t) * ph.kappa * om[4])

    def psatz_margin(self, t):
        ph = self.phase
        if ph.n == 3:
            return self.c1(t) ** 1.5 - self.c0(t) * ph.sin
        th = self.theta(t)
        return (ph.kappa * self.c0(t)
                + 24.0 * self.c2(t) ** 2 * ph.csc2 * np.cos(th) ** 2 * np.cos(2.0 * th))

    def upsilon_margins(self, t):
        """Derivative-condition margins; all must be nonnegative (strict for
        the first ones) to keep the cones shrinking."""
        if self.phase.n == 3:
            return (self.c1_prime(t),)
        return (
            self.c2_prime(t),
            self.c1_prime(t),
            self.c2_pow32_prime(t) + self.phase.cos * self.c1_prime(t),
        )


def plan_path_3(omega: IntersectionNumbers, phase: PhaseParams) -> PathSpec:
    if phase.n != 3:
        raise DomainError("plan_path_3 needs an n=3 phase")
    return PathSpec(phase=phase, omega=omega)


def plan_path_4(omega: IntersectionNumbers, phase: PhaseParams, ell: float) -> PathSpec:
    if phase.n != 4:
        raise DomainError("plan_path_4 needs an n=4 phase")
    return PathSpec(phase=phase, omega=omega, ell=float(ell))


# ---------------------------------------------------------------------------
# Constraint certification.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintReport:
    topological_max: float
    topological_pass: bool
    boundary_max_err: float
    boundary_pass: bool
    psatz_min: float
    psatz_pass: bool
    upsilon_mins: tuple[float, ...]
    upsilon_pass: bool

    @property
    def all_pass(self) -> bool:
        return (self.topological_pass and self.boundary_pass
                and self.psatz_pass and self.upsilon_pass)


def check_constraints(path: PathSpec, t_samples: int = 1000) -> ConstraintReport:
    """Evaluate all four path constraints on a uniform t-grid."""
    ph, om = path.phase, path.omega
    t = np.linspace(0.0, 1.0, max(int(t_samples), 2))

    scale = abs(ph.h_native * om[0])
    topo = float(np.max(np.abs(path.topological_residual(t))))
    topo_pass = topo <= 1e-10 * max(scale, 1.0)

    ends = [abs(path.c1(1.0) - 1.0), abs(path.c0(1.0) - 1.0)]
    if ph.n == 4:
        ends.append(abs(path.c2(1.0) - 1.0))
        zero_ok = abs(path.c1(0.0)) < 1e-14 and path.c2(0.0) > 0.0
    else:
        zero_ok = abs(path.c0(0.0)) < 1e-14 and path.c1(0.0) > 0.0
    boundary_err = float(max(ends))
    boundary_pass = boundary_err <= 1e-12 and bool(zero_ok)

    psatz_min = float(np.min(path.psatz_margin(t)))
    psatz_pass = psatz_min > 0.0

    ups = tuple(float(np.min(m)) for m in path.upsilon_margins(t))
    if ph.n == 3:
        ups_pass = ups[0] > 0.0
    else:
        ups_pass = ups[0] > 0.0 and ups[1] > 0.0 and ups[2] >= -1e-15

    return ConstraintReport(topo, topo_pass, boundary_err, boundary_pass,
                            psatz_min, psatz_pass, ups, ups_pass)


# ---------------------------------------------------------------------------
# Solvability regions.
# ---------------------------------------------------------------------------

GUARD = 1e-9


def region3_profile(t, phase: PhaseParams):
    """-3 (1 - t^(2/3) sin^(2/3)) cot / (2 (1-t)); its inf bounds W3/W2."""
    t = np.asarray(t, dtype=float)
    s = phase.sin ** (2.0 / 3.0)
    return -3.0 * (1.0 - t ** (2.0 / 3.0) * s) * phase.cot / (2.0 * (1.0 - t))


def region_test_3(omega: IntersectionNumbers, phase: PhaseParams,
                  samples: int = 10001) -> tuple[bool, float]:
    """Membership of (W2, W3) in the n=3 solvability region, by dense t
    sampling plus the analytic t -> 1 limit."""
    if phase.n != 3 or omega.n != 3:
        raise DomainError("region_test_3 needs n=3 data")
    t = np.linspace(0.0, 1.0, int(samples) + 1)[:-1]
    inf_q = float(np.min(region3_profile(t, phase)))
    limit = -phase.cot * phase.sin ** (2.0 / 3.0)  # L'Hopital at t -> 1
    inf_q = min(inf_q, limit)
    margin = inf_q * omega[2] - omega[3] - GUARD
    return margin > 0.0, margin


def region4_bracket(path: PathSpec, t):
    """The two region quotients at t: (W2 coefficient, W4 coefficient)."""
    ph = path.phase
    t = np.asarray(t, dtype=float)
    one_m_t = 1.0 - t
    g2 = 3.0 * path.one_minus_c2(t) * ph.tan / (4.0 * one_m_t)
    g4 = path.c0_tilde(t) * ph.tan / (8.0 * one_m_t)
    return g2, g4


def region_test_4(omega: IntersectionNumbers, phase: PhaseParams, ell: float,
                  samples: int = 10001) -> tuple[bool, float]:
    """Membership of (W2, W3, W4) in the ell-indexed n=4 region.

    The W2 quotient tends to -l sin / 2 as t -> 1 (L'Hopital); the W4
    quotient diverges to +infinity there because its numerator stays
    positive, so the infimum sits away from the endpoint and dense sampling
    on [0, 1) captures it.
    """
    if phase.n != 4 or omega.n != 4:
        raise DomainError("region_test_4 needs n=4 data")
    path = plan_path_4(omega, phase, ell)
    t = np.linspace(0.0, 1.0, int(samples) + 1)[:-1]
    g2, g4 = region4_bracket(path, t)
    inf_val = float(np.min(g2 * omega[2] + g4 * omega[4]))
    margin = inf_val - omega[3] - GUARD
    return margin > 0.0, margin


# ---------------------------------------------------------------------------
# The ell search (n = 4).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllCertificate:
    ell: float
    min_margin: float
    c0_at_zero: float
    schedule_index: int


def dominance_floor(t):
    """Worst-angle dimensionless floor of the region-dominance coefficient:
    1 + 8t - 6 t^(2/3) - 3 t^(4/3), decreasing on [0, 1] and zero at t = 1."""
    t = np.asarray(t, dtype=float)
    return 1.0 + 8.0 * t - 6.0 * t ** (2.0 / 3.0) - 3.0 * t ** (4.0 / 3.0)


def ell_schedule(phase: PhaseParams, depth: int = 40) -> np.ndarray:
    sec = -phase.sec
    ks = np.arange(1, depth + 1)
    return sec - (sec - 1.0) / 2.0**ks


def csub_momenta_ok(omega: IntersectionNumbers, phase: PhaseParams) -> bool:
    """Necessary integral inequalities carried by an n=4 subsolution."""
    return (omega[2] > phase.csc2 * omega[4]
            and phase.sin**2 * omega[0] > omega[2]
            and 3.0 * omega[2] - 6.0 * phase.cot * omega[3] + phase.kappa * omega[4] > 0.0)


def ell_search(omega: IntersectionNumbers, phase: PhaseParams, depth: int = 40,
               t_samples: int = 4096) -> EllCertificate:
    """Walk ell up a geometric schedule toward -sec and return the first value
    whose dominance margin is positive on a dense t-grid with c0(0) >= 0."""
    if phase.n != 4 or omega.n != 4:
        raise DomainError("ell_search needs n=4 data")
    if not csub_momenta_ok(omega, phase):
        raise DomainError("intersection numbers violate the subsolution inequalities")
    t = np.linspace(0.0, 1.0, max(int(t_samples), 16))
    rhs = (1.0 - t) * (4.0 * omega[2] + (4.0 / 3.0) * phase.kappa * omega[4])
    for k, ell in enumerate(ell_schedule(phase, depth), start=1):
        path = plan_path_4(omega, phase, float(ell))
        d_ell = 6.0 * path.one_minus_c2(t) * omega[2] + path.c0_tilde(t) * omega[4]
        margin = float(np.min(d_ell - rhs))
        c0_zero = float(path.c0(0.0))
        if margin > 0.0 and c0_zero >= 0.0:
            return EllCertificate(ell=float(ell), min_margin=margin,
                                  c0_at_zero=c0_zero, schedule_index=k)
    raise SearchFailureError("no ell in the schedule certifies the region")


# ---------------------------------------------------------------------------
# Synthetic subsolution-realizable intersection numbers.
# ---------------------------------------------------------------------------


def _topo_residual_shifted(delta, weights, eigs, phase: PhaseParams):
    om = omegas_from_moments(weights, eigs + delta, phase.n)
    ph = phase
    if ph.n == 3:
        return ph.cos**2 * om[0] - 3.0 * om[2] - 2.0 * ph.tan * om[3]
    return ph.sin**2 * om[0] - 6.0 * om[2] + 8.0 * ph.cot * om[3] - ph.kappa * om[4]


def sample_csub_omegas(phase: PhaseParams, count: int, seed: int = 0,
                       max_cells: int = 6, spread: float = 0.35) -> list[IntersectionNumbers]:
    """Draw realizable intersection-number tuples from piecewise-constant
    diagonal subsolution fields.

    Each sample perturbs the diagonal solution cellwise, then shifts the whole
    field along the diagonal (scalar root-solve) so the integral identity of
    the t = 1 equation holds exactly; fields leaving the subsolution cones are
    rejected and redrawn.
    """
    rng = np.random.default_rng(seed)
    lam_star = diagonal_solution(phase)
    spec = native_level(phase)
    out: list[IntersectionNumbers] = []
    attempts = 0
    stale = 0
    working = spread  # shrinks when the cone headroom is tight
    brackets = [(0.02, 0.02), (0.1, 0.1), (0.45, 1.5)]
    while len(out) < count:
        attempts += 1
        if attempts > 400 * count + 2000:
            raise DomainError("subsolution sampling starved; reduce the spread")
        if stale > 40:
            working = max(working * 0.5, 1e-3)
            stale = 0
        cells = rng.integers(2, max_cells + 1)
        weights = rng.dirichlet(np.ones(cells))
        scale = rng.uniform(0.0, working)
        eigs = lam_star * (1.0 + scale * rng.uniform(-1.0, 1.0, size=(cells, phase.n)))
        delta = None
        for blo, bhi in brackets:
            lo, hi = -blo * lam_star, bhi * lam_star
            if (_topo_residual_shifted(lo, weights, eigs, phase)
                    * _topo_residual_shifted(hi, weights, eigs, phase) < 0.0):
                delta = brentq(_topo_residual_shifted, lo, hi,
                               args=(weights, eigs, phase), xtol=1e-14, rtol=1e-15)
                break
        if delta is None:
            stale += 1
            continue
        shifted = eigs + delta
        if np.min(csub_margin_batch(shifted, spec, phase)) <= 0.0:
            stale += 1
            continue
        om = omegas_from_moments(weights, shifted, phase.n)
        if phase.n == 4 and not csub_momenta_ok(om, phase):
            stale += 1
            continue
        out.append(om)
        stale = 0
    return out


@dataclass(frozen=True)
class SweepReport:
    total: int
    passed: int
    min_region_margin: float

    @property
    def all_pass(self) -> bool:
        return self.passed == self.total


def csub_implies_region_3(phase: PhaseParams, trials: int = 1000,
                          seed: int = 0) -> SweepReport:
    """Every synthetic subsolution-realizable (W2, W3) lands in the region."""
    if phase.n != 3:
        raise DomainError("csub_implies_region_3 needs n=3")
    omegas = sample_csub_omegas(phase, trials, seed=seed)
    margins = []
    passed = 0
    workers = thread_count()

    def _one(om):
        return region_test_3(om, phase)

    if workers > 1 and trials >= 64:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, omegas))
    else:
        results = [_one(om) for om in omegas]
    for ok, margin in results:
        margins.append(margin)
        passed += bool(ok)
    return SweepReport(total=trials, passed=passed,
                       min_region_margin=float(min(margins)))
