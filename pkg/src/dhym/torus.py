"""Continuity-method solver for the reduced equation on a flat complex torus.

The model keeps two active complex coordinates carried by a varying 2x2
Hermitian block H = H0 + complex-Hessian(u), with the remaining n-2
eigenvalues frozen at positive constants.  Symmetry of the level function
makes the reduced equation linear in (det H, tr H):

    a_det * det(H0 + Hess u) + a_tr * tr(H0 + Hess u) + a_const = 0,

the a's depending on the path coefficients at t, the level h, and the frozen
eigenvalues.  Differentiation is spectral on a uniform periodic grid (two
complex coordinates = four real circles), the Newton linearization is the
cofactor-weighted second-order operator, and linear solves are Krylov
iterations with a constant-coefficient Fourier preconditioner.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, bicgstab, lgmres

from . import _kernels
from .errors import ConeExitError, DomainError, RegionRefusedError
from .paths import IntersectionNumbers, PathSpec, region_test_3, region_test_4
from .phase import PhaseParams
from .pointwise import LevelSpec, csub_margin_batch, x_to_chi


@dataclass(frozen=True)
class TorusProblem:
    """Grid resolution, background block, frozen eigenvalues, tolerances."""

    phase: PhaseParams
    N: int = 16
    base: tuple[float, float, float, float] = None  # (h11, h22, re12, im12)
    rho_modes: tuple[tuple[float, tuple[int, int, int, int]], ...] = ()
    frozen: tuple[float, ...] = None
    newton_tol: float = 1e-9
    max_newton: int = 40

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise DomainError("grid size N must be an even integer >= 4")
        from .pointwise import diagonal_solution

        lam = diagonal_solution(self.phase)
        if self.base is None:
            object.__setattr__(self, "base", (lam, lam, 0.0, 0.0))
        else:
            object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        if self.frozen is None:
            object.__setattr__(self, "frozen", (lam,) * (self.phase.n - 2))
        else:
            frozen = tuple(float(v) for v in self.frozen)
            if len(frozen) != self.phase.n - 2:
                raise DomainError(f"need {self.phase.n - 2} frozen eigenvalues")
            if any(v <= 0.0 for v in frozen):
                raise DomainError("frozen eigenvalues must be positive")
            object.__setattr__(self, "frozen", frozen)
        b11, b22, re12, im12 = self.base
        if b11 <= 0 or b11 * b22 - re12**2 - im12**2 <= 0:
            raise DomainError("base block must be positive definite")
        modes = []
        for amp, kvec in self.rho_modes:
            kvec = tuple(int(k) for k in kvec)
            if len(kvec) != 4:
                raise DomainError("rho modes take four integer wavenumbers")
            if kvec == (0, 0, 0, 0):
                raise DomainError("rho must have zero mean: drop the k=0 mode")
            modes.append((float(amp), kvec))
        object.__setattr__(self, "rho_modes", tuple(modes))


@dataclass(frozen=True)
class GridField:
    """Periodic real grid field plus the metadata its file format carries."""

    values: np.ndarray
    N: int
    n: int
    theta_hat: float


# ---------------------------------------------------------------------------
# Spectral machinery.
# ---------------------------------------------------------------------------


def _wavenumbers(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


def _hessian_symbols(N: int):
    """Fourier multipliers of the three complex-Hessian entries."""
    k = _wavenumbers(N)
    k1 = k[:, None, None, None]
    k2 = k[None, :, None, None]
    k3 = k[None, None, :, None]
    k4 = k[None, None, None, :]
    s11 = -0.25 * (k1**2 + k2**2)
    s22 = -0.25 * (k3**2 + k4**2)
    # d/dz1 ~ (i k1 + k2)/2, d/dzbar2 ~ (i k3 - k4)/2
    s12 = 0.25 * (1j * k1 + k2) * (1j * k3 - k4)
    return s11, s22, s12


def complex_hessian(u: np.ndarray):
    """H11, H22 (real) and H12 (complex) of a real periodic grid function."""
    N = u.shape[0]
    s11, s22, s12 = _hessian_symbols(N)
    uh = np.fft.fftn(u)
    h11 = np.fft.ifftn(uh * s11).real
    h22 = np.fft.ifftn(uh * s22).real
    h12 = np.fft.ifftn(uh * s12)
    return h11, h22, h12


def rho_field(problem: TorusProblem) -> np.ndarray:
    N = problem.N
    x = 2.0 * math.pi * np.arange(N) / N
    grids = np.meshgrid(x, x, x, x, indexing="ij", sparse=True)
    out = np.zeros((N, N, N, N))
    for amp, kvec in problem.rho_modes:
        phase_arg = sum(kj * gj for kj, gj in zip(kvec, grids))
        out += amp * np.cos(phase_arg)
    return out


def background_block(problem: TorusProblem):
    """H0 = constant positive block + complex Hessian of the potential."""
    b11, b22, re12, im12 = problem.base
    if problem.rho_modes:
        h11, h22, h12 = complex_hessian(rho_field(problem))
        return b11 + h11, b22 + h22, (re12 + 1j * im12) + h12
    N = problem.N
    shape = (N, N, N, N)
    return (np.full(shape, b11), np.full(shape, b22),
            np.full(shape, re12 + 1j * im12, dtype=complex))


def eigen_tuples(h11, h22, h12, frozen) -> np.ndarray:
    """Pointwise eigenvalue tuples (eta_lo, eta_hi, frozen...) as (m, n)."""
    lo, hi = _kernels.eigh2_batch(h11.ravel(), h22.ravel(),
                                  h12.real.ravel(), h12.imag.ravel())
    cols = [lo, hi] + [np.full(lo.shape, a) for a in frozen]
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# The reduced equation.
# ---------------------------------------------------------------------------


def reduce_equation(spec: LevelSpec, phase: PhaseParams, frozen) -> tuple[float, float, float, bool]:
    """Coefficients (a_det, a_tr, a_const) of the reduced equation, plus a
    degeneracy flag raised when the det coefficient vanishes."""
    frozen = tuple(float(v) for v in frozen)
    if len(frozen) != phase.n - 2:
        raise DomainError(f"need {phase.n - 2} frozen eigenvalues")
    if phase.n == 3:
        c1, c0 = spec.coeffs
        (a3,) = frozen
        a_det = -spec.h * a3
        a_tr = c1
        a_const = c1 * a3 + 2.0 * c0 * phase.tan
    else:
        c2, c1, c0 = spec.coeffs
        a3, a4 = frozen
        p, s = a3 * a4, a3 + a4
        a_det = c2 - spec.h * p
        a_tr = c2 * s - 2.0 * c1 * phase.cot
        a_const = c2 * p - 2.0 * c1 * phase.cot * s + c0 * phase.kappa
    scale = max(abs(a_tr), abs(a_const), 1.0)
    return a_det, a_tr, a_const, abs(a_det) < 1e-12 * scale


def _residual(h11, h22, h12, alphas):
    a_det, a_tr, a_const = alphas
    det = h11 * h22 - h12.real**2 - h12.imag**2
    return a_det * det + a_tr * (h11 + h22) + a_const


def compute_intersection_numbers(problem: TorusProblem) -> IntersectionNumbers:
    """Grid quadrature of the mixed moments of the background field (unit
    total volume); invariant under Hessian perturbations of the potential."""
    n = problem.phase.n
    lam = eigen_tuples(*background_block(problem), problem.frozen)
    sig = _kernels.sigma_all(lam)
    vals = [float(np.mean(sig[:, n - k])) / math.comb(n, n - k) for k in range(n + 1)]
    return IntersectionNumbers(tuple(vals))


# ---------------------------------------------------------------------------
# Newton solve at fixed t.
# ---------------------------------------------------------------------------


@dataclass
class NewtonResult:
    u: np.ndarray
    converged: bool
    iterations: int
    residuals: list[float]
    min_cone_margin: float
    max_eigenvalue: float
    message: str = ""


class _State:
    """Fields derived from one iterate: block, eigenvalues, residual, margin."""

    def __init__(self, u, back, spec, phase, frozen):
        b11, b22, b12 = back
        h11, h22, h12 = complex_hessian(u)
        self.h11 = b11 + h11
        self.h22 = b22 + h22
        self.h12 = b12 + h12
        self.lam = eigen_tuples(self.h11, self.h22, self.h12, frozen)
        self.margin = float(np.min(csub_margin_batch(self.lam, spec, phase)))
        self.alphas = reduce_equation(spec, phase, frozen)[:3]
        self.resid = _residual(self.h11, self.h22, self.h12, self.alphas)
        self.max_resid = float(np.max(np.abs(self.resid)))
        self.max_eig = float(np.max(self.lam))


def _make_operator(state: _State, N: int):
    """Linearized residual as a LinearOperator plus its Fourier preconditioner."""
    a_det = state.alphas[0]
    g11 = a_det * state.h22 + state.alphas[1]
    g22 = a_det * state.h11 + state.alphas[1]
    g12re = -a_det * state.h12.real
    g12im = -a_det * state.h12.imag
    s11, s22, s12 = _hessian_symbols(N)
    shape = (N, N, N, N)
    size = N**4

    def apply(vflat):
        v = vflat.reshape(shape)
        vh = np.fft.fftn(v)
        v11 = np.fft.ifftn(vh * s11).real
        v22 = np.fft.ifftn(vh * s22).real
        v12 = np.fft.ifftn(vh * s12)
        out = (g11 * v11 + g22 * v22
               + 2.0 * (g12re * v12.real + g12im * v12.imag))
        out -= out.mean()
        return out.ravel()

    gm11, gm22 = float(np.mean(g11)), float(np.mean(g22))
    gm12 = complex(np.mean(g12re) + 1j * np.mean(g12im))
    sym = gm11 * s11 + gm22 * s22 + 2.0 * (gm12.conjugate() * s12).real
    sym = np.where(np.abs(sym) < 1e-30, -1.0, sym)

    def precond(rflat):
        r = rflat.reshape(shape)
        rh = np.fft.fftn(r) / sym
        rh[0, 0, 0, 0] = 0.0
        return np.fft.ifftn(rh).real.ravel()

    op = LinearOperator((size, size), matvec=apply, dtype=float)
    prec = LinearOperator((size, size), matvec=precond, dtype=float)
    return op, prec


def newton_solve(problem: TorusProblem, spec: LevelSpec, u0: np.ndarray | None = None,
                 back=None) -> NewtonResult:
    """Damped Newton with cone-exit rejection and zero-mean projection."""
    N = problem.N
    phase, frozen = problem.phase, problem.frozen
    if back is None:
        back = background_block(problem)
    u = np.zeros((N, N, N, N)) if u0 is None else np.array(u0, dtype=float)
    u -= u.mean()
    state = _State(u, back, spec, phase, frozen)
    if state.margin <= 0.0:
        raise ConeExitError(
            f"initial iterate outside the admissible cone (margin {state.margin:.3e})"
        )
    residuals = [state.max_resid]
    tol = problem.newton_tol
    for it in range(1, problem.max_newton + 1):
        if state.max_resid < tol:
            return NewtonResult(u, True, it - 1, residuals, state.margin,
                                state.max_eig)
        op, prec = _make_operator(state, N)
        rhs = -(state.resid - state.resid.mean()).ravel()
        delta, info = bicgstab(op, rhs, M=prec, rtol=1e-12, atol=0.0, maxiter=400)
        if info != 0:
            delta, info = lgmres(op, rhs, M=prec, rtol=1e-12, atol=0.0, maxiter=400)
            if info != 0:
                return NewtonResult(u, False, it, residuals, state.margin,
                                    state.max_eig, "linear solve stalled")
        delta = delta.reshape(u.shape)
        delta -= delta.mean()
        tau = 1.0
        while True:
            trial = u + tau * delta
            trial_state = _State(trial, back, spec, phase, frozen)
            if (trial_state.margin > 0.0
                    and trial_state.max_resid < state.max_resid * (1.0 - 1e-4 * tau)):
                u, state = trial, trial_state
                residuals.append(state.max_resid)
                break
            tau *= 0.5
            if tau < 1e-6:
                return NewtonResult(u, False, it, residuals, state.margin,
                                    state.max_eig, "damping underflow")
    converged = state.max_resid < tol
    return NewtonResult(u, converged, problem.max_newton, residuals,
                        state.margin, state.max_eig,
                        "" if converged else "iteration budget exhausted")


# ---------------------------------------------------------------------------
# Continuity march.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    newton_iters: int
    final_residual: float
    min_cone_margin: float
    max_eigenvalue: float
    osc_u: float


@dataclass
class ContinuityResult:
    field: GridField
    rows: list[DiagnosticsRow]
    reached_t: float
    completed: bool
    omega: IntersectionNumbers
    message: str = ""


def continuity_solve(problem: TorusProblem, path: PathSpec, t_max: float = 1.0,
                     dt0: float = 0.25, dt_min: float = 1e-4) -> ContinuityResult:
    """March t from 0 to t_max with adaptive steps and warm starts.

    Refuses to start when the problem's intersection numbers fail the region
    test or the background leaves the subsolution cone at the original
    equation; a step-size underflow yields a partial-path report.
    """
    phase = problem.phase
    omega = compute_intersection_numbers(problem)
    rel = max(abs(v) for v in omega.omega)
    mismatch = max(abs(a - b) for a, b in zip(omega.omega, path.omega.omega))
    if mismatch > 1e-8 * max(rel, 1.0):
        raise DomainError("path was planned for different intersection numbers")
    if phase.n == 3:
        ok, _ = region_test_3(omega, phase)
    else:
        ok, _ = region_test_4(omega, phase, path.ell)
    if not ok:
        raise RegionRefusedError("intersection numbers fail the solvability region test")

    back = background_block(problem)
    mu_back = eigen_tuples(*back, problem.frozen)
    end_margin = float(np.min(csub_margin_batch(mu_back, path.level_at(1.0), phase)))
    if end_margin <= 0.0:
        raise ConeExitError(
            f"background leaves the subsolution cone at t=1 (margin {end_margin:.3e})"
        )

    rows: list[DiagnosticsRow] = []
    u = np.zeros((problem.N,) * 4)
    t = 0.0
    dt = min(dt0, max(t_max, 0.0)) if t_max > 0 else 0.0

    def accept(t_now, result):
        bmargin = float(np.min(csub_margin_batch(mu_back, path.level_at(t_now), phase)))
        if bmargin <= 0.0:
            raise ConeExitError(
                f"background subsolution margin nonpositive at t={t_now:.6f}"
            )
        rows.append(DiagnosticsRow(
            t=t_now, newton_iters=result.iterations,
            final_residual=result.residuals[-1],
            min_cone_margin=min(result.min_cone_margin, bmargin),
            max_eigenvalue=result.max_eigenvalue,
            osc_u=float(result.u.max() - result.u.min()),
        ))

    first = newton_solve(problem, path.level_at(0.0), u, back=back)
    if not first.converged:
        return ContinuityResult(GridField(u, problem.N, phase.n, phase.theta_hat),
                                rows, 0.0, False, omega,
                                f"t=0 solve failed: {first.message}")
    u = first.u
    accept(0.0, first)

    while t < t_max - 1e-14:
        step = min(dt, t_max - t)
        t_try = t + step
        result = newton_solve(problem, path.level_at(t_try), u, back=back)
        if result.converged:
            t = t_try
            u = result.u
            accept(t, result)
            if result.iterations <= 3:
                dt = min(dt * 2.0, dt0)
        else:
            dt = step / 2.0
            if dt < dt_min:
                return ContinuityResult(
                    GridField(u, problem.N, phase.n, phase.theta_hat), rows, t,
                    False, omega, "step size underflow; partial path")
    return ContinuityResult(GridField(u, problem.N, phase.n, phase.theta_hat),
                            rows, t, True, omega)


def verify_phase(u: np.ndarray | GridField, problem: TorusProblem) -> float:
    """Max pointwise angle defect of the back-substituted eigenvalues."""
    vals = u.values if isinstance(u, GridField) else u
    phase = problem.phase
    state_lam = eigen_tuples(*(_add_hessian(background_block(problem), vals)),
                             problem.frozen)
    mu = x_to_chi(state_lam, phase)
    angles = np.sum(np.arctan(mu), axis=1)
    return float(np.max(np.abs(angles - phase.theta_hat)))


def _add_hessian(back, u):
    h11, h22, h12 = complex_hessian(u)
    return back[0] + h11, back[1] + h22, back[2] + h12


# ---------------------------------------------------------------------------
# Portable text format for solved fields.
# ---------------------------------------------------------------------------


def save_field(path, grid: GridField) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{grid.N} {grid.n} {format(grid.theta_hat, '.17g')}\n")
        for v in grid.values.ravel():
            fh.write(format(float(v), ".17g") + "\n")


def load_field(path) -> GridField:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise DomainError("field file header must be: N n theta_hat")
        N, n, theta = int(header[0]), int(header[1]), float(header[2])
        vals = np.array([float(line) for line in fh if line.strip()])
    if vals.size != N**4:
        raise DomainError(f"expected {N**4} grid values, found {vals.size}")
    return GridField(vals.reshape((N, N, N, N)), N, n, theta)
