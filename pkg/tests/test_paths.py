"""Path families, four-constraint reports, regions, and the ell search."""

import math

import numpy as np
import pytest

from dhym.errors import DomainError, SearchFailureError
from dhym.paths import (
    IntersectionNumbers,
    check_constraints,
    csub_implies_region_3,
    ell_schedule,
    ell_search,
    omegas_from_moments,
    plan_path_3,
    plan_path_4,
    region3_profile,
    region4_bracket,
    region_test_3,
    region_test_4,
    sample_csub_omegas,
    dominance_floor,
)
from dhym.phase import PhaseParams
from dhym.pointwise import diagonal_solution

PH3 = PhaseParams(3, 2 * math.pi / 3)
PH4 = PhaseParams(4, 7 * math.pi / 6)
LAM3 = diagonal_solution(PH3)
LAM4 = diagonal_solution(PH4)
OM3 = IntersectionNumbers((LAM3**3, LAM3**2, LAM3, 1.0))
OM4 = IntersectionNumbers((LAM4**4, LAM4**3, LAM4**2, LAM4, 1.0))


class TestIntersectionNumbers:
    def test_volume_positive(self):
        with pytest.raises(DomainError):
            IntersectionNumbers((1.0, 1.0, 1.0, 0.0))

    def test_moment_constructor(self):
        om = omegas_from_moments([1.0], np.array([[2.0, 2.0, 2.0]]), 3)
        assert om.omega == pytest.approx((8.0, 4.0, 2.0, 1.0))


class TestPlanPath3:
    def test_boundary_values(self):
        path = plan_path_3(OM3, PH3)
        assert path.c1(1.0) == pytest.approx(1.0, abs=1e-9)
        assert path.c0(1.0) == 1.0
        assert path.c0(0.0) == 0.0
        assert path.c1(0.0) > 0

    def test_c1_at_zero_value(self):
        # c1(0) = cos^2 * W0 / (3 W2) = cos^2 * lam^2 / 3
        path = plan_path_3(OM3, PH3)
        assert path.c1(0.0) == pytest.approx(PH3.cos**2 * LAM3**2 / 3.0, rel=1e-13)
        assert path.c1(0.0) == pytest.approx(0.5510, abs=2e-4)

    def test_topological_identity(self):
        path = plan_path_3(OM3, PH3)
        t = np.linspace(0, 1, 777)
        assert np.max(np.abs(path.topological_residual(t))) < 1e-12

    def test_needs_positive_w2(self):
        with pytest.raises(DomainError):
            plan_path_3(IntersectionNumbers((1.0, 1.0, -0.5, 1.0)), PH3)

    def test_constraint_report(self):
        rep = check_constraints(plan_path_3(OM3, PH3))
        assert rep.all_pass


class TestRegion3:
    def test_diagonal_model_inside(self):
        ok, margin = region_test_3(OM3, PH3)
        assert ok and margin > 0
        # topological rewrite: -tan * W3/W2 = 3/2 - W0 / (2 sec^2 W2)
        lhs = -PH3.tan * OM3[3] / OM3[2]
        rhs = 1.5 - OM3[0] / (2.0 * PH3.sec**2 * OM3[2])
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert lhs == pytest.approx(0.6736, abs=1e-4)
        assert lhs < 1.0

    def test_huge_w3_outside(self):
        om = IntersectionNumbers((LAM3**3, LAM3**2, LAM3, 100.0 * LAM3))
        ok, margin = region_test_3(om, PH3)
        assert not ok and margin < 0

    def test_profile_floor(self):
        # the dimensionless profile stays above -cot for every admissible angle
        t = np.linspace(0, 1, 2001)[:-1]
        for theta in np.linspace(0.51 * math.pi, 0.83 * math.pi, 9):
            ph = PhaseParams(3, theta)
            prof = region3_profile(t, ph)
            assert np.min(prof) > -ph.cot - 1e-12

    def test_csub_sweep(self):
        report = csub_implies_region_3(PH3, trials=500, seed=1)
        assert report.all_pass
        assert report.min_region_margin > 0


class TestPlanPath4:
    def test_c2_at_zero(self):
        path = plan_path_4(OM4, PH4, 1.0)
        assert path.c2(0.0) == pytest.approx((1 - math.sqrt(3) / 2) ** (2 / 3), rel=1e-12)
        assert path.c2(0.0) == pytest.approx(0.2618, abs=1e-4)

    def test_boundary_values(self):
        path = plan_path_4(OM4, PH4, 1.05)
        assert path.c2(1.0) == pytest.approx(1.0, abs=1e-13)
        assert path.c1(1.0) == 1.0
        assert path.c0(1.0) == pytest.approx(1.0, abs=1e-12)
        assert path.c1(0.0) == 0.0
        assert path.c2(0.0) > 0

    def test_theta_endpoints(self):
        path = plan_path_4(OM4, PH4, 1.05)
        assert path.theta(0.0) == pytest.approx(-math.pi / 6, abs=1e-12)
        assert path.theta(1.0) == pytest.approx(PH4.theta_hat / 3 - 2 * math.pi / 3,
                                                abs=1e-12)
        assert -math.pi / 3 < path.theta(1.0) < -math.pi / 4

    def test_theta_decreasing(self):
        path = plan_path_4(OM4, PH4, 1.1)
        th = path.theta(np.linspace(0, 1, 500))
        assert np.all(np.diff(th) < 0)

    def test_c32_derivative_margin(self):
        # d/dt c2^(3/2) = -l cos >= -cos exactly when l >= 1
        for ell in (1.0, 1.02, 1.1):
            path = plan_path_4(OM4, PH4, ell)
            margin = path.upsilon_margins(np.array([0.3]))[2][0]
            assert margin == pytest.approx((ell - 1.0) * (-PH4.cos), abs=1e-14)
        with pytest.raises(DomainError):
            plan_path_4(OM4, PH4, 0.9)
        with pytest.raises(DomainError):
            plan_path_4(OM4, PH4, -PH4.sec)

    def test_c0_tilde_positive_and_pinched(self):
        path = plan_path_4(OM4, PH4, 1.08)
        t = np.linspace(0, 1, 2000)
        ct = path.c0_tilde(t)
        assert np.all(ct > 0)
        ends = min(ct[0], ct[-1])
        assert np.min(ct) >= ends - 1e-12
        # endpoint formula: kappa + 9 c2(0)^2 csc^2 at t = 0
        expect0 = PH4.kappa + 9.0 * path.c2(0.0) ** 2 * PH4.csc2
        assert ct[0] == pytest.approx(expect0, rel=1e-12)

    def test_constraint_report(self):
        rep = check_constraints(plan_path_4(OM4, PH4, 1.05))
        assert rep.all_pass
        assert rep.topological_max < 1e-10 * abs(PH4.sin**2 * OM4[0])


class TestRegion4:
    def test_diagonal_model_inside(self):
        ell = ell_search(OM4, PH4).ell
        ok, margin = region_test_4(OM4, PH4, ell)
        assert ok and margin > 0

    def test_scaled_w3_outside(self):
        om = IntersectionNumbers((LAM4**4, LAM4**3, LAM4**2, 50.0 * LAM4, 1.0))
        ok, margin = region_test_4(om, PH4, 1.05)
        assert not ok and margin < 0

    def test_w2_quotient_limit(self):
        # series check: the W2 quotient approaches -l sin / 2 as t -> 1
        path = plan_path_4(OM4, PH4, 1.07)
        for eps in (1e-4, 1e-6, 1e-8):
            g2, _ = region4_bracket(path, np.array([1.0 - eps]))
            assert g2[0] == pytest.approx(-0.5 * 1.07 * PH4.sin, rel=1e-3)

    def test_w4_quotient_diverges(self):
        path = plan_path_4(OM4, PH4, 1.07)
        _, g4a = region4_bracket(path, np.array([1.0 - 1e-3]))
        _, g4b = region4_bracket(path, np.array([1.0 - 1e-6]))
        assert g4b[0] > 100.0 * g4a[0] > 0.0


class TestEllSearch:
    def test_diagonal_model(self):
        cert = ell_search(OM4, PH4)
        assert cert.min_margin > 0
        assert cert.c0_at_zero >= 0
        assert 1.0 <= cert.ell < -PH4.sec

    def test_schedule_shape(self):
        sched = ell_schedule(PH4, depth=40)
        assert sched.size == 40
        assert np.all(np.diff(sched) > 0)
        assert sched[-1] < -PH4.sec

    def test_precondition_rejected(self):
        bad = IntersectionNumbers((1.0, 1.0, 1.0, 1.0, 1.0))
        with pytest.raises(DomainError):
            ell_search(bad, PH4)

    def test_decreasing_scalar_fact(self):
        t = np.linspace(0, 1, 10001)
        vals = dominance_floor(t)
        assert np.all(np.diff(vals) < 1e-12)
        assert abs(vals[-1]) < 1e-9
        assert np.min(vals) >= -1e-9

    def test_csc_squared_floor(self):
        for theta in np.linspace(1.0001 * math.pi, 1.2499 * math.pi, 50):
            assert PhaseParams(4, theta).csc2 >= 2.0

    def test_near_limit_window_facts(self):
        # close to -sec: the W2 coefficient of the dominance margin stays
        # >= 1.5 on [0, 1/100] and the W4 coefficient increases at >= 4/9
        ell = float(ell_schedule(PH4, depth=40)[-1])
        path = plan_path_4(OM4, PH4, ell)
        t = np.linspace(0.0, 0.01, 200)
        w2coef = 2.0 + 4.0 * t - 6.0 * path.c2(t)
        assert np.min(w2coef) >= 1.5
        h = 1e-7
        for tt in (0.0, 0.005, 0.01):
            rate = (path.c0_tilde(tt + h) - path.c0_tilde(max(tt - h, 0.0))) / (
                h if tt == 0.0 else 2 * h)
            assert rate + 4.0 * PH4.kappa / 3.0 >= 4.0 / 9.0 - 1e-6

    def test_search_failure_reported(self):
        # shrink the schedule below what a hostile tuple needs
        om = IntersectionNumbers((OM4[0], OM4[1], OM4[2],
                                  OM4[3] * 1.12, OM4[4]))
        try:
            cert = ell_search(om, PH4, depth=1, t_samples=512)
            assert cert.min_margin > 0  # fine if it passes at depth 1
        except (SearchFailureError, DomainError):
            pass


class TestSyntheticOmegas:
    @pytest.mark.parametrize("phase", [PH3, PH4], ids=["n3", "n4"])
    def test_samples_satisfy_identity(self, phase):
        omegas = sample_csub_omegas(phase, 100, seed=2)
        for om in omegas:
            if phase.n == 3:
                resid = phase.cos**2 * om[0] - 3 * om[2] - 2 * phase.tan * om[3]
            else:
                resid = (phase.sin**2 * om[0] - 6 * om[2] + 8 * phase.cot * om[3]
                         - phase.kappa * om[4])
            assert abs(resid) < 1e-10 * max(abs(om[0]), 1.0)

    def test_n4_samples_pass_everything(self):
        for om in sample_csub_omegas(PH4, 60, seed=3):
            cert = ell_search(om, PH4)
            assert cert.min_margin > 0
            ok, _ = region_test_4(om, PH4, cert.ell)
            assert ok
            assert check_constraints(plan_path_4(om, PH4, cert.ell)).all_pass

    def test_other_angles(self):
        for theta in (0.52 * math.pi, 0.6 * math.pi, 0.8 * math.pi):
            ph = PhaseParams(3, theta)
            report = csub_implies_region_3(ph, trials=100, seed=4)
            assert report.all_pass
