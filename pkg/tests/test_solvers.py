import warnings

import numpy as np
import pytest

from pairprox import problems
from pairprox.errors import (
    LeftNeighborhood,
    NoConvergence,
    ResolventFailure,
    ScheduleInvalid,
    ScheduleWarning,
    SingularJacobian,
)
from pairprox.experiments import DEFAULT_ALPHA, DEFAULT_GAMMA
from pairprox.operators import AffineOperator, NonlinearOperator, identity_kernel
from pairprox.solvers import (
    QuasiNewtonConfig,
    Schedule,
    SolverConfig,
    estimate_quasi_newton_constants,
    gippa_run,
    newton_run,
    quasi_newton_run,
    validate_schedules,
)

from conftest import random_monotone_affine


def cubic():
    return NonlinearOperator(1, lambda x: x ** 3 - 1, jacobian=lambda x: np.array([[3.0 * x[0] ** 2]]))


def ppa_recursion(A, b, gamma, x1, steps):
    """Direct (I + gamma A)^{-1}(x + gamma b) iterates, independent of the library."""
    M = np.eye(len(b)) + gamma * A
    xs = [x1]
    for _ in range(steps):
        xs.append(np.linalg.solve(M, xs[-1] + gamma * b))
    return xs[1:]


class TestSchedule:
    def test_default_values(self):
        assert DEFAULT_GAMMA(0) == pytest.approx(0.13)
        assert DEFAULT_GAMMA(10) == pytest.approx(0.115)
        assert DEFAULT_ALPHA(0) == 0.0
        assert DEFAULT_ALPHA(5) == 0.3
        assert DEFAULT_ALPHA(2) == pytest.approx(2 / 12)
        assert DEFAULT_ALPHA(100) == 0.3

    def test_roundtrip(self):
        for s in (Schedule.constant(0.2), DEFAULT_GAMMA, DEFAULT_ALPHA):
            assert Schedule.from_dict(s.to_dict()) == s

    def test_unknown_kind(self):
        with pytest.raises(ScheduleInvalid):
            Schedule.from_dict({"kind": "cosine"})

    def _cfg(self, alpha, gamma=DEFAULT_GAMMA):
        return SolverConfig(gamma, alpha, np.zeros(1), np.zeros(1), max_iter=500)

    def test_ramp_satisfies_theory(self):
        v = validate_schedules(self._cfg(DEFAULT_ALPHA))
        assert v.alpha_nondecreasing and v.alpha_cap == 0.3 and v.theory_satisfied
        assert v.gamma_inf == pytest.approx(0.1 + 0.3 / 510)

    def test_half_fails_theory(self):
        assert not validate_schedules(self._cfg(Schedule.constant(0.5))).theory_satisfied

    def test_zero_is_valid(self):
        assert validate_schedules(self._cfg(Schedule.constant(0.0))).theory_satisfied

    def test_decreasing_alpha_flagged(self):
        v = validate_schedules(self._cfg(Schedule.offset_inverse(0.0, 1.0, 5.0)))
        assert not v.alpha_nondecreasing and not v.theory_satisfied

    def test_warning_emitted(self):
        F = AffineOperator(np.eye(1), np.zeros(1))
        cfg = SolverConfig(Schedule.constant(1.0), Schedule.constant(0.5), [1.0], [1.0], max_iter=5)
        with pytest.warns(ScheduleWarning):
            gippa_run(F, identity_kernel(1), cfg)

    def test_invalid_value_raises(self):
        F = AffineOperator(np.eye(1), np.zeros(1))
        cfg = SolverConfig(Schedule.constant(-1.0), Schedule.constant(0.0), [1.0], [1.0], max_iter=5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScheduleWarning)
            with pytest.raises(ScheduleInvalid):
                gippa_run(F, identity_kernel(1), cfg)


class TestGippa:
    def test_start_at_solution(self):
        x = problems.EXAMPLE1_SOLUTION
        cfg = SolverConfig(DEFAULT_GAMMA, DEFAULT_ALPHA, x, x)
        tr = gippa_run(problems.example1(), problems.example1_kernel("v1"), cfg)
        assert len(tr) == 1 and tr.termination == "step"
        np.testing.assert_allclose(tr.final, x, atol=1e-12)

    def test_ppa_reduction(self, rng):
        for _ in range(10):
            n = rng.integers(1, 6)
            A, b = random_monotone_affine(rng, n)
            x0 = rng.standard_normal(n)
            cfg = SolverConfig(Schedule.constant(0.7), Schedule.constant(0.0), x0, x0,
                               tol_step=1e-300, tol_residual=1e-300, max_iter=30)
            tr = gippa_run(AffineOperator(A, b), identity_kernel(n), cfg)
            ref = ppa_recursion(A, b, 0.7, x0, len(tr))
            for rec, xr in zip(tr.records, ref):
                np.testing.assert_allclose(rec.x_new, xr, rtol=0, atol=1e-12 * max(1, np.abs(xr).max()))

    def test_inertial_step_definition(self):
        x0, x1 = problems.EXAMPLE1_X0, problems.EXAMPLE1_X1
        cfg = SolverConfig(DEFAULT_GAMMA, Schedule.constant(0.25), x0, x1, max_iter=3)
        tr = gippa_run(problems.example1(), problems.example1_kernel("v1"), cfg)
        np.testing.assert_allclose(tr.records[0].y, x1 + 0.25 * (x1 - x0))
        np.testing.assert_allclose(tr.records[1].y, tr.records[1].x + 0.25 * (tr.records[1].x - x1))

    def test_step_certificate_on_stop(self):
        """A step stop means y_n is (numerically) a fixed point, hence a zero of F."""
        F, k = problems.example1(), problems.example1_kernel("v1")
        cfg = SolverConfig(DEFAULT_GAMMA, DEFAULT_ALPHA, problems.EXAMPLE1_X0, problems.EXAMPLE1_X1,
                           tol_step=1e-10, tol_residual=1e-300)
        tr = gippa_run(F, k, cfg)
        assert tr.termination == "step"
        last = tr.records[-1]
        # gamma F(x_{n+1}) = B (y_n - x_{n+1}) bounds the residual by the step gap
        bound = np.abs(k.B).sum(axis=1).max() * last.step_gap / last.gamma
        assert last.residual <= bound * (1 + 1e-6) + 1e-12
        assert last.u_norm == pytest.approx(last.residual, rel=1e-4)

    def test_example1_converges_to_some_zero(self):
        cfg = SolverConfig(DEFAULT_GAMMA, DEFAULT_ALPHA, problems.EXAMPLE1_X0, problems.EXAMPLE1_X1, max_iter=500)
        tr = gippa_run(problems.example1(), problems.example1_kernel("v1"), cfg, reference=problems.EXAMPLE1_SOLUTION)
        assert tr.converged
        assert tr.records[-1].residual <= 1e-6

    def test_example2_near_published_root(self):
        cfg = SolverConfig(Schedule.constant(0.5), DEFAULT_ALPHA, problems.EXAMPLE2_X0, problems.EXAMPLE2_X1)
        tr = gippa_run(problems.example2(), problems.example2_kernel(), cfg)
        assert tr.converged
        assert np.linalg.norm(tr.final - problems.EXAMPLE2_APPROX_SOLUTION) <= 5e-2

    def test_deterministic(self):
        cfg = SolverConfig(Schedule.constant(0.5), DEFAULT_ALPHA, problems.EXAMPLE2_X0, problems.EXAMPLE2_X1)
        a = gippa_run(problems.example2(), problems.example2_kernel(), cfg)
        b = gippa_run(problems.example2(), problems.example2_kernel(), cfg)
        assert np.array_equal(a.iterates, b.iterates)

    def test_singular_everywhere(self):
        F = AffineOperator(np.zeros((2, 2)), np.ones(2))
        from pairprox.operators import KernelSpec
        cfg = SolverConfig(Schedule.constant(1.0), Schedule.constant(0.0), np.zeros(2), np.zeros(2))
        with pytest.raises(ResolventFailure) as info:
            gippa_run(F, KernelSpec(np.zeros((2, 2))), cfg)
        assert info.value.n == 1
        assert info.value.trace.termination == "error"

    def test_singular_gamma_is_retried(self):
        # gamma A + B singular exactly at gamma = 1
        A = np.diag([1.0, 2.0])
        from pairprox.operators import KernelSpec
        B = np.diag([-1.0, 1.0])
        cfg = SolverConfig(Schedule.constant(1.0), Schedule.constant(0.0), np.ones(2), np.ones(2), max_iter=2)
        tr = gippa_run(AffineOperator(A, np.zeros(2)), KernelSpec(B), cfg)
        assert tr.records[0].gamma == pytest.approx(1.0 + 1e-6)

    def test_max_iter(self):
        cfg = SolverConfig(DEFAULT_GAMMA, DEFAULT_ALPHA, problems.EXAMPLE1_X0, problems.EXAMPLE1_X1, max_iter=3)
        tr = gippa_run(problems.example1(), problems.example1_kernel("v1"), cfg)
        assert tr.termination == "max_iter" and len(tr) == 3 and not tr.converged


class TestQuasiNewton:
    def test_linear_one_step(self, rng):
        for _ in range(20):
            n = rng.integers(1, 6)
            M = rng.standard_normal((n, n)) + n * np.eye(n)
            c = rng.standard_normal(n)
            F = AffineOperator(M, c)
            tr = quasi_newton_run(F, QuasiNewtonConfig(rng.standard_normal(n), step=1.0), rng.standard_normal(n))
            assert len(tr) == 1
            np.testing.assert_allclose(tr.final, np.linalg.solve(M, c), atol=1e-12)

    def test_cubic_single_step(self):
        cfg = QuasiNewtonConfig([1.0], step=1.0, max_iter=1)
        with pytest.raises(NoConvergence) as info:
            quasi_newton_run(cubic(), cfg, [1.2])
        x1 = info.value.trace.records[0].x_new[0]
        assert x1 == pytest.approx(1.2 - (1.2 ** 3 - 1) / 3, abs=1e-12)
        assert x1 == pytest.approx(0.9573333333333333, abs=1e-12)

    def test_singular_reference(self):
        with pytest.raises(SingularJacobian):
            quasi_newton_run(cubic(), QuasiNewtonConfig([0.0], step=1.0), [1.2])

    def test_contraction_bound(self):
        consts = estimate_quasi_newton_constants(cubic(), [1.1], 0.2)
        tr = quasi_newton_run(cubic(), QuasiNewtonConfig([1.1], step=consts.step, tol=1e-13), [1.25])
        J = 3 * 1.1 ** 2
        errs = [abs(J * (x[0] - 1.0)) for x in tr.iterates]
        ratios = [errs[k + 1] / errs[k] for k in range(len(errs) - 1) if errs[k] > 1e-14]
        assert ratios and max(ratios) <= consts.contraction_bound + 1e-6
        assert tr.final[0] == pytest.approx(1.0, abs=1e-12)

    def test_default_step(self):
        tr = quasi_newton_run(cubic(), QuasiNewtonConfig([1.1], tol=1e-12), [1.2])
        assert tr.converged and tr.final[0] == pytest.approx(1.0, abs=1e-11)

    def test_left_neighborhood(self):
        cfg = QuasiNewtonConfig([1.0], step=1.0, trust_radius=0.1)
        with pytest.raises(LeftNeighborhood) as info:
            quasi_newton_run(cubic(), cfg, [3.0])
        assert info.value.index == 1


class TestNewton:
    def test_linear(self):
        M = np.array([[3.0, 1.0], [1.0, 2.0]])
        tr = newton_run(AffineOperator(M, np.array([1.0, 1.0])), [5.0, -5.0])
        assert len(tr) == 1
        np.testing.assert_allclose(tr.final, np.linalg.solve(M, [1.0, 1.0]), atol=1e-14)

    def test_square_root_step(self):
        f = NonlinearOperator(1, lambda x: x ** 2 - 4, jacobian=lambda x: np.array([[2.0 * x[0]]]))
        tr = newton_run(f, [3.0])
        assert tr.records[0].x_new[0] == pytest.approx(3 - 5 / 6, abs=1e-14)
        assert tr.final[0] == pytest.approx(2.0, abs=1e-12)

    def test_singular_start(self):
        f = NonlinearOperator(1, lambda x: x ** 2, jacobian=lambda x: np.array([[2.0 * x[0]]]))
        with pytest.raises(SingularJacobian) as info:
            newton_run(f, [0.0])
        assert info.value.index == 0

    def test_bad_damping(self):
        with pytest.raises(ValueError):
            newton_run(cubic(), [1.0], h=0.0)
