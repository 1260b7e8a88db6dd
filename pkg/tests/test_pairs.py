import numpy as np
import pytest

from pairprox import linalg, pairs, problems
from pairprox.errors import HypothesisViolated, SingularJacobian
from pairprox.operators import AffineOperator, KernelSpec, NonlinearOperator, identity_kernel

from conftest import random_rank_deficient


class TestCertifyLinear:
    def test_identity(self):
        c = pairs.certify_linear_pair(np.eye(3), np.eye(3))
        assert c.status == pairs.STRONGLY_MONOTONE
        assert c.beta == pytest.approx(1.0)

    def test_example1_with_e11(self, A1, e11):
        z = [1.0, -2.0, 0.0]
        # z1 * (A z)_1 = 1 * (1 - 4) = -3
        assert z[0] * (A1[0, 0] * z[0] + A1[0, 1] * z[1] + A1[0, 2] * z[2]) == -3.0
        c = pairs.certify_linear_pair(A1, e11)
        assert c.status == pairs.NOT_MONOTONE
        assert pairs.quadratic_pair_value(A1, e11, c.witness) < 0

    def test_example1_with_v1_refuted(self, A1):
        c = pairs.certify_linear_pair(A1, problems.EXAMPLE1_V1)
        assert c.status == pairs.NOT_MONOTONE
        assert pairs.quadratic_pair_value(A1, problems.EXAMPLE1_V1, c.witness) < 0

    def test_example2_diag(self):
        A = problems.EXAMPLE2_A
        c = pairs.certify_linear_pair(A, A)
        assert c.status == pairs.STRONGLY_MONOTONE
        assert c.beta == pytest.approx(1.0, abs=1e-12)

    def test_soundness_random(self, rng):
        """A monotone verdict is never contradicted by sampled quadratic forms."""
        for _ in range(100):
            n = rng.integers(1, 7)
            A, B = rng.standard_normal((n, n)), rng.standard_normal((n, n))
            c = pairs.certify_linear_pair(A, B)
            Z = rng.standard_normal((500, n))
            q = np.einsum("ij,ij->i", Z @ A.T, Z @ B.T) / np.sum(Z * Z, axis=1)
            if c.is_monotone:
                assert q.min() >= -1e-8 * max(1.0, c.scale)
            else:
                assert pairs.quadratic_pair_value(A, B, c.witness) < 0
                assert np.linalg.norm(c.witness) == pytest.approx(1.0)
            assert q.min() >= c.lambda_min - 1e-9 * max(1.0, c.scale)

    def test_describe(self):
        text = pairs.certify_linear_pair(np.eye(2), -np.eye(2)).describe()
        assert "status: not_monotone" in text and "witness:" in text


class TestPerturbation:
    def test_diagonal(self):
        k = pairs.construct_kernel_perturbation(np.diag([2.0, 3.0]), np.eye(2))
        np.testing.assert_array_equal(k.B, np.diag([3.0, 4.0]))
        assert k.provenance == "perturbation"
        assert pairs.certify_linear_pair(np.diag([2.0, 3.0]), k.B).is_monotone

    def test_example1_e11_violates_hypothesis(self, A1, e11):
        with pytest.raises(HypothesisViolated) as info:
            pairs.construct_kernel_perturbation(A1, e11)
        exc = info.value
        assert exc.value < 0
        assert pairs.quadratic_pair_value(e11, A1, exc.witness) == pytest.approx(exc.value)
        # the hand witness from the arithmetic oracle fails the hypothesis too
        assert pairs.quadratic_pair_value(e11, A1, np.array([1.0, -2.0, 0.0])) == -3.0

    def test_check_can_be_skipped(self, A1, e11):
        k = pairs.construct_kernel_perturbation(A1, e11, check=False)
        np.testing.assert_array_equal(k.B, A1 + e11)

    def test_zero_perturbation(self, A1):
        k = pairs.construct_kernel_perturbation(A1, np.zeros((3, 3)))
        np.testing.assert_array_equal(k.B, A1)
        a = pairs.certify_linear_pair(A1, k.B)
        b = pairs.certify_linear_pair(A1, A1)
        assert a.status == b.status and a.lambda_min == b.lambda_min

    def test_property_random(self, rng):
        for _ in range(100):
            n = rng.integers(1, 7)
            A = rng.standard_normal((n, n))
            P = rng.standard_normal((n, n))
            A1 = P @ P.T @ A  # A1^T A = A^T P P^T A is PSD
            k = pairs.construct_kernel_perturbation(A, A1)
            c = pairs.certify_linear_pair(A, k.B)
            assert c.lambda_min >= -1e-8 * max(1.0, c.scale)


class TestSymmetric:
    def test_diag_with_zero(self):
        k = pairs.construct_kernel_symmetric(np.diag([2.0, 0.0]))
        np.testing.assert_allclose(k.B, np.diag([2.0, 1.0]), atol=1e-15)
        assert pairs.certify_linear_pair(np.diag([2.0, 0.0]), k.B).is_monotone

    def test_zero(self):
        np.testing.assert_allclose(pairs.construct_kernel_symmetric(np.zeros((3, 3))).B, np.eye(3), atol=1e-15)

    def test_rank_one_block(self):
        A = np.ones((2, 2))
        k = pairs.construct_kernel_symmetric(A)
        # hand eigendecomposition: (1,1)/sqrt2 -> 2, (1,-1)/sqrt2 -> 0 replaced by 1
        u, w = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
        expected = 2 * np.outer(u, u) + np.outer(w, w)
        np.testing.assert_allclose(k.B, expected, atol=1e-14)
        M = linalg.sym_part(A.T @ k.B)
        np.testing.assert_allclose(linalg.sym_eig(M).eigenvalues, [4.0, 0.0], atol=1e-13)

    def test_nonsymmetric_rejected(self, A1):
        with pytest.raises(Exception):
            pairs.construct_kernel_symmetric(A1)


class TestFactored:
    def test_invertible_positive_diagonal(self):
        A = np.diag([1.0, 2.0, 3.0])
        k = pairs.construct_kernel_factored(A)
        np.testing.assert_allclose(k.B, A, atol=1e-14)
        assert pairs.certify_linear_pair(A, k.B).status == pairs.STRONGLY_MONOTONE

    def test_example1(self, A1):
        k = pairs.construct_kernel_factored(A1)
        assert abs(linalg.det(k.B)) > 1e-10
        c = pairs.certify_linear_pair(A1, k.B)
        assert c.status == pairs.MONOTONE
        assert abs(c.lambda_min) <= 1e-8

    def test_zero(self):
        k = pairs.construct_kernel_factored(np.zeros((3, 3)))
        np.testing.assert_allclose(k.B.T @ k.B, np.eye(3), atol=1e-14)
        assert pairs.certify_linear_pair(np.zeros((3, 3)), k.B).is_monotone

    def test_structure(self, rng):
        """A^T B = V Sigma D' V^T is symmetric PSD by construction."""
        for _ in range(50):
            n = rng.integers(1, 8)
            A = random_rank_deficient(rng, n, rng.integers(0, n + 1))
            k = pairs.construct_kernel_factored(A)
            M = A.T @ k.B
            assert linalg.norm_max(M - M.T) <= 1e-9 * max(1.0, linalg.norm_max(M))


class TestSampled:
    def test_linear_case_bounds_infimum(self, rng):
        for seed in range(5):
            M = rng.standard_normal((3, 3))
            B = rng.standard_normal((3, 3))
            c = pairs.certify_nonlinear_pair_sampled(
                AffineOperator(M, np.zeros(3)), KernelSpec(B), -np.ones(3), np.ones(3), samples=300, seed=seed)
            lam = pairs.certify_linear_pair(M, B).lambda_min
            assert c.lambda_min >= lam - 1e-6

    def test_example2_inconclusive_positive(self):
        c = pairs.certify_nonlinear_pair_sampled(
            problems.example2(), problems.example2_kernel(), -3 * np.ones(3), 3 * np.ones(3),
            samples=100_000, seed=0)
        assert c.status == pairs.INCONCLUSIVE
        assert c.lambda_min > 0

    def test_negative_identity(self):
        F = NonlinearOperator(2, lambda x: -x)
        c = pairs.certify_nonlinear_pair_sampled(F, identity_kernel(2), -np.ones(2), np.ones(2), samples=100)
        assert c.status == pairs.NOT_MONOTONE
        x, y = c.witness_pair
        assert (-(x - y)) @ (x - y) < 0


class TestLocal:
    def test_linear(self):
        M = np.array([[2.0, 1.0], [0.0, 1.0]])
        est = pairs.estimate_local_strong_monotonicity(AffineOperator(M, np.zeros(2)), [0.0, 0.0], 1.0, samples=2000)
        lam = linalg.min_sym_eigenvalue(M.T @ M)
        assert est.alpha_hat >= lam - 1e-10
        assert est.alpha_hat == pytest.approx(lam, rel=0.05)
        assert est.c ** 2 == pytest.approx(lam, rel=1e-10)

    def test_cubic(self):
        f = NonlinearOperator(1, lambda x: x ** 3, jacobian=lambda x: np.array([[3.0 * x[0] ** 2]]))
        est = pairs.estimate_local_strong_monotonicity(f, [1.0], 0.1, samples=5000)
        # grid oracle: min over the ball of the secant slope (x^2 + xy + y^2) times f'(1) = 3
        g = np.linspace(0.9, 1.1, 2001)
        X, Y = np.meshgrid(g, g)
        oracle = np.min(3.0 * (X ** 2 + X * Y + Y ** 2))
        assert oracle == pytest.approx(7.29, abs=1e-9)
        assert est.alpha_hat >= oracle - 1e-9
        assert est.alpha_hat == pytest.approx(oracle, rel=0.02)
        assert est.alpha_hat >= est.theoretical_floor

    def test_singular(self):
        f = NonlinearOperator(1, lambda x: x ** 2, jacobian=lambda x: np.array([[2.0 * x[0]]]))
        with pytest.raises(SingularJacobian):
            pairs.estimate_local_strong_monotonicity(f, [0.0], 0.1)
