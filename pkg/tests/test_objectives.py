import numpy as np
import pytest

from otprune import objectives
from otprune.kernel import covariance, sqrt_psd
from otprune.objectives import ObjectiveSpec, subset_evaluator

from naive import (
    naive_kernel_logdet,
    naive_logdet_surrogate,
    naive_psi,
    naive_trace_f,
    naive_w2,
)


def random_instance(rng, m_max=20, d_max=6):
    m = int(rng.integers(2, m_max + 1))
    d = int(rng.integers(1, d_max + 1))
    k = int(rng.integers(1, m + 1))
    V = rng.standard_normal((m, d))
    C = sorted(int(i) for i in rng.choice(m, size=k, replace=False))
    return V, C


class TestPsi:
    def test_matches_slogdet(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            A = rng.standard_normal((5, 5))
            X = A @ A.T
            for gamma in (0.005, 0.05, 1.0):
                np.testing.assert_allclose(
                    objectives.psi(X, gamma), naive_psi(X, gamma), atol=1e-9
                )

    def test_inequality_chain(self):
        # psi(X) <= gamma tr(X) <= gamma (tr X^{1/2})^2
        rng = np.random.default_rng(1)
        for _ in range(50):
            A = rng.standard_normal((6, 6))
            X = A @ A.T
            S = sqrt_psd(X)
            for gamma in (0.005, 0.01, 0.05, 0.1, 1.0):
                lo = objectives.psi(X, gamma)
                mid = gamma * float(np.trace(X))
                hi = gamma * float(np.trace(S)) ** 2
                assert lo <= mid + 1e-8
                assert mid <= hi + 1e-8

    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            objectives.psi(np.eye(2), 0.0)


class TestWasserstein:
    def test_identical_inputs_zero(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((4, 4))
        X = A @ A.T
        assert abs(objectives.wasserstein2_gaussian(X, X)) <= 1e-8

    def test_commuting_case_analytic(self):
        # diagonal pair: W2^2 = sum (sqrt(lam) - sqrt(mu))^2
        rng = np.random.default_rng(3)
        for _ in range(50):
            lam = rng.uniform(0.1, 4.0, size=5)
            mu = rng.uniform(0.1, 4.0, size=5)
            got = objectives.wasserstein2_gaussian(np.diag(lam), np.diag(mu))
            want = float(np.sum((np.sqrt(lam) - np.sqrt(mu)) ** 2))
            np.testing.assert_allclose(got, want, atol=1e-8)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((3, 3))
        B = rng.standard_normal((3, 3))
        X, Y = A @ A.T, B @ B.T
        a = objectives.wasserstein2_gaussian(X, Y)
        b = objectives.wasserstein2_gaussian(Y, X)
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            objectives.wasserstein2_gaussian(np.eye(2), np.eye(3))

    def test_matches_naive_on_subsets(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            V, C = random_instance(rng)
            got = objectives.wasserstein2_gaussian(covariance(V), covariance(V[C]))
            np.testing.assert_allclose(got, naive_w2(V, C), atol=1e-8)


class TestTraceObjective:
    def test_matches_naive(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            V, C = random_instance(rng)
            np.testing.assert_allclose(
                objectives.trace_objective(V, C), naive_trace_f(V, C), atol=1e-8
            )

    def test_full_set_equals_trace_sigma(self):
        rng = np.random.default_rng(7)
        V = rng.standard_normal((9, 4))
        got = objectives.trace_objective(V, list(range(9)))
        np.testing.assert_allclose(got, np.trace(covariance(V)), atol=1e-10)

    def test_empty_subset_rejected(self):
        with pytest.raises(ValueError):
            objectives.trace_objective(np.ones((3, 2)), [])


class TestLogdetForms:
    def test_sylvester_equality(self):
        # covariance form == kernel form at gamma_tilde = gamma/(m k)
        rng = np.random.default_rng(8)
        for _ in range(100):
            V, C = random_instance(rng, m_max=50, d_max=16)
            gamma = float(rng.uniform(0.001, 1.0))
            a = objectives.logdet_surrogate(V, C, gamma)
            b = objectives.kernel_logdet(V, C, gamma / (V.shape[0] * len(C)))
            assert abs(a - b) <= 1e-7 * (1.0 + abs(a))

    def test_surrogate_matches_naive(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            V, C = random_instance(rng)
            gamma = float(rng.uniform(0.005, 0.5))
            np.testing.assert_allclose(
                objectives.logdet_surrogate(V, C, gamma),
                naive_logdet_surrogate(V, C, gamma),
                atol=1e-8,
            )

    def test_kernel_matches_naive(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            V, C = random_instance(rng)
            gt = float(rng.uniform(1e-4, 1e-2))
            np.testing.assert_allclose(
                objectives.kernel_logdet(V, C, gt),
                naive_kernel_logdet(V, C, gt),
                atol=1e-8,
            )

    def test_empty_subset_is_zero(self):
        V = np.ones((3, 2))
        assert objectives.logdet_surrogate(V, [], 0.01) == 0.0
        assert objectives.kernel_logdet(V, [], 1e-3) == 0.0

    def test_single_row_closed_form(self):
        # |C|=1: logdet(I + gt w w^T) = log(1 + gt ||w||^2)
        rng = np.random.default_rng(11)
        V = rng.standard_normal((6, 3))
        W = V @ V.T
        gt = 2e-3
        want = np.log1p(gt * float(W[2] @ W[2]))
        np.testing.assert_allclose(objectives.kernel_logdet(V, [2], gt), want, atol=1e-10)


class TestSubsetChecks:
    def test_duplicate_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            objectives.check_subset([1, 1], 5)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            objectives.check_subset([0, 5], 5)
        with pytest.raises(ValueError, match="out of range"):
            objectives.check_subset([-1], 5)


class TestBatchEvaluator:
    def test_all_kinds_match_scalar_paths(self):
        rng = np.random.default_rng(12)
        V = rng.standard_normal((14, 5))
        subsets = np.array([sorted(rng.choice(14, size=4, replace=False)) for _ in range(20)])
        gamma = 0.02
        for kind, scalar in (
            ("trace_f", lambda C: naive_trace_f(V, C)),
            ("wasserstein2_sq", lambda C: naive_w2(V, C)),
            ("logdet_surrogate", lambda C: naive_logdet_surrogate(V, C, gamma)),
            ("kernel_logdet", lambda C: naive_kernel_logdet(V, C, gamma / (14 * 4))),
        ):
            ev = subset_evaluator(V, ObjectiveSpec(kind, gamma=gamma), 4)
            got = ev(subsets)
            want = np.array([scalar(list(C)) for C in subsets])
            np.testing.assert_allclose(got, want, atol=1e-8, err_msg=kind)

    def test_wide_and_tall_sides_agree(self):
        # k > d and k < d take different Gram sides; both must match the naive value
        rng = np.random.default_rng(13)
        V = rng.standard_normal((10, 3))
        for k in (2, 7):
            ev = subset_evaluator(V, ObjectiveSpec("trace_f"), k)
            C = sorted(rng.choice(10, size=k, replace=False))
            np.testing.assert_allclose(
                float(ev(np.array([C]))[0]), naive_trace_f(V, C), atol=1e-9
            )

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ObjectiveSpec("nope")
        with pytest.raises(ValueError):
            ObjectiveSpec("trace_f", gamma=-1.0)

    def test_higher_is_better_flags(self):
        assert not ObjectiveSpec("wasserstein2_sq").higher_is_better
        assert ObjectiveSpec("trace_f").higher_is_better
        assert ObjectiveSpec("kernel_logdet").higher_is_better

    def test_gamma_tilde_override(self):
        spec = ObjectiveSpec("kernel_logdet", gamma_tilde=1e-3)
        assert spec.effective_gamma_tilde(100, 10) == 1e-3
        spec2 = ObjectiveSpec("kernel_logdet", gamma=0.05)
        np.testing.assert_allclose(spec2.effective_gamma_tilde(100, 10), 0.05 / 1000)
