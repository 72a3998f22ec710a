"""Dense kernels against closed forms and the vectorization/Newton oracles."""

import math

import numpy as np
import pytest

from helpers import (
    care_newton,
    care_residual,
    jacobi_singular_values,
    lyap_kron,
    random_hurwitz,
    seeded_plants,
)
from sparselqr.densela import (
    GainEvaluation,
    NotHurwitz,
    evaluate_gain,
    lqr_gain,
    norms,
    solve_lyapunov,
    spectral_abscissa,
)
from sparselqr.model import identity_plant, validate_plant

SQRT2 = math.sqrt(2.0)


def scalar_plant(a=-1.0):
    return identity_plant(np.array([[a]]))


class TestSpectralAbscissa:
    def test_known(self):
        M = np.array([[-3.0, 10.0], [0.0, -0.5]])
        assert spectral_abscissa(M) == pytest.approx(-0.5)

    def test_complex_pair(self):
        M = np.array([[0.25, -1.0], [1.0, 0.25]])  # eigenvalues 0.25 +- i
        assert spectral_abscissa(M) == pytest.approx(0.25)


class TestSolveLyapunov:
    def test_against_kronecker_oracle(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 3, 5, 8):
            Acl = random_hurwitz(rng, n)
            C = rng.standard_normal((n, n))
            M = C.T @ C + np.eye(n)
            X = solve_lyapunov(Acl, M)
            X_ref = lyap_kron(Acl, M)
            assert np.linalg.norm(X - X_ref, "fro") <= 1e-9 * (1 + np.linalg.norm(X_ref, "fro"))

    def test_scalar_closed_form(self):
        # a x + x a = -m  ->  x = m / (-2a)
        X = solve_lyapunov(np.array([[-2.0]]), np.array([[8.0]]))
        assert X[0, 0] == pytest.approx(2.0)

    def test_rejects_unstable(self):
        with pytest.raises(NotHurwitz):
            solve_lyapunov(np.array([[0.5]]), np.eye(1))

    def test_rejects_marginal(self):
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])  # eigenvalues +- i
        with pytest.raises(NotHurwitz):
            solve_lyapunov(A, np.eye(2))

    def test_rejects_asymmetric_rhs(self):
        with pytest.raises(ValueError):
            solve_lyapunov(np.array([[-1.0]]) * np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_solution_symmetric(self):
        rng = np.random.default_rng(3)
        Acl = random_hurwitz(rng, 4)
        X = solve_lyapunov(Acl, np.eye(4))
        assert np.array_equal(X, X.T)


class TestLqrGain:
    def test_scalar_closed_form(self):
        # a = -1, b = q = r = 1: x solves x^2 + 2x - 1 = 0, so x = sqrt(2) - 1
        K0, X0, J = lqr_gain(scalar_plant(-1.0))
        assert X0[0, 0] == pytest.approx(SQRT2 - 1.0, rel=1e-12)
        assert K0[0, 0] == pytest.approx(-(SQRT2 - 1.0), rel=1e-12)
        assert J == pytest.approx(SQRT2 - 1.0, rel=1e-12)

    def test_closed_loop_hurwitz_and_cost_consistent(self):
        for plant in seeded_plants(
            [("decaying", 4, 21), ("cyclic", 5, 22), ("decaying", 6, 23)]
        ):
            K0, X0, J = lqr_gain(plant)
            assert spectral_abscissa(plant.A + plant.B @ K0) < 0.0
            assert J == pytest.approx(float(np.trace(X0)), rel=1e-12)
            # X0 is the closed-loop Lyapunov solution for K0
            X_check = lyap_kron(plant.A + plant.B @ K0, plant.Q + K0.T @ plant.R @ K0)
            assert np.allclose(X0, X_check, rtol=1e-8, atol=1e-10)

    def test_against_newton_oracle(self):
        for plant in seeded_plants(
            [("decaying", 3, 31), ("cyclic", 4, 32), ("decaying", 5, 33), ("cyclic", 6, 34)]
        ):
            _, X0, _ = lqr_gain(plant)
            X_ref = care_newton(plant.A, plant.B, plant.Q, plant.R)
            assert np.linalg.norm(X0 - X_ref, "fro") <= 1e-8 * (1 + np.linalg.norm(X_ref, "fro"))

    def test_nonidentity_weights(self):
        rng = np.random.default_rng(5)
        A = random_hurwitz(rng, 3) + 0.8 * np.eye(3)  # partially unstable
        B = rng.standard_normal((3, 2))
        G = rng.standard_normal((3, 3))
        Q = G.T @ G + 0.5 * np.eye(3)
        H = rng.standard_normal((2, 2))
        R = H.T @ H + 0.5 * np.eye(2)
        plant = validate_plant(A, B, Q, R)
        _, X0, _ = lqr_gain(plant)
        assert care_residual(plant.A, plant.B, plant.Q, plant.R, X0) <= 1e-8


class TestEvaluateGain:
    def test_stable_gain_cost_matches_lyapunov(self):
        plant = scalar_plant(-1.0)
        K = np.array([[-0.41421356237309515]])
        ev = evaluate_gain(plant, K)
        assert ev.stable
        assert ev.cost == pytest.approx(SQRT2 - 1.0, rel=1e-9)
        assert ev.cardinality == 1
        assert ev.lyap_residual < 1e-10

    def test_unstable_gain(self):
        plant = scalar_plant(1.0)
        ev = evaluate_gain(plant, np.zeros((1, 1)))
        assert not ev.stable
        assert ev.cost == math.inf
        assert math.isnan(ev.lyap_residual)
        assert ev.spectral_abscissa == pytest.approx(1.0)

    def test_cardinality_threshold_is_strict(self):
        plant = identity_plant(np.array([[-1.0, 0.0], [0.0, -1.0]]))
        K = np.array([[5e-5, -1.0], [4.9e-5, 0.0]])
        ev = evaluate_gain(plant, K, tau=5e-5)
        # |entry| strictly above tau counts; the boundary entry does not
        assert ev.cardinality == 1

    def test_zero_gain_on_stable_plant(self):
        plant = scalar_plant(-2.0)
        ev = evaluate_gain(plant, np.zeros((1, 1)), tau=0.0)
        assert ev.stable
        assert ev.cardinality == 0
        # x solves -4x = -1
        assert ev.cost == pytest.approx(0.25)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_gain(scalar_plant(), np.zeros((2, 2)))


class TestNorms:
    def test_known_diagonal(self):
        d = norms(np.diag([3.0, 2.0, 1.0]))
        assert d["operator"] == pytest.approx(3.0)
        assert d["nuclear"] == pytest.approx(6.0)
        assert d["frobenius"] == pytest.approx(math.sqrt(14.0))

    def test_against_jacobi_oracle(self):
        rng = np.random.default_rng(13)
        for shape in [(3, 3), (5, 5), (4, 7), (7, 4), (1, 6)]:
            U = rng.standard_normal(shape)
            svals = jacobi_singular_values(U)
            d = norms(U)
            assert d["operator"] == pytest.approx(float(svals[0]), rel=1e-12)
            assert d["nuclear"] == pytest.approx(float(svals.sum()), rel=1e-11)
            assert d["frobenius"] == pytest.approx(float(np.linalg.norm(U, "fro")), rel=1e-12)

    def test_zero_matrix(self):
        d = norms(np.zeros((3, 4)))
        assert d == {"operator": 0.0, "nuclear": 0.0, "frobenius": 0.0}

    def test_inequality_chain(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            U = rng.standard_normal((n, n))
            d = norms(U)
            assert d["operator"] <= d["frobenius"] + 1e-12
            assert d["frobenius"] <= d["nuclear"] + 1e-12
            assert d["nuclear"] <= n * d["operator"]


class TestGainEvaluationType:
    def test_fields(self):
        ev = GainEvaluation(
            stable=True, spectral_abscissa=-1.0, cost=2.0, cardinality=3, lyap_residual=1e-12
        )
        assert ev.stable and ev.cost == 2.0
