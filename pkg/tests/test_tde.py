import numpy as np
import pytest

from sipinterp import tde
from sipinterp.tde import (
    TdeProblem,
    build_system,
    delay_from_filter,
    direct_objective_minimum,
    estimate,
    factor_residual,
    rref_factor,
    sinc_score,
    synthetic_signals,
)


class TestProblem:
    def test_validation(self):
        x = np.arange(20.0)
        with pytest.raises(ValueError):
            TdeProblem(x, x, 5)
        with pytest.raises(ValueError):
            TdeProblem(x, x[:-1], 1)
        with pytest.raises(ValueError):
            TdeProblem(x, x, 1, beta=0)
        with pytest.raises(ValueError):
            TdeProblem(x, x, 1, D_grid=(0, 1, 0))

    def test_default_grid(self):
        assert TdeProblem(np.ones(20), np.ones(20), 3).D_grid == (-3.0, 3.0, 0.01)


class TestBuildSystem:
    def test_index_convention(self):
        x1 = np.arange(1.0, 8.0)
        T, y = build_system(TdeProblem(x1, 10 * x1, 1))
        np.testing.assert_array_equal(T[0], [3, 2, 1])
        assert y.size == 7 - 2
        np.testing.assert_array_equal(y, 10 * x1[1:6])

    def test_impulse(self):
        x1 = np.zeros(9)
        x1[1] = 1.0  # position M + 1 in one-based indexing
        T, _ = build_system(TdeProblem(x1, x1, 1))
        assert T.sum() == 2
        assert np.all(T.sum(axis=1) <= 1)


class TestRref:
    def test_already_reduced(self):
        T = np.array([[1.0, 0], [0, 1], [0, 0]])
        S, E, y_hat, piv = rref_factor(T, np.array([1.0, 2, 3]))
        np.testing.assert_allclose(S, np.eye(3))
        assert piv == [0, 1]

    def test_scaled_identity(self):
        S, E, _, _ = rref_factor(2 * np.eye(3), np.ones(3))
        np.testing.assert_allclose(S, 2 * np.eye(3))
        np.testing.assert_allclose(E, np.eye(3))

    def test_random_reconstruction(self, rng):
        for _ in range(20):
            T = rng.standard_normal((8, 3))
            y = rng.standard_normal(8)
            S, E, y_hat, piv = rref_factor(T, y)
            assert factor_residual(T, y, S, E, y_hat) <= 1e-12
            assert len(piv) == 3
            np.testing.assert_allclose(E[:3], np.eye(3), atol=1e-12)
            np.testing.assert_allclose(E[3:], 0, atol=1e-12)

    def test_rank_deficient(self):
        T = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        S, E, y_hat, piv = rref_factor(T, np.array([1.0, 0.0, 1.0]))
        assert piv == [0]
        assert factor_residual(T, np.array([1.0, 0.0, 1.0]), S, E, y_hat) <= 1e-14


class TestDelay:
    @pytest.mark.parametrize("j", [-3, 0, 2, 4])
    def test_kronecker(self, j):
        h = np.zeros(9)
        h[j + 4] = 1.0
        assert delay_from_filter(h, (-4, 4, 0.01)) == j

    def test_sinc_score_vectorised(self):
        h = np.array([0.0, 1.0, 0.0])
        np.testing.assert_allclose(sinc_score(h, [0.0, 1.0]), [1.0, 0.0], atol=1e-15)

    def test_fractional(self):
        i = np.arange(-10, 11)
        h = np.sinc(2.3 - i)
        # truncating the sinc to 21 taps moves the peak slightly
        assert delay_from_filter(h, (-10, 10, 0.01)) == pytest.approx(2.3, abs=2e-2)


class TestEstimate:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_noise_free(self, p):
        x1, x2 = synthetic_signals(200, 5, 1.0, 0.0, seed=3)
        res = estimate(TdeProblem(x1, x2, 10, 1.0, p))
        expected = np.zeros(21)
        expected[15] = 1.0
        np.testing.assert_allclose(res.h_opt, expected, atol=1e-8)
        assert res.D_opt == pytest.approx(5.0, abs=1e-6)
        assert res.objective <= 1e-12
        assert res.h_index(5) == pytest.approx(1.0)

    def test_attenuation(self):
        x1, x2 = synthetic_signals(150, -2, 0.5, 0.0, seed=4)
        res = estimate(TdeProblem(x1, x2, 4, 0.5, 2.0))
        assert np.argmax(np.abs(res.h_opt)) - 4 == -2
        assert res.h_index(-2) == pytest.approx(1.0, abs=1e-8)

    def test_shift_covariance(self):
        a = estimate(TdeProblem(*synthetic_signals(300, 2, 1.0, 0.4, seed=5), 6, 1.0, 1.5))
        b = estimate(TdeProblem(*synthetic_signals(300, 3, 1.0, 0.4, seed=5), 6, 1.0, 1.5))
        assert np.argmax(np.abs(b.h_opt)) == np.argmax(np.abs(a.h_opt)) + 1

    @pytest.mark.parametrize("seed,p", [(0, 1.3), (1, 2.0), (2, 3.0)])
    def test_objective_equivalence(self, seed, p):
        prob = TdeProblem(*synthetic_signals(50, 1, 1.0, 0.5, seed=seed), 2, 1.0, p)
        res = estimate(prob)
        _, direct = direct_objective_minimum(prob)
        assert res.objective == pytest.approx(direct, rel=1e-6)


class TestSynthetic:
    def test_noise_positions_shared(self):
        _, a = synthetic_signals(500, 5, 1.0, 0.4, seed=9)
        _, b = synthetic_signals(500, 5, 1.0, 10.0, seed=9)
        _, c = synthetic_signals(500, 5, 1.0, 0.0, seed=9)
        np.testing.assert_allclose((b - c), 25 * (a - c), atol=1e-12)
        assert set(np.round((a - c) / 0.4, 12)) <= {-1.0, 0.0, 1.0}

    def test_delay(self):
        x1, x2 = synthetic_signals(100, 4, 2.0, 0.0, seed=0)
        np.testing.assert_allclose(x2[4:], 2.0 * x1[:-4])

    def test_probabilities_sum(self):
        assert sum(tde.NOISE_PROBABILITIES) == pytest.approx(1.0)
