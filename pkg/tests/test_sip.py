import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sipinterp.sip import (
    Exponent,
    IllConditionedError,
    WeightedSample,
    check_basis_change,
    lp_norm,
    lp_s_norm,
    pairing,
    reciprocal_condition,
    sip,
    star_lp,
    star_lp_s,
    star_wirtinger,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
exponents = st.sampled_from([1.2, 1.5, 2.0, 3.0, 6.0])


@st.composite
def samples(draw, min_size=1, max_size=12):
    n = draw(st.integers(min_size, max_size))
    re = draw(arrays(float, n, elements=finite))
    im = draw(arrays(float, n, elements=finite))
    w = draw(arrays(float, n, elements=st.floats(0.01, 10)))
    return WeightedSample(re + 1j * im, w)


class TestExponent:
    def test_conjugate(self):
        e = Exponent(3.0)
        assert e.q == pytest.approx(1.5)
        assert 1 / e.p + 1 / e.q == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("p", [1.0, 0.5, np.inf, np.nan])
    def test_rejects_out_of_range(self, p):
        with pytest.raises(ValueError):
            Exponent(p)


class TestWeightedSample:
    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            WeightedSample([1, 2], [1, 0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            WeightedSample([1, 2], [1])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            WeightedSample([])

    def test_uniform_mass(self):
        x = WeightedSample.uniform([1, 2, 3, 4])
        assert x.weights.sum() == pytest.approx(1.0)


class TestNorm:
    def test_zero(self):
        assert lp_norm(WeightedSample([0, 0, 0], [1, 2, 3]), 3) == 0.0

    def test_euclidean(self):
        assert lp_norm(WeightedSample([3, 4j, 0]), 2) == pytest.approx(5.0, rel=1e-15)

    def test_p4(self):
        assert lp_norm(WeightedSample([1, 1]), 4) == pytest.approx(2 ** 0.25, rel=1e-15)

    def test_large_p_no_overflow(self):
        assert lp_norm(WeightedSample([1e200, 1e200]), 50) == pytest.approx(1e200 * 2 ** (1 / 50))


class TestStar:
    def test_zero_vector(self):
        assert np.all(star_lp(WeightedSample([0, 0]), 1.5).values == 0)

    def test_p2_is_conjugation(self):
        np.testing.assert_allclose(star_lp(WeightedSample([3, 4j, 0]), 2).values, [3, -4j, 0])

    def test_p4_example(self):
        np.testing.assert_allclose(star_lp(WeightedSample([1, 1]), 4).values, [2 ** -0.5] * 2, rtol=1e-15)

    def test_keeps_weights(self):
        x = WeightedSample([1, 2j], [0.3, 0.7])
        assert np.array_equal(star_lp(x, 3).weights, x.weights)

    def test_tiny_entries_are_zero(self):
        out = star_lp(WeightedSample([1.0, 1e-310]), 1.2).values
        assert out[1] == 0 and np.isfinite(out).all()

    @given(samples(), exponents)
    def test_roundtrip(self, x, p):
        e = Exponent(p)
        back = star_lp(star_lp(x, e), e.q).values
        scale = max(np.abs(x.values).max(), 1e-300)
        assert np.abs(back - x.values).max() <= 1e-10 * scale

    @given(samples(), exponents)
    def test_isometry(self, x, p):
        e = Exponent(p)
        n = lp_norm(x, e)
        assert lp_norm(star_lp(x, e), e.q) == pytest.approx(n, rel=1e-12, abs=1e-300)

    @given(samples(), exponents)
    def test_holder_equality(self, x, p):
        n = lp_norm(x, p)
        h = pairing(x, star_lp(x, p))
        assert abs(h - n**2) <= 1e-12 * max(n**2, 1e-300)

    @given(samples(), exponents, finite, finite)
    def test_antihomogeneity(self, x, p, a, b):
        lam = complex(a, b)
        lhs = star_lp(x.with_values(lam * x.values), p).values
        rhs = np.conj(lam) * star_lp(x, p).values
        assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max(initial=0))


class TestPairingAndSip:
    def test_disjoint(self):
        assert pairing(WeightedSample([1, 0]), WeightedSample([0, 1])) == 0

    def test_bilinear_no_conjugate(self):
        assert pairing(WeightedSample([1, 1j]), WeightedSample([1, 1j])) == 0

    def test_weighted(self):
        assert pairing(WeightedSample([2, 1], [0.5, 0.5]), WeightedSample([1, 3], [0.5, 0.5])) == pytest.approx(2.5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            pairing(WeightedSample([1, 2]), WeightedSample([1, 2, 3]))
        with pytest.raises(ValueError):
            pairing(WeightedSample([1, 2], [1, 1]), WeightedSample([1, 2], [1, 2]))

    def test_norm_identity(self):
        assert sip(WeightedSample([3, 4j, 0]), WeightedSample([3, 4j, 0]), 2) == pytest.approx(25)

    def test_conjugate_homogeneity_spot(self):
        x = WeightedSample([1, 0])
        y = WeightedSample([1j, 0])
        assert sip(x, y, 3) == pytest.approx(-1j)

    def test_cauchy_schwarz_seeded(self, rng):
        for _ in range(100):
            x = WeightedSample(rng.standard_normal(6) + 1j * rng.standard_normal(6))
            y = WeightedSample(rng.standard_normal(6) + 1j * rng.standard_normal(6))
            lhs = abs(sip(x, y, 1.5)) ** 2
            rhs = (sip(x, x, 1.5) * sip(y, y, 1.5)).real
            assert lhs <= rhs * (1 + 1e-12)


class TestBasisChange:
    def test_identity_reduces_to_star(self, rng):
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        np.testing.assert_allclose(star_lp_s(x, np.eye(5), 3), star_lp(WeightedSample(x), 3).values)

    def test_p2(self, rng):
        S = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        np.testing.assert_allclose(star_lp_s(x, S, 2), S.T @ np.conj(S) @ np.conj(x), rtol=1e-12)

    def test_hand_example(self):
        x = np.array([1, 0])
        S = np.diag([2.0, 1.0])
        star = star_lp_s(x, S, 4)
        np.testing.assert_allclose(star, [4, 0])
        assert pairing(WeightedSample(x), WeightedSample(star)) == pytest.approx(lp_s_norm(x, S, 4) ** 2)

    def test_roundtrip(self, rng):
        for p in (1.3, 2.5, 5.0):
            e = Exponent(p)
            S = rng.standard_normal((5, 5)) + 5 * np.eye(5)
            x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            back = star_lp_s(star_lp_s(x, S, e), np.linalg.inv(S.T), e.q)
            np.testing.assert_allclose(back, x, rtol=1e-9, atol=1e-9)

    def test_singular_rejected(self):
        with pytest.raises(IllConditionedError):
            check_basis_change(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(IllConditionedError):
            star_lp_s([1, 1], np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]), 2)

    def test_rcond_identity(self):
        assert reciprocal_condition(np.eye(3)) == pytest.approx(1.0)


class TestWirtinger:
    @pytest.mark.parametrize("p", [1.3, 2.0, 4.5])
    def test_matches_finite_differences(self, rng, p):
        w = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        a, b, g, u, v = star_wirtinger(w, p)
        dw = 1e-6 * (rng.standard_normal(5) + 1j * rng.standard_normal(5))
        ones = np.ones(5)
        from sipinterp.sip import _star_values

        fd = (_star_values(w + dw, ones, p) - _star_values(w - dw, ones, p)) / 2
        lin = a * dw + g * (u @ dw) + b * np.conj(dw) + g * (v @ np.conj(dw))
        np.testing.assert_allclose(lin, fd, atol=1e-10)
