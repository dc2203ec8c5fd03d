import numpy as np
import pytest
from hypothesis import given, strategies as st

from sipinterp.kernels import (
    DomainError,
    Family,
    SpaceDescriptor,
    UnsupportedSpaceError,
    circle_grid,
    evaluate_interpolant,
    half_plane_boundary_norm,
    hardy_disk_boundary_norm,
    kernel_eval,
    qmc_norm,
    quadrature_norm,
    single_point_interpolant,
)

DISK = SpaceDescriptor("hardy-disk")


def _space(fam, n=1, p=2.0):
    alpha = 0.5 if fam.startswith("weighted") else None
    return SpaceDescriptor(fam, n, p, alpha)


def _random_point(rng, fam, n):
    if fam == "weighted-bergman-half-plane":
        return rng.uniform(0.1, 2, n) + 1j * rng.uniform(-2, 2, n)
    if fam == "hardy-half-plane":
        return rng.uniform(-2, 2, n) + 1j * rng.uniform(0.1, 2, n)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if fam == "hardy-polydisk":
        return z / np.abs(z) * rng.uniform(0, 0.95, n)
    return z / np.linalg.norm(z) * rng.uniform(0, 0.95)


class TestSpaceDescriptor:
    def test_weighted_needs_alpha(self):
        with pytest.raises(ValueError):
            SpaceDescriptor("weighted-bergman-disk")
        with pytest.raises(ValueError):
            SpaceDescriptor("weighted-bergman-disk", alpha=-1.0)

    def test_alpha_only_for_weighted(self):
        with pytest.raises(ValueError):
            SpaceDescriptor("hardy-ball", 2, alpha=1.0)

    def test_disk_is_one_variable(self):
        with pytest.raises(ValueError):
            SpaceDescriptor("hardy-disk", 2)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            SpaceDescriptor("sobolev")


class TestKernelEval:
    def test_szego_origin(self):
        assert kernel_eval(DISK, 0, 0.3 + 0.4j) == pytest.approx(1.0)

    def test_bergman_ball_gram_entry(self):
        s = SpaceDescriptor("bergman-ball", 2)
        w = [0.25, 0.75]
        assert kernel_eval(s, w, w) == pytest.approx(4096 / 216, rel=1e-14)

    def test_half_plane_diagonal(self):
        s = SpaceDescriptor("hardy-half-plane")
        assert kernel_eval(s, 1j, 1j) == pytest.approx(1 / (4 * np.pi), rel=1e-14)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            kernel_eval(DISK, 1.0, 0.0)
        with pytest.raises(DomainError):
            kernel_eval(SpaceDescriptor("hardy-half-plane"), -1j, 1j)

    @pytest.mark.parametrize("fam", [f.value for f in Family])
    def test_hermitian_symmetry(self, fam, rng):
        n = 1 if fam in ("hardy-disk",) or fam.startswith("weighted") else 2
        s = _space(fam, n)
        for _ in range(200):
            w, z = _random_point(rng, fam, n), _random_point(rng, fam, n)
            a, b = kernel_eval(s, w, z), np.conj(kernel_eval(s, z, w))
            assert abs(a - b) <= 1e-12 * abs(a)

    def test_reproducing_property(self, rng):
        zeta = circle_grid(4096)
        for _ in range(5):
            c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
            z = 0.8 * (rng.uniform() ** 0.5) * np.exp(2j * np.pi * rng.uniform())
            f = np.polynomial.polynomial.polyval(zeta, c)
            val = np.mean(f * kernel_eval(DISK, zeta, z, allow_boundary=True))
            assert val == pytest.approx(np.polynomial.polynomial.polyval(z, c), abs=1e-10)

    @pytest.mark.parametrize("p", [1.5, 3.0, 6.0])
    def test_star_kernel_identity(self, rng, p):
        zeta = circle_grid(4096)
        z1 = 0.4 - 0.3j
        g = (
            kernel_eval(DISK, z1, z1) ** (2 / p - 1)
            * kernel_eval(DISK, zeta, z1, allow_boundary=True)
            * kernel_eval(DISK, z1, zeta, allow_boundary=True) ** (1 - 2 / p)
        )
        for _ in range(5):
            w = 0.7 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
            val = np.mean(kernel_eval(DISK, w, zeta, allow_boundary=True) * g)
            assert val == pytest.approx(kernel_eval(DISK, w, z1), abs=1e-8)


class TestSinglePoint:
    def test_origin_constant(self):
        f = single_point_interpolant(DISK.with_p(3), 0, 5)
        assert f.norm == pytest.approx(5)
        assert evaluate_interpolant(f, 0.7j) == pytest.approx(5)

    def test_hardy_p2(self):
        f = single_point_interpolant(DISK, 0.5, 1)
        assert f.norm == pytest.approx(np.sqrt(3) / 2, rel=1e-15)
        # exponent 2n/p = 1 here, so f is the normalised Szego kernel
        assert f(0) == pytest.approx(0.75, rel=1e-15)
        z = 0.3 - 0.2j
        assert f(z) == pytest.approx((3 / 4) / (1 - z / 2), rel=1e-14)
        assert hardy_disk_boundary_norm(lambda t: evaluate_interpolant(f, t, allow_boundary=True), 2) == pytest.approx(
            np.sqrt(3) / 2, abs=1e-10
        )

    def test_half_plane_p2(self):
        s = SpaceDescriptor("hardy-half-plane")
        f = single_point_interpolant(s, 1j, 1)
        assert f.norm == pytest.approx(np.sqrt(4 * np.pi))
        z = 0.3 + 2j
        assert f(z) == pytest.approx(2j / (z + 1j))
        assert quadrature_norm(f) == pytest.approx(np.sqrt(4 * np.pi), rel=1e-6)

    @pytest.mark.parametrize(
        "fam,n", [("hardy-disk", 1), ("hardy-ball", 2), ("bergman-ball", 2), ("hardy-polydisk", 2), ("hardy-half-plane", 2)]
    )
    def test_interpolates(self, fam, n, rng):
        s = _space(fam, n, 2.7)
        z0 = _random_point(rng, fam, n)
        w0 = 0.3 - 1.2j
        f = single_point_interpolant(s, z0 if n > 1 else z0[0], w0)
        assert abs(f(z0 if n > 1 else z0[0]) - w0) <= 1e-12

    def test_boundary_finite(self):
        f = single_point_interpolant(DISK.with_p(1.5), 0.9, 1)
        r = 1 - np.logspace(-1, -12, 12)
        assert np.all(np.isfinite(f(r * np.exp(0.3j))))

    def test_weighted_unsupported(self):
        with pytest.raises(UnsupportedSpaceError):
            single_point_interpolant(_space("weighted-bergman-disk"), 0.1, 1)

    def test_node_outside(self):
        with pytest.raises(DomainError):
            single_point_interpolant(DISK, 1.2, 1)
        with pytest.raises(DomainError):
            evaluate_interpolant(single_point_interpolant(DISK, 0.2, 1), 1.0)

    @pytest.mark.parametrize("fam", ["hardy-ball", "hardy-polydisk", "bergman-ball"])
    def test_qmc_two_variables(self, fam, rng):
        s = _space(fam, 2, 3.0)
        f = single_point_interpolant(s, _random_point(rng, fam, 2), 1 + 1j)
        assert quadrature_norm(f) == pytest.approx(f.norm, rel=1e-2)

    def test_minimality_against_perturbations(self, rng):
        p = 3.0
        z0, w0 = 0.3 + 0.4j, 1.5 - 0.5j
        f = single_point_interpolant(DISK.with_p(p), z0, w0)
        zeta = circle_grid(4096)
        base = evaluate_interpolant(f, zeta, allow_boundary=True)
        for _ in range(50):
            c = 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            h = base + (zeta - z0) * np.polynomial.polynomial.polyval(zeta, c)
            assert np.mean(np.abs(h) ** p) ** (1 / p) >= f.norm - 1e-12


class TestQuadrature:
    def test_constant(self):
        assert hardy_disk_boundary_norm(lambda z: 0 * z + 2 - 1j, 3) == pytest.approx(abs(2 - 1j))

    @given(st.integers(0, 20), st.floats(1.1, 8))
    def test_monomials(self, k, p):
        assert hardy_disk_boundary_norm(lambda z: z**k, p, 256) == pytest.approx(1.0, rel=1e-12)

    def test_grid_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            hardy_disk_boundary_norm(lambda z: z, 2, 1000)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite(self):
        with pytest.raises(FloatingPointError):
            hardy_disk_boundary_norm(lambda z: 1 / (z - 1), 2, 64)

    def test_half_plane_tan_grid(self):
        # int_R |1/(x+i)|^2 dx = pi
        assert half_plane_boundary_norm(lambda x: 1 / (x + 1j), 2) ** 2 == pytest.approx(np.pi, rel=1e-12)

    def test_qmc_constant(self):
        s = SpaceDescriptor("hardy-polydisk", 3, 2.0)
        assert qmc_norm(s, lambda z: np.ones(z.shape[0])) == pytest.approx(1.0)
