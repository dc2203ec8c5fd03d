"""Reproducing kernels of Hardy and Bergman spaces and single-point
minimal-norm interpolants.

Kernels are written ``K(w, z)``: analytic in ``z`` and anti-analytic in
``w``, with ``K(z, w) = conj(K(w, z))``.  A point of an ``n``-variable
domain is an array whose last axis has length ``n``; for one-variable
spaces plain complex scalars or arrays of scalars are accepted.

Norm evaluators discretise the defining measure and go through
:mod:`sipinterp.sip`:

* ``hardy_disk_boundary_norm``   uniform grid on the circle (trapezoid rule)
* ``bergman_disk_norm``          Gauss-Legendre in radius x trapezoid in angle
* ``half_plane_boundary_norm``   trapezoid after ``x = c + s*tan(theta/2)``
* ``qmc_norm``                   scrambled Sobol samples of sphere, ball or torus
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .sip import Exponent, ExponentLike, WeightedSample, as_exponent, lp_norm

__all__ = [
    "Family",
    "SpaceDescriptor",
    "DomainError",
    "UnsupportedSpaceError",
    "ClosedFormInterpolant",
    "as_points",
    "in_domain",
    "kernel_eval",
    "single_point_interpolant",
    "evaluate_interpolant",
    "hardy_disk_boundary_norm",
    "bergman_disk_norm",
    "half_plane_boundary_norm",
    "qmc_norm",
    "quadrature_norm",
]


class Family(str, enum.Enum):
    HARDY_DISK = "hardy-disk"
    HARDY_BALL = "hardy-ball"
    BERGMAN_BALL = "bergman-ball"
    HARDY_POLYDISK = "hardy-polydisk"
    HARDY_HALF_PLANE = "hardy-half-plane"
    WEIGHTED_BERGMAN_DISK = "weighted-bergman-disk"
    WEIGHTED_BERGMAN_HALF_PLANE = "weighted-bergman-half-plane"


_WEIGHTED = (Family.WEIGHTED_BERGMAN_DISK, Family.WEIGHTED_BERGMAN_HALF_PLANE)
# rounding slack when boundary points are admitted
_EDGE_TOL = 1e-12


class DomainError(ValueError):
    """A point lies outside the domain of the space."""


class UnsupportedSpaceError(ValueError):
    """The requested operation is not available for this family."""


@dataclass(frozen=True)
class SpaceDescriptor:
    family: Family
    n: int = 1
    p: Exponent = field(default_factory=lambda: Exponent(2.0))
    alpha: Optional[float] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "p", as_exponent(self.p))
        n = int(self.n)
        if n < 1:
            raise ValueError("n must be a positive integer")
        if fam in _WEIGHTED or fam is Family.HARDY_DISK:
            if n != 1:
                raise ValueError(f"{fam.value} is a one-variable space (n=1)")
        if fam in _WEIGHTED:
            if self.alpha is None or not self.alpha > -1:
                raise ValueError("weighted families need alpha > -1")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise ValueError(f"alpha is only meaningful for weighted families, not {fam.value}")
        object.__setattr__(self, "n", n)

    def with_p(self, p: ExponentLike) -> "SpaceDescriptor":
        return SpaceDescriptor(self.family, self.n, as_exponent(p), self.alpha)

    @property
    def is_hardy(self) -> bool:
        return self.family in (
            Family.HARDY_DISK,
            Family.HARDY_BALL,
            Family.HARDY_POLYDISK,
            Family.HARDY_HALF_PLANE,
        )


def as_points(space: SpaceDescriptor, z) -> np.ndarray:
    """Return ``z`` as a complex array with trailing axis of length ``n``."""
    z = np.asarray(z, dtype=complex)
    if space.n == 1:
        return z[..., None]
    if z.ndim == 0 or z.shape[-1] != space.n:
        raise ValueError(f"points of {space.family.value} need a trailing axis of length {space.n}")
    return z


def in_domain(space: SpaceDescriptor, pts: np.ndarray, closed: bool = False) -> np.ndarray:
    """Boolean mask over points (``pts`` already in :func:`as_points` form)."""
    fam = space.family
    if fam in (Family.HARDY_DISK, Family.HARDY_BALL, Family.BERGMAN_BALL, Family.WEIGHTED_BERGMAN_DISK):
        r2 = np.sum(np.abs(pts) ** 2, axis=-1)
        return r2 <= 1.0 + _EDGE_TOL if closed else r2 < 1.0
    if fam is Family.HARDY_POLYDISK:
        a = np.abs(pts)
        return np.all(a <= 1.0 + _EDGE_TOL if closed else a < 1.0, axis=-1)
    if fam is Family.HARDY_HALF_PLANE:
        y = pts.imag
        return np.all(y >= 0 if closed else y > 0, axis=-1)
    # right half-plane
    x = pts.real
    return np.all(x >= 0 if closed else x > 0, axis=-1)


def _require_domain(space, pts, what, closed=False):
    if not np.all(np.isfinite(pts)):
        raise DomainError(f"{what}: non-finite coordinates")
    mask = in_domain(space, pts, closed=closed)
    if not np.all(mask):
        bad = pts[~mask][0] if pts.ndim > 1 else pts
        raise DomainError(f"{what} {np.squeeze(bad)} is outside the domain of {space.family.value}")


def _euclid(z, w):
    # <z, w> = sum z_i conj(w_i)
    return np.sum(z * np.conj(w), axis=-1)


def kernel_eval(space: SpaceDescriptor, w, z, *, allow_boundary: bool = False):
    """Reproducing kernel ``K(w, z)``; broadcasts over leading axes.

    With ``allow_boundary`` either argument may lie on the boundary (for
    boundary pairings); the kernel is finite as long as the other is interior.
    """
    W = as_points(space, w)
    Z = as_points(space, z)
    _require_domain(space, W, "kernel point w", closed=allow_boundary)
    _require_domain(space, Z, "kernel point z", closed=allow_boundary)
    return _kernel(space, W, Z)


def _kernel(space, W, Z):
    fam, n = space.family, space.n
    if fam is Family.HARDY_DISK:
        return 1.0 / (1.0 - _euclid(Z, W))
    if fam is Family.HARDY_BALL:
        return 1.0 / (1.0 - _euclid(Z, W)) ** n
    if fam is Family.BERGMAN_BALL:
        return 1.0 / (1.0 - _euclid(Z, W)) ** (n + 1)
    if fam is Family.HARDY_POLYDISK:
        return np.prod(1.0 / (1.0 - Z * np.conj(W)), axis=-1)
    if fam is Family.HARDY_HALF_PLANE:
        return np.prod(1.0 / (2j * np.pi * (np.conj(W) - Z)), axis=-1)
    a = space.alpha
    if fam is Family.WEIGHTED_BERGMAN_DISK:
        return (a + 1) / (1.0 - np.conj(W[..., 0]) * Z[..., 0]) ** (a + 2)
    return 2.0**a * (a + 1) / (np.conj(W[..., 0]) + Z[..., 0]) ** (a + 2)


@dataclass(frozen=True)
class ClosedFormInterpolant:
    """``z -> value * (kernel ratio)^exponent`` with its exact norm.

    For polydisk and half-plane families the power is applied factor by
    factor, which keeps every factor on the principal branch.
    """

    space: SpaceDescriptor
    node: np.ndarray
    value: complex
    exponent_of_kernel_ratio: float
    norm: float

    def __call__(self, z):
        return evaluate_interpolant(self, z)


def single_point_interpolant(space: SpaceDescriptor, z0, w0: complex) -> ClosedFormInterpolant:
    """Unique minimal-norm ``f`` with ``f(z0) = w0`` in one of the four
    Hardy/Bergman families with a closed form."""
    if space.family in _WEIGHTED:
        raise UnsupportedSpaceError(
            f"no single-point closed form is available for {space.family.value}"
        )
    node = as_points(space, z0)
    if node.shape != (space.n,):
        raise ValueError("z0 must be a single point")
    _require_domain(space, node, "node")
    p, n, w0 = space.p.p, space.n, complex(w0)
    fam = space.family
    if fam in (Family.HARDY_DISK, Family.HARDY_BALL):
        expo = 2 * n / p
        norm = abs(w0) * (1 - np.sum(np.abs(node) ** 2)) ** (n / p)
    elif fam is Family.BERGMAN_BALL:
        expo = 2 * (n + 1) / p
        norm = abs(w0) * (1 - np.sum(np.abs(node) ** 2)) ** ((n + 1) / p)
    elif fam is Family.HARDY_POLYDISK:
        expo = 2 / p
        norm = abs(w0) * np.prod((1 - np.abs(node) ** 2) ** (1 / p))
    else:
        expo = 2 / p
        norm = abs(w0) * np.prod((4 * np.pi * node.imag) ** (1 / p))
    return ClosedFormInterpolant(space, node, w0, expo, float(norm))


def evaluate_interpolant(f: ClosedFormInterpolant, z, *, allow_boundary: bool = False):
    """Evaluate a closed-form interpolant (principal branch throughout)."""
    space = f.space
    Z = as_points(space, z)
    _require_domain(space, Z, "evaluation point", closed=allow_boundary)
    z0, e, fam = f.node, f.exponent_of_kernel_ratio, space.family
    if fam in (Family.HARDY_DISK, Family.HARDY_BALL, Family.BERGMAN_BALL):
        ratio = (1 - np.sum(np.abs(z0) ** 2)) / (1 - _euclid(Z, z0))
        return f.value * ratio**e
    if fam is Family.HARDY_POLYDISK:
        ratio = (1 - np.abs(z0) ** 2) / (1 - Z * np.conj(z0))
    else:
        ratio = 2j * z0.imag / (Z - np.conj(z0))
    return f.value * np.prod(ratio**e, axis=-1)


# ---------------------------------------------------------------- quadrature

def _sample_norm(values, weights, p):
    values = np.asarray(values, dtype=complex).ravel()
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite sample encountered in norm quadrature")
    return lp_norm(WeightedSample(values, np.broadcast_to(weights, values.shape)), p)


def _check_grid(grid_size, minimum=16):
    g = int(grid_size)
    if g < minimum or g & (g - 1):
        raise ValueError(f"grid_size must be a power of two >= {minimum}, got {grid_size}")
    return g


def circle_grid(grid_size: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(grid_size) / grid_size
    return np.exp(1j * t)


def hardy_disk_boundary_norm(f: Callable, p: ExponentLike, grid_size: int = 4096) -> float:
    """``((1/2pi) int |f(e^it)|^p dt)^(1/p)`` by the uniform-grid mean.

    ``f`` is called once with the full array of boundary points.
    """
    g = _check_grid(grid_size)
    vals = f(circle_grid(g))
    return _sample_norm(vals, 1.0 / g, as_exponent(p))


def bergman_disk_norm(f: Callable, p: ExponentLike, n_radial: int = 64, n_angle: int = 256) -> float:
    """Norm in the unweighted Bergman space of the disk (area measure of mass 1)."""
    x, wx = np.polynomial.legendre.leggauss(int(n_radial))
    r = 0.5 * (x + 1)
    wr = 0.5 * wx * 2 * r  # d(r^2) over [0, 1]
    th = 2 * np.pi * np.arange(n_angle) / n_angle
    Z = r[:, None] * np.exp(1j * th)[None, :]
    W = wr[:, None] * np.full(n_angle, 1.0 / n_angle)[None, :]
    return _sample_norm(f(Z), W.ravel(), as_exponent(p))


def half_plane_boundary_norm(
    f: Callable,
    p: ExponentLike,
    grid_size: int = 4096,
    center: float = 0.0,
    scale: float = 1.0,
) -> float:
    """``(int_R |f(x)|^p dx)^(1/p)`` for boundary values on the real line.

    The line is mapped to the circle by ``x = center + scale*tan(theta/2)``
    and the trapezoid rule is applied at midpoints, which never hit the
    point at infinity.  Integrands decaying like ``|x|^-2`` become smooth
    periodic functions of ``theta``, so convergence is geometric for the
    rational closed forms.
    """
    g = _check_grid(grid_size)
    th = -np.pi + (np.arange(g) + 0.5) * (2 * np.pi / g)
    tt = np.tan(th / 2)
    x = center + scale * tt
    jac = 0.5 * scale * (1 + tt**2) * (2 * np.pi / g)
    return _sample_norm(f(x.astype(complex)), jac, as_exponent(p))


def _sobol(d, m, seed):
    return qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)


def _sphere_points(n, m, seed):
    u = np.clip(_sobol(2 * n, m, seed), 1e-12, 1 - 1e-12)
    g = ndtri(u)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, :n] + 1j * g[:, n:]


def _ball_points(n, m, seed):
    u = np.clip(_sobol(2 * n + 1, m, seed), 1e-12, 1 - 1e-12)
    g = ndtri(u[:, : 2 * n])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = u[:, 2 * n] ** (1.0 / (2 * n))
    return r[:, None] * (g[:, :n] + 1j * g[:, n:])


def _torus_points(n, m, seed):
    return np.exp(2j * np.pi * _sobol(n, m, seed))


def qmc_norm(space: SpaceDescriptor, f: Callable, m: int = 16, seed: int = 0) -> float:
    """Quasi-Monte-Carlo norm with ``2**m`` scrambled Sobol points.

    Hardy ball: normalised surface measure on the sphere.  Bergman ball:
    normalised volume measure.  Hardy polydisk: normalised Haar measure on
    the torus.
    """
    fam, n = space.family, space.n
    if fam in (Family.HARDY_BALL, Family.HARDY_DISK):
        pts = _sphere_points(n, m, seed)
    elif fam is Family.BERGMAN_BALL:
        pts = _ball_points(n, m, seed)
    elif fam is Family.HARDY_POLYDISK:
        pts = _torus_points(n, m, seed)
    else:
        raise UnsupportedSpaceError(f"no QMC sampler for {fam.value}")
    if n == 1:
        pts = pts[:, 0]
    vals = f(pts)
    return _sample_norm(vals, 1.0 / pts.shape[0], space.p)


def quadrature_norm(f: ClosedFormInterpolant, **kw) -> float:
    """Numerical norm of a closed-form interpolant by the natural rule for its
    family (deterministic grids for ``n = 1``, QMC otherwise)."""
    space = f.space

    def boundary(z):
        return evaluate_interpolant(f, z, allow_boundary=True)

    if space.n == 1:
        if space.family in (Family.HARDY_DISK, Family.HARDY_BALL, Family.HARDY_POLYDISK):
            return hardy_disk_boundary_norm(boundary, space.p, kw.get("grid_size", 4096))
        if space.family is Family.BERGMAN_BALL:
            return bergman_disk_norm(boundary, space.p, kw.get("n_radial", 64), kw.get("n_angle", 512))
        if space.family is Family.HARDY_HALF_PLANE:
            return half_plane_boundary_norm(
                boundary, space.p, kw.get("grid_size", 4096), kw.get("center", 0.0), kw.get("scale", 1.0)
            )
    return qmc_norm(space, boundary, kw.get("m", 16), kw.get("seed", 0))
