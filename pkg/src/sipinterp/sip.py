"""Duality (star) maps, semi-inner products and norms for discrete L^p / l^p.

Every continuous space in this package is discretised onto an explicit
quadrature grid by its caller; this module only ever sees a finite list of
values with positive weights and is agnostic about where they came from.

The duality pairing is bilinear (no conjugation).  All conjugation lives in
the star maps, so that ``sip(x, y) = pairing(x, star_lp(y))``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

__all__ = [
    "Exponent",
    "WeightedSample",
    "IllConditionedError",
    "as_exponent",
    "lp_norm",
    "star_lp",
    "pairing",
    "sip",
    "star_lp_s",
    "lp_s_norm",
    "reciprocal_condition",
    "star_wirtinger",
]

# |x_i| below this is treated as an exact zero inside |x_i|^(p-2)
ZERO_CUTOFF = 1e-300
# reciprocal condition estimates below this are rejected
RCOND_MIN = 1e-12


class IllConditionedError(ValueError):
    """Raised when a basis-change matrix is singular or too ill-conditioned."""


@dataclass(frozen=True)
class Exponent:
    """An exponent ``1 < p < inf`` together with its conjugate ``q``."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or p <= 1.0:
            raise ValueError(f"exponent must satisfy 1 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def conjugate(self) -> "Exponent":
        return Exponent(self.q)


ExponentLike = Union[Exponent, float]


def as_exponent(e: ExponentLike) -> Exponent:
    return e if isinstance(e, Exponent) else Exponent(float(e))


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Complex values on a discrete measure with strictly positive weights.

    ``weights`` defaults to unit weights (counting measure), which is the
    l^p case.
    """

    values: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-d sequence")
        if self.weights is None:
            weights = np.ones(values.size)
        else:
            weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if weights.shape != values.shape:
            raise ValueError("values and weights must have equal length")
        if not np.all(weights > 0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.values.size

    @classmethod
    def uniform(cls, values, total_mass: float = 1.0) -> "WeightedSample":
        """Equal weights summing to ``total_mass`` (a uniform-grid mean)."""
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        return cls(values, np.full(values.size, total_mass / values.size))

    def with_values(self, values) -> "WeightedSample":
        return WeightedSample(values, self.weights)


def _weighted_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    a = np.abs(values)
    amax = a.max() if a.size else 0.0
    if amax == 0.0:
        return 0.0
    # scale first so that large p does not overflow
    return float(amax * np.sum(weights * (a / amax) ** p) ** (1.0 / p))


def lp_norm(x: WeightedSample, e: ExponentLike) -> float:
    """Return ``(sum_i w_i |x_i|^p)^(1/p)``."""
    return _weighted_norm(x.values, x.weights, as_exponent(e).p)


def _star_values(values: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    norm = _weighted_norm(values, weights, p)
    out = np.zeros_like(values, dtype=complex)
    if norm == 0.0:
        return out
    # ||x||^(2-p) conj(x) |x|^(p-2) == ||x|| conj(u) |u|^(p-2) with u = x/||x||
    u = values / norm
    a = np.abs(u)
    nz = np.abs(values) >= ZERO_CUTOFF
    out[nz] = norm * np.conj(u[nz]) * a[nz] ** (p - 2.0)
    return out


def star_wirtinger(values, p: float):
    """Wirtinger derivatives of the counting-measure star map at ``values``.

    Returns ``(a, b, g, u, v)`` with::

        d star = (diag(a) + g u^T) dw + (diag(b) + g v^T) conj(dw)

    Entries below ``ZERO_CUTOFF`` are treated as zero; for ``p < 2`` the map
    is not differentiable there and the derivative is taken as zero.
    """
    w = np.asarray(values, dtype=complex)
    aw = np.abs(w)
    nz = aw >= ZERO_CUTOFF
    n = w.size
    a = np.zeros(n, dtype=complex)
    b = np.zeros(n, dtype=complex)
    u = np.zeros(n, dtype=complex)
    v = np.zeros(n, dtype=complex)
    g = np.zeros(n, dtype=complex)
    norm = _weighted_norm(w, np.ones(n), p)
    if norm == 0.0:
        return a, b, g, u, v
    # scale by the norm so that large p neither overflows nor underflows
    z = w[nz] / norm
    r = aw[nz] / norm
    r_pm2 = r ** (p - 2.0)
    a[nz] = 0.5 * (p - 2.0) * np.conj(z) ** 2 * r ** (p - 4.0)
    b[nz] = 0.5 * p * r_pm2
    g[nz] = norm * np.conj(z) * r_pm2
    u[nz] = 0.5 * (2.0 - p) * r_pm2 * np.conj(z) / norm
    v[nz] = 0.5 * (2.0 - p) * r_pm2 * z / norm
    return a, b, g, u, v


def star_lp(x: WeightedSample, e: ExponentLike) -> WeightedSample:
    """Duality map of L^p onto L^q: ``||x||^(2-p) conj(x) |x|^(p-2)``.

    Zero entries map to zero and the zero vector maps to itself.
    """
    return x.with_values(_star_values(x.values, x.weights, as_exponent(e).p))


def _check_compatible(x: WeightedSample, y: WeightedSample):
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    if not np.array_equal(x.weights, y.weights):
        raise ValueError("samples live on different measures (weights differ)")


def pairing(x: WeightedSample, y: WeightedSample) -> complex:
    """Bilinear duality pairing ``sum_i w_i x_i y_i``."""
    _check_compatible(x, y)
    return complex(np.sum(x.weights * x.values * y.values))


def sip(x: WeightedSample, y: WeightedSample, e: ExponentLike) -> complex:
    """Semi-inner product ``[x, y] = <x, y^star>``.

    Linear in ``x``, conjugate-homogeneous in ``y``, and ``sip(x, x)``
    equals ``lp_norm(x) ** 2``.
    """
    _check_compatible(x, y)
    return pairing(x, star_lp(y, e))


def reciprocal_condition(S: np.ndarray) -> float:
    """LAPACK 1-norm reciprocal condition estimate of a square matrix."""
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    with warnings.catch_warnings():
        # a singular factor is reported through the returned estimate
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(S, check_finite=True)
    if np.any(np.diag(lu) == 0):
        return 0.0
    anorm = np.linalg.norm(S, 1)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        raise RuntimeError(f"gecon failed with info={info}")
    return float(rcond)


def check_basis_change(S: np.ndarray, rcond_min: float = RCOND_MIN) -> np.ndarray:
    S = np.asarray(S)
    rc = reciprocal_condition(S)
    if rc < rcond_min:
        raise IllConditionedError(
            f"basis change is singular or ill-conditioned (rcond={rc:.3e} < {rcond_min:.0e})"
        )
    return S


def lp_s_norm(x, S: np.ndarray, e: ExponentLike) -> float:
    """Norm of l^p_S: ``||S x||_p`` with counting measure."""
    Sx = np.asarray(S) @ np.asarray(x, dtype=complex)
    return _weighted_norm(Sx, np.ones(Sx.size), as_exponent(e).p)


def star_lp_s(x, S: np.ndarray, e: ExponentLike, *, check: bool = True) -> np.ndarray:
    """Duality map of l^p_S: ``S^T [(S x)^star]`` (plain transpose, no conjugate)."""
    S = check_basis_change(S) if check else np.asarray(S)
    x = np.asarray(x, dtype=complex)
    if x.shape != (S.shape[1],):
        raise ValueError(f"vector of shape {x.shape} does not match S of shape {S.shape}")
    Sx = S @ x
    return S.T @ _star_values(Sx, np.ones(Sx.size), as_exponent(e).p)
