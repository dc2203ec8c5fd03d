"""Minimal-norm interpolation in the Hardy space H^p of the unit disk.

The minimiser has the form::

    f(z) = B(z) * (gamma(z) / B(z)) ** (2/p),
    gamma(z) = sum_i d_i / (1 - conj(z_i) z),

where ``B`` is the Blaschke product over the zeros of ``gamma`` inside the
disk.  :func:`solve` finds the coefficients ``d`` from the interpolation
conditions by damped Newton iteration, continued in ``p`` from the Hilbert
case ``p = 2`` where ``f = gamma`` and ``d`` solves the Szego Gram system.

:func:`truncated_oracle` is an independent check: it minimises the
discretised boundary norm over polynomials of bounded degree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from ._numerics import (
    ConvergenceError,
    PowerSumObjective,
    damped_newton,
    minimize_power_sum,
    pack,
    unpack,
)
from .kernels import circle_grid, hardy_disk_boundary_norm
from .sip import Exponent, ExponentLike, WeightedSample, as_exponent, lp_norm, sip

logger = logging.getLogger("sipinterp")

__all__ = [
    "HardyProblem",
    "RationalPowerFunction",
    "SolverReport",
    "BranchTrackingError",
    "CertificationError",
    "gamma_eval",
    "gamma_numerator",
    "durand_kerner",
    "gamma_zeros_in_disk",
    "blaschke_eval",
    "make_candidate",
    "candidate_eval",
    "szego_gram",
    "solve",
    "p_sweep",
    "orthogonality_certificate",
    "boundary_modulus_deviation",
    "truncated_oracle",
]

# roots this close to the unit circle get flagged and trigger grid refinement
BOUNDARY_BAND = 1e-3
SAFE_P_RANGE = (1.3, 4.0)


class BranchTrackingError(ArithmeticError):
    """Argument continuation of log(gamma/B) could not be resolved."""


class CertificationError(RuntimeError):
    """A computed solution failed its optimality certificate."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class HardyProblem:
    nodes: np.ndarray
    values: np.ndarray
    p: Exponent

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.nodes, dtype=complex))
        s = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if z.ndim != 1 or z.size == 0:
            raise ValueError("need at least one interpolation node")
        if s.shape != z.shape:
            raise ValueError("nodes and values must have equal length")
        if np.any(np.abs(z) >= 1):
            raise ValueError("all nodes must lie in the open unit disk")
        diff = np.abs(z[:, None] - z[None, :]) + np.eye(z.size)
        if np.any(diff == 0):
            raise ValueError("interpolation nodes must be pairwise distinct")
        object.__setattr__(self, "nodes", z)
        object.__setattr__(self, "values", s)
        object.__setattr__(self, "p", as_exponent(self.p))

    def with_p(self, p) -> "HardyProblem":
        return HardyProblem(self.nodes, self.values, p)


# ------------------------------------------------------------------ gamma, B

def gamma_eval(d, nodes, z):
    """``sum_i d_i / (1 - conj(z_i) z)``."""
    d = np.asarray(d, dtype=complex)
    nodes = np.asarray(nodes, dtype=complex)
    z = np.asarray(z, dtype=complex)
    den = 1.0 - np.conj(nodes) * z[..., None]
    if np.any(den == 0):
        raise ZeroDivisionError("gamma evaluated at one of its poles 1/conj(z_i)")
    return np.sum(d / den, axis=-1)


def gamma_numerator(d, nodes) -> np.ndarray:
    """Ascending coefficients of ``sum_i d_i prod_{j != i} (1 - conj(z_j) z)``."""
    d = np.asarray(d, dtype=complex)
    nodes = np.asarray(nodes, dtype=complex)
    out = np.zeros(nodes.size, dtype=complex)
    for i in range(nodes.size):
        term = np.array([d[i]])
        for j in range(nodes.size):
            if j != i:
                term = P.polymul(term, [1.0, -np.conj(nodes[j])])
        out[: term.size] += term
    return out


def _trim(coeffs, rel=1e-14):
    c = np.asarray(coeffs, dtype=complex)
    scale = np.abs(c).max(initial=0.0)
    m = c.size
    while m > 0 and abs(c[m - 1]) <= rel * scale:
        m -= 1
    return c[:m]


def durand_kerner(coeffs, tol: float = 1e-12, max_iter: int = 500) -> np.ndarray:
    """All roots of the polynomial with ascending ``coeffs`` (Weierstrass iteration)."""
    c = _trim(coeffs)
    if c.size == 0:
        raise ValueError("the zero polynomial has no isolated roots")
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    a = c / c[-1]
    if deg == 1:
        return np.array([-a[0]])
    radius = 1 + np.abs(a[:-1]).max()
    z = radius * (0.4 + 0.9j) ** np.arange(deg)
    for _ in range(max_iter):
        num = P.polyval(z, a)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = num / np.prod(diff, axis=1)
        z = z - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(z))):
            break
    else:
        raise ConvergenceError(f"Durand-Kerner did not converge in {max_iter} iterations")
    # one Newton polish per root against the unscaled polynomial
    da = P.polyder(a)
    dz = P.polyval(z, da)
    ok = dz != 0
    z[ok] -= P.polyval(z[ok], a) / dz[ok]
    return z


def gamma_zeros_in_disk(d, nodes, tol: float = 1e-8) -> np.ndarray:
    """Zeros of gamma in the open unit disk."""
    d = np.asarray(d, dtype=complex)
    if not np.any(d):
        raise ValueError("gamma is identically zero (d = 0)")
    roots = durand_kerner(gamma_numerator(d, nodes))
    inside = roots[np.abs(roots) < 1]
    if inside.size:
        scale = np.abs(d).sum() / (1 - np.abs(nodes)).min()
        g = np.abs(gamma_eval(d, nodes, inside))
        if np.any(g > tol * scale):
            raise ConvergenceError("root finder returned points that are not zeros of gamma")
    return inside


def blaschke_eval(zeros, z):
    """``prod_k (z - a_k) / (1 - conj(a_k) z)``; the empty product is 1."""
    a = np.asarray(zeros, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if a.size == 0:
        return np.ones_like(z)
    if np.any(np.abs(a) >= 1):
        raise ValueError("Blaschke zeros must lie in the open unit disk")
    zz = z[..., None]
    return np.prod((zz - a) / (1 - np.conj(a) * zz), axis=-1)


# ---------------------------------------------------------------- candidate

@dataclass(frozen=True, eq=False)
class RationalPowerFunction:
    """``f = B (gamma/B)^(2/p)``.

    The branch of log(gamma/B) is the principal value at the origin shifted
    by ``2 pi i * branch``.  ``branch = 0`` is the principal convention; the
    solver moves to a neighbouring sheet only when continuation in p carries
    the anchor argument across the cut.
    """

    nodes: np.ndarray
    d: np.ndarray
    blaschke_zeros: np.ndarray
    p: Exponent
    # all roots of the numerator of gamma and its leading coefficient
    roots: np.ndarray = field(repr=False, default=None)
    lead: complex = field(repr=False, default=0.0)
    branch: int = 0

    def __call__(self, z):
        return candidate_eval(self, z)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.d)

    @property
    def anchor_arg(self) -> float:
        """Imaginary part of the chosen log(gamma/B) at the origin."""
        if self.is_zero:
            return 0.0
        return float(np.angle(_anchor(self))) + 2 * np.pi * self.branch


def _anchor(rp) -> complex:
    out = rp.roots[np.abs(rp.roots) >= 1]
    return complex(rp.lead * np.prod(-out))


def make_candidate(
    d, nodes, p: ExponentLike, branch: int = 0, anchor_arg: Optional[float] = None
) -> RationalPowerFunction:
    """Build the candidate for coefficients ``d``.

    If ``anchor_arg`` is given, ``branch`` is replaced by the sheet whose
    argument at the origin lies closest to it.
    """
    d = np.asarray(d, dtype=complex)
    nodes = np.asarray(nodes, dtype=complex)
    p = as_exponent(p)
    if not np.any(d):
        return RationalPowerFunction(nodes, d, np.zeros(0, complex), p, np.zeros(0, complex), 0.0)
    coeffs = _trim(gamma_numerator(d, nodes))
    roots = durand_kerner(coeffs)
    inside = roots[np.abs(roots) < 1]
    rp = RationalPowerFunction(nodes, d, inside, p, roots, complex(coeffs[-1]), int(branch))
    if anchor_arg is not None:
        k = int(np.round((anchor_arg - np.angle(_anchor(rp))) / (2 * np.pi)))
        rp = RationalPowerFunction(nodes, d, inside, p, roots, rp.lead, k)
    return rp


def _factored_log(rp: RationalPowerFunction, z):
    """An analytic log of gamma/B on the closed disk, assembled from
    principal logs of factors that each have positive real part there."""
    z = np.asarray(z, dtype=complex)
    r = rp.roots
    out = r[np.abs(r) >= 1]
    inn = r[np.abs(r) < 1]
    L = np.full(z.shape, np.log(_anchor(rp)) + 2j * np.pi * rp.branch, dtype=complex)
    zz = z[..., None]
    if out.size:
        L += np.sum(np.log(1 - zz / out), axis=-1)
    if inn.size:
        L += np.sum(np.log(1 - np.conj(inn) * zz), axis=-1)
    L -= np.sum(np.log(1 - np.conj(rp.nodes) * zz), axis=-1)
    return L


def _ratio(rp, z):
    return gamma_eval(rp.d, rp.nodes, z) / blaschke_eval(rp.blaschke_zeros, z)


def _path_log(rp, z, start: int = 32, max_steps: int = 1 << 14):
    """log(gamma/B) by continuation along the segment from 0 to each z."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    m = start
    while m <= max_steps:
        t = np.linspace(0.0, 1.0, m + 1)[:, None]
        v = _ratio(rp, t * flat[None, :])
        arg = np.angle(v)
        jumps = np.diff(arg, axis=0)
        jumps = (jumps + np.pi) % (2 * np.pi) - np.pi
        if np.abs(jumps).max(initial=0.0) <= np.pi / 2:
            theta = arg[0] + 2 * np.pi * rp.branch + np.sum(jumps, axis=0)
            return (np.log(np.abs(v[-1])) + 1j * theta).reshape(z.shape)
        m *= 2
    raise BranchTrackingError("argument jump above pi/2 persists after maximal refinement")


def candidate_eval(rp: RationalPowerFunction, z, method: str = "factor"):
    """Evaluate ``B (gamma/B)^(2/p)`` on the closed disk.

    ``method="factor"`` takes the argument from the factorised logarithm and
    the modulus from gamma and B directly; ``method="path"`` unwraps the
    argument along the ray from the origin with adaptive refinement.  Both
    start from the principal logarithm at 0 shifted by ``rp.branch`` sheets.
    """
    z = np.asarray(z, dtype=complex)
    if rp.is_zero:
        return np.zeros(z.shape, dtype=complex)
    e = 2.0 / rp.p.p
    B = blaschke_eval(rp.blaschke_zeros, z)
    if method == "path":
        L = _path_log(rp, z)
    elif method == "factor":
        Lf = _factored_log(rp, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = gamma_eval(rp.d, rp.nodes, z) / B
        direct = np.isfinite(v) & (np.abs(B) > 1e-8) & (v != 0)
        L = Lf.copy()
        ang = np.angle(v[direct])
        k = np.round((Lf.imag[direct] - ang) / (2 * np.pi))
        L[direct] = np.log(np.abs(v[direct])) + 1j * (ang + 2 * np.pi * k)
    else:
        raise ValueError(f"unknown method {method!r}")
    return B * np.exp(e * L)


# ------------------------------------------------------------------- solver

def szego_gram(nodes) -> np.ndarray:
    """``G[i, j] = K(z_j, z_i) = 1 / (1 - z_i conj(z_j))``, so that
    ``gamma(z_i) = (G d)_i``."""
    z = np.asarray(nodes, dtype=complex)
    return 1.0 / (1.0 - z[:, None] * np.conj(z)[None, :])


@dataclass
class SolverReport:
    solution: RationalPowerFunction
    norm: float
    residuals: np.ndarray
    certificate: float
    iterations: int
    warnings: List[str] = field(default_factory=list)
    boundary_modulus: float = 0.0
    grid: int = 4096

    @property
    def p(self) -> float:
        return self.solution.p.p


def _hausdorff(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def orthogonality_certificate(rp: RationalPowerFunction, grid: int = 4096, terms: int = 32) -> float:
    """``max_m |[h_m, f]| / (||h_m|| ||f||)`` over ``h_m = prod_j (z - z_j) z^m``.

    Optimality requires the semi-inner product of every function vanishing
    at the nodes against the solution to be zero.
    """
    if rp.is_zero:
        return 0.0
    zeta = circle_grid(grid)
    p = rp.p
    fs = WeightedSample.uniform(candidate_eval(rp, zeta))
    fn = lp_norm(fs, p)
    base = np.prod(zeta[:, None] - rp.nodes[None, :], axis=1)
    worst = 0.0
    for m in range(terms):
        hs = fs.with_values(base * zeta**m)
        val = abs(sip(hs, fs, p)) / (lp_norm(hs, p) * fn)
        worst = max(worst, val)
    return worst


def boundary_modulus_deviation(rp: RationalPowerFunction, grid: int = 4096) -> float:
    """Max relative deviation of ``|f|^p / |gamma|^2`` from a constant on the circle."""
    if rp.is_zero:
        return 0.0
    zeta = circle_grid(grid)
    f = candidate_eval(rp, zeta)
    g = gamma_eval(rp.d, rp.nodes, zeta)
    ratio = np.abs(f) ** rp.p.p / np.abs(g) ** 2
    c = np.median(ratio)
    return float(np.max(np.abs(ratio / c - 1)))


def _newton_at(problem, d0, anchor, p, tol, max_iter):
    """Newton on the interpolation residual with the sheet pinned near ``anchor``."""
    nodes, s = problem.nodes, problem.values

    def F(x):
        rp = make_candidate(unpack(x), nodes, p, anchor_arg=anchor)
        return pack(candidate_eval(rp, nodes) - s)

    res = damped_newton(F, pack(d0), tol=tol, max_iter=max_iter)
    d = unpack(res.x)
    return d, make_candidate(d, nodes, p, anchor_arg=anchor).anchor_arg, res


def _residual(d, nodes, s, p, branch):
    try:
        rp = make_candidate(d, nodes, p, branch)
        return float(np.max(np.abs(candidate_eval(rp, nodes) - s)))
    except (ArithmeticError, ValueError):
        return math.inf


def _numerator_matrix(nodes) -> np.ndarray:
    k = nodes.size
    return np.stack([gamma_numerator(np.eye(k)[i], nodes) for i in range(k)], axis=1)


def _reflected(d, nodes, band: float = 0.05):
    """Coefficient vectors with one near-circle zero of gamma reflected to
    ``1/conj(r)``, which keeps |gamma| on the circle up to a constant."""
    rp = make_candidate(d, nodes, 2.0)
    M = _numerator_matrix(nodes)
    out = []
    for j, r in enumerate(rp.roots):
        if abs(abs(r) - 1) > band or r == 0:
            continue
        roots = rp.roots.copy()
        roots[j] = 1 / np.conj(r)
        c = P.polyfromroots(roots) * rp.lead
        target = np.zeros(nodes.size, dtype=complex)
        target[: c.size] = c
        try:
            out.append(np.linalg.solve(M, target))
        except np.linalg.LinAlgError:
            pass
    return out


def _predictors(d, anchor, nodes, s, p):
    """Starting points ``(d, branch)`` at exponent ``p`` from the last solution.

    When a zero of gamma crosses the unit circle, or the anchor argument
    crosses the cut, ``f_d`` jumps by an almost constant unimodular factor.
    Rescaling ``d`` by ``mu`` multiplies ``f`` by ``mu^(2/p)``, so fitting
    ``f_d(z_j) ~ lam s_j`` and taking ``mu = lam^(-p/2)`` realigns the
    prediction.  Zeros near the circle are also tried on the other side,
    and neighbouring sheets are tried for every start.
    """
    starts = [d]
    for base in [d] + _reflected(d, nodes):
        try:
            k0 = make_candidate(base, nodes, p, anchor_arg=anchor).branch
            fd = candidate_eval(make_candidate(base, nodes, p, k0), nodes)
        except (ArithmeticError, ValueError):
            continue
        lam = np.vdot(s, fd) / np.vdot(s, s)
        if lam == 0 or not np.isfinite(lam):
            continue
        for m in range(-2, 3):
            starts.append(np.exp(-(p / 2) * (np.log(lam) + 2j * np.pi * m)) * base)
    out = []
    for c in starts:
        rp = make_candidate(c, nodes, p, anchor_arg=anchor)
        for k in (rp.branch - 1, rp.branch, rp.branch + 1):
            jump = abs(rp.anchor_arg + 2 * np.pi * (k - rp.branch) - anchor)
            out.append((_residual(c, nodes, s, p, k), jump, c, k))
    # equal residuals come from sheets giving the same f (2k/p integral);
    # among those keep the argument at the origin continuous
    best = min(t[0] for t in out)
    tied = [t for t in out if t[0] <= 1.001 * best + 1e-12]
    rest = [t for t in out if t[0] > 1.001 * best + 1e-12]
    tied.sort(key=lambda t: t[1])
    rest.sort(key=lambda t: t[0])
    return [(c, k) for _, _, c, k in tied + rest]


def _continue(problem, d, anchor, p_from, p_to, tol, p_step, max_newton, min_step=1e-4):
    """Adaptive continuation in p; returns ``(d, anchor, newton_iterations)``."""
    nodes, s = problem.nodes, problem.values
    p_cur, h, iterations = p_from, p_step, 0
    while abs(p_to - p_cur) > 1e-14:
        remaining = p_to - p_cur
        pk = p_cur + math.copysign(min(h, abs(remaining)), remaining)
        ok = False
        for start, k in _predictors(d, anchor, nodes, s, pk)[:4]:
            a0 = make_candidate(start, nodes, pk, k).anchor_arg
            dk, ak, res = _newton_at(problem, start, a0, pk, tol, max_newton)
            iterations += res.iterations
            if res.converged:
                ok = True
                break
        if ok:
            d, anchor, p_cur = dk, ak, pk
            h = min(p_step, 1.5 * h)
            continue
        if h <= min_step:
            raise ConvergenceError(
                f"Newton failed at p={pk:.6g} (residual {res.residual:.3e})",
                last_p=float(p_cur),
                residual=res.residual,
            )
        h /= 2
    return d, anchor, iterations


def solve(
    problem: HardyProblem,
    *,
    tol: float = 1e-9,
    p_step: float = 0.1,
    grid: int = 4096,
    max_newton: int = 60,
    certificate_terms: int = 32,
    certificate_tol: float = 1e-6,
    warm_start: Optional[tuple] = None,
) -> SolverReport:
    """Minimal-norm interpolant in H^p(D) through ``problem``.

    Continuation starts from the p = 2 Gram solution (or from
    ``warm_start=(p0, d0)``) and moves toward the target in steps of at most
    ``p_step``, halving the step on Newton failure.  After convergence the
    Blaschke zeros are recomputed and the final Newton solve repeated until
    the zero set is stable.
    """
    nodes, s, p = problem.nodes, problem.values, problem.p.p
    warnings: List[str] = []
    if not np.any(s):
        rp = make_candidate(np.zeros_like(s), nodes, p)
        return SolverReport(rp, 0.0, np.zeros(s.size), 0.0, 0, warnings, 0.0, grid)
    if not SAFE_P_RANGE[0] <= p <= SAFE_P_RANGE[1]:
        msg = f"p={p} is outside the well-tested range {SAFE_P_RANGE}"
        warnings.append(msg)
        logger.warning(msg)

    if warm_start is None:
        p0, d, branch = 2.0, np.linalg.solve(szego_gram(nodes), s), 0
    else:
        p0, d = float(warm_start[0]), np.asarray(warm_start[1], dtype=complex)
        branch = int(warm_start[2]) if len(warm_start) > 2 else 0
    anchor = make_candidate(d, nodes, p0, branch).anchor_arg
    d, anchor, iterations = _continue(problem, d, anchor, p0, p, tol, p_step, max_newton)

    zeros_prev = make_candidate(d, nodes, p, anchor_arg=anchor).blaschke_zeros
    for _outer in range(5):
        d, anchor, res = _newton_at(problem, d, anchor, p, tol, max_newton)
        iterations += res.iterations
        if not res.converged:
            raise ConvergenceError(
                f"Newton failed to re-converge at p={p:.6g}", last_p=p, residual=res.residual
            )
        zeros = make_candidate(d, nodes, p, anchor_arg=anchor).blaschke_zeros
        if _hausdorff(zeros, zeros_prev) < 1e-10:
            break
        zeros_prev = zeros
    else:
        warnings.append("Blaschke zero set did not stabilise")

    rp = make_candidate(d, nodes, p, anchor_arg=anchor)
    near = rp.roots[np.abs(np.abs(rp.roots) - 1) <= BOUNDARY_BAND]
    if near.size:
        grid *= 4
        msg = f"gamma has {near.size} zero(s) within {BOUNDARY_BAND} of the unit circle; grid refined to {grid}"
        warnings.append(msg)
        logger.warning(msg)
    residuals = np.abs(candidate_eval(rp, nodes) - s)
    norm = hardy_disk_boundary_norm(lambda z: candidate_eval(rp, z), p, grid)
    cert = orthogonality_certificate(rp, grid, certificate_terms)
    report = SolverReport(
        rp, norm, residuals, cert, iterations, warnings, boundary_modulus_deviation(rp, grid), grid
    )
    if cert > certificate_tol:
        raise CertificationError(
            f"orthogonality certificate {cert:.3e} exceeds {certificate_tol:.0e} at p={p}", report
        )
    return report


def p_sweep(nodes, values, p_grid: Sequence[float], **opts) -> List[SolverReport]:
    """Solve along a grid of exponents, warm-starting each solve from the last.

    The first solve continues from p = 2.
    """
    reports = []
    warm = None
    for p in p_grid:
        rep = solve(HardyProblem(nodes, values, p), warm_start=warm, **opts)
        reports.append(rep)
        warm = (p, rep.solution.d, rep.solution.branch)
    return reports


# ------------------------------------------------------------------- oracle

def truncated_oracle(problem: HardyProblem, degree: int = 60, grid: int = 2048):
    """Minimise the grid boundary p-norm over polynomials of degree <= ``degree``
    subject to the interpolation conditions.

    Returns ``(norm, coefficients)`` with ascending polynomial coefficients.
    The norm bounds the true minimal norm from above up to quadrature error
    and converges to it as ``degree`` grows.
    """
    nodes, s, p = problem.nodes, problem.values, problem.p.p
    k = nodes.size
    if degree < k:
        raise ValueError(f"degree must be at least the number of nodes ({k})")
    if grid < 8 * degree:
        raise ValueError("grid must be at least 8 * degree")
    if not np.any(s):
        return 0.0, np.zeros(degree + 1, dtype=complex)
    V = nodes[:, None] ** np.arange(degree + 1)[None, :]
    c0 = np.linalg.lstsq(V, s, rcond=None)[0]
    N = scipy.linalg.null_space(V)
    E = circle_grid(grid)[:, None] ** np.arange(degree + 1)[None, :]
    obj = PowerSumObjective(E @ N, E @ c0, p, weights=np.full(grid, 1.0 / grid))
    res = minimize_power_sum(obj)
    if not res.converged:
        raise ConvergenceError(f"truncated oracle did not converge (p={p})")
    coeffs = c0 + N @ obj.to_complex(res.t)
    return float(res.value ** (1.0 / p)), coeffs
