"""The even-exponent shortcut.

For even ``p`` the minimal-norm interpolant of ``s`` in a Hardy or Bergman
space is ``g^(2/p)``, where ``g`` is the Hilbert-space (p = 2) interpolant
of the powered data ``s^(p/2)``, provided ``g`` has no zeros in the domain
and the chosen branch of ``g^(2/p)`` reproduces ``s`` at the nodes.
:func:`lift` builds ``g^(2/p)`` and certifies both conditions; when either
fails the shortcut does not apply and the general solver has to be used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from . import hardy
from .kernels import (
    Family,
    SpaceDescriptor,
    _ball_points,
    _kernel,
    _require_domain,
    _sphere_points,
    _torus_points,
    as_points,
    circle_grid,
    hardy_disk_boundary_norm,
)
from .sip import Exponent

__all__ = [
    "RkhsSolution",
    "LiftCertificate",
    "LiftedInterpolant",
    "CrossCheckReport",
    "GramError",
    "LiftCertificateError",
    "rkhs_solve",
    "lift",
    "lift_problem",
    "dominant_term_bound",
    "cross_check_hardy",
]

NODE_TOL = 1e-9
SAMPLING_MARGIN = 10.0


class GramError(ValueError):
    """The kernel Gram matrix could not be factorised."""


class LiftCertificateError(RuntimeError):
    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True, eq=False)
class RkhsSolution:
    """``g = sum_j c_j K(z_j, .)`` interpolating in the p = 2 space."""

    space: SpaceDescriptor
    nodes: np.ndarray
    coefficients: np.ndarray
    gram: np.ndarray
    values: np.ndarray
    residual: float

    def __call__(self, z, *, allow_boundary: bool = False):
        Z = as_points(self.space, z)
        _require_domain(self.space, Z, "evaluation point", closed=allow_boundary)
        return _g(self, Z)

    @property
    def norm(self) -> float:
        c = self.coefficients
        return math.sqrt(max(float(np.real(np.conj(c) @ self.gram @ c)), 0.0))


def _g(sol: RkhsSolution, Z) -> np.ndarray:
    K = _kernel(sol.space, sol.nodes, Z[..., None, :])
    return K @ sol.coefficients


def rkhs_solve(space: SpaceDescriptor, nodes, values) -> RkhsSolution:
    """Solve ``sum_j c_j K(z_j, z_i) = s_i`` by Cholesky factorisation."""
    space = space.with_p(2.0)
    Z = as_points(space, nodes)
    if Z.ndim != 2:
        Z = Z.reshape(-1, space.n)
    _require_domain(space, Z, "interpolation node")
    s = np.atleast_1d(np.asarray(values, dtype=complex))
    if s.shape != (Z.shape[0],):
        raise ValueError("nodes and values must have equal length")
    G = _kernel(space, Z[None, :, :], Z[:, None, :])
    try:
        cho = scipy.linalg.cho_factor(G, lower=True)
    except np.linalg.LinAlgError as exc:
        raise GramError("Gram matrix is not numerically positive definite (coincident nodes?)") from exc
    c = scipy.linalg.cho_solve(cho, s)
    residual = float(np.abs(G @ c - s).max() / max(np.abs(s).max(), 1e-300))
    return RkhsSolution(space, Z, c, G, s, residual)


# ---------------------------------------------------------- zero-freeness

def _kernel_bounds(space: SpaceDescriptor, w: np.ndarray):
    """``(sup |K(w, .)|, inf |K(w, .)|)`` over the domain, or None if unbounded."""
    fam, n = space.family, space.n
    if fam is Family.HARDY_POLYDISK:
        a = np.abs(w)
        return float(np.prod(1 / (1 - a))), float(np.prod(1 / (1 + a)))
    expo = {
        Family.HARDY_DISK: (1.0, 1.0),
        Family.HARDY_BALL: (n, 1.0),
        Family.BERGMAN_BALL: (n + 1, 1.0),
    }
    if fam is Family.WEIGHTED_BERGMAN_DISK:
        e, kappa = space.alpha + 2, space.alpha + 1
    elif fam in expo:
        e, kappa = expo[fam]
    else:
        return None
    r = float(np.linalg.norm(w))
    return kappa / (1 - r) ** e, kappa / (1 + r) ** e


@dataclass(frozen=True)
class DominantTermBound:
    """``|g| >= |c_t| inf|K_t| - sum_{j != t} |c_j| sup|K_j|``, rescaled.

    With ``S = max_{j != t} sup|K_j|`` the test reads ``lhs < rhs`` where
    ``lhs = sum_{j != t} |c_j| sup|K_j| / (|c_t| S)`` and
    ``rhs = inf|K_t| / S``.
    """

    index: int
    lhs: float
    rhs: float
    lower_bound: float

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


def dominant_term_bound(sol: RkhsSolution) -> Optional[DominantTermBound]:
    """Best triangle-inequality bound over the choice of dominant term.

    Returns None when some kernel is unbounded or has zero infimum on the
    domain (half-planes), where the bound cannot apply.
    """
    bounds = [_kernel_bounds(sol.space, w) for w in sol.nodes]
    if any(b is None for b in bounds):
        return None
    sup = np.array([b[0] for b in bounds])
    inf = np.array([b[1] for b in bounds])
    c = np.abs(sol.coefficients)
    k = c.size
    best = None
    for t in range(k):
        if c[t] == 0:
            continue
        others = np.arange(k) != t
        if not others.any():
            cand = DominantTermBound(t, 0.0, 1.0, float(c[t] * inf[t]))
        else:
            S = sup[others].max()
            lhs = float(np.sum(c[others] * sup[others]) / (c[t] * S))
            rhs = float(inf[t] / S)
            cand = DominantTermBound(t, lhs, rhs, float(c[t] * inf[t] - np.sum(c[others] * sup[others])))
        if best is None or cand.rhs / max(cand.lhs, 1e-300) > best.rhs / max(best.lhs, 1e-300):
            best = cand
    return best


def _numerator_zeros(sol: RkhsSolution) -> Optional[np.ndarray]:
    """Zeros in the domain of the cleared numerator, one-variable rational kernels only."""
    fam = sol.space.family
    if sol.space.n != 1:
        return None
    w = sol.nodes[:, 0]
    c = sol.coefficients
    if fam in (Family.HARDY_DISK, Family.HARDY_BALL):
        num = hardy.gamma_numerator(c, w)
        inside = lambda r: np.abs(r) < 1
    elif fam is Family.HARDY_HALF_PLANE:
        # sum_j c_j / (2 pi i (conj w_j - z)), cleared by prod_l (conj w_l - z)
        num = np.zeros(w.size, dtype=complex)
        for j in range(w.size):
            term = np.array([c[j] / (2j * np.pi)])
            for l in range(w.size):
                if l != j:
                    term = P.polymul(term, [np.conj(w[l]), -1.0])
            num[: term.size] += term
        inside = lambda r: r.imag > 0
    else:
        return None
    if not np.any(num):
        return None
    roots = hardy.durand_kerner(num)
    return roots[inside(roots)]


def _domain_samples(space: SpaceDescriptor, m: int = 14, seed: int = 0) -> np.ndarray:
    """Interior plus boundary samples; half-planes are reached by Cayley maps."""
    fam, n = space.family, space.n
    rng = np.random.default_rng(seed)
    if fam in (Family.HARDY_DISK, Family.HARDY_BALL, Family.BERGMAN_BALL, Family.WEIGHTED_BERGMAN_DISK):
        return np.concatenate([_ball_points(n, m, seed), _sphere_points(n, m - 2, seed + 1)])
    radii = np.sqrt(rng.uniform(size=(2**m, n)))
    zeta = np.concatenate([radii * _torus_points(n, m, seed + 1), _torus_points(n, m - 2, seed + 2)])
    if fam is Family.HARDY_POLYDISK:
        return zeta
    zeta = zeta[np.all(np.abs(1 - zeta) > 1e-3, axis=-1)]
    w = (1 + zeta) / (1 - zeta)
    return 1j * w if fam is Family.HARDY_HALF_PLANE else w


def _sampled_margin(sol: RkhsSolution, m: int = 14):
    """Minimum sampled modulus against ``SAMPLING_MARGIN`` times the largest
    sampled gradient times a covering radius.  Not a proof."""
    pts = _domain_samples(sol.space, m)
    pts = pts[np.all(np.isfinite(pts), axis=-1)]
    vals = np.abs(_g(sol, pts))
    h = 1e-6
    grad = np.zeros(pts.shape[0])
    for i in range(sol.space.n):
        e = np.zeros(sol.space.n)
        e[i] = h
        for d in (e, 1j * e):
            grad += (np.abs(_g(sol, pts + d) - _g(sol, pts - d)) / (2 * h)) ** 2
    grad = np.sqrt(grad)
    cover = 2.0 * pts.shape[0] ** (-1.0 / (2 * sol.space.n))
    margin = SAMPLING_MARGIN * grad.max() * cover
    return float(vals.min()), float(margin), int(pts.shape[0])


@dataclass
class LiftCertificate:
    zero_free: bool
    min_modulus_bound: float
    grid_used: int
    branch_consistent: bool
    method: str
    node_error: float
    bound: Optional[DominantTermBound] = None
    zeros: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.zero_free and self.branch_consistent


def certify_zero_free(sol: RkhsSolution):
    """Return ``(zero_free, min_modulus_bound, grid_used, method, bound, zeros)``."""
    bound = dominant_term_bound(sol)
    if bound is not None and bound.holds:
        return True, bound.lower_bound, 0, "triangle", bound, None
    zeros = _numerator_zeros(sol)
    if zeros is not None:
        return zeros.size == 0, 0.0, 0, "roots", bound, zeros
    vmin, margin, m = _sampled_margin(sol)
    return vmin > margin, vmin, m, "sampling", bound, None


# ------------------------------------------------------------------ lift

def _center(space: SpaceDescriptor) -> np.ndarray:
    if space.family is Family.HARDY_HALF_PLANE:
        return np.full(space.n, 1j)
    if space.family is Family.WEIGHTED_BERGMAN_HALF_PLANE:
        return np.ones(1, dtype=complex)
    return np.zeros(space.n, dtype=complex)


@dataclass(frozen=True, eq=False)
class LiftedInterpolant:
    """``z -> exp((2/p) (log g(z) + 2 pi i sheet))`` with log g continued
    along the segment from the domain centre."""

    g: RkhsSolution
    p: Exponent
    sheet: int = 0

    def log_g(self, Z, start: int = 32, max_steps: int = 1 << 14):
        c = _center(self.g.space)
        flat = Z.reshape(-1, Z.shape[-1])
        m = start
        while m <= max_steps:
            t = np.linspace(0.0, 1.0, m + 1)[:, None, None]
            v = _g(self.g, c + t * (flat[None] - c))
            if np.any(v == 0):
                raise hardy.BranchTrackingError("g vanishes on a continuation path")
            arg = np.angle(v)
            jumps = (np.diff(arg, axis=0) + np.pi) % (2 * np.pi) - np.pi
            if np.abs(jumps).max(initial=0.0) <= np.pi / 2:
                theta = arg[0] + np.sum(jumps, axis=0)
                return (np.log(np.abs(v[-1])) + 1j * theta).reshape(Z.shape[:-1])
            m *= 2
        raise hardy.BranchTrackingError("argument jump above pi/2 persists after maximal refinement")

    def __call__(self, z, *, allow_boundary: bool = False):
        Z = as_points(self.g.space, z)
        _require_domain(self.g.space, Z, "evaluation point", closed=allow_boundary)
        if self.p.p == 2:
            return _g(self.g, Z)
        L = self.log_g(Z) + 2j * np.pi * self.sheet
        return np.exp((2.0 / self.p.p) * L)


def _even(p) -> int:
    pf = float(p.p if isinstance(p, Exponent) else p)
    if pf < 2 or pf != round(pf) or round(pf) % 2:
        raise ValueError(f"the lift needs an even integer p >= 2, got {pf}")
    return int(round(pf))


def lift(g: RkhsSolution, p, original_values, *, sheet: int = 0):
    """Lift ``g`` (solved with values ``s^(p/2)``) to ``g^(2/p)``.

    Parameters
    ----------
    g : RkhsSolution
    p : even integer
    original_values : array_like
        The unpowered targets ``s``; all must be nonzero.
    sheet : int
        Branch override: the lift uses ``log g + 2 pi i sheet``.  The
        default 0 is the principal value at the domain centre.  No branch
        search is ever done automatically.

    Returns
    -------
    (LiftedInterpolant, LiftCertificate)
    """
    pe = _even(p)
    s = np.atleast_1d(np.asarray(original_values, dtype=complex))
    if s.shape != g.coefficients.shape:
        raise ValueError("original_values must match the number of nodes")
    if np.any(s == 0):
        raise ValueError("the lift needs nonzero target values; use the general solver instead")
    f = LiftedInterpolant(g, Exponent(pe), int(sheet))
    if pe == 2:
        # the lift is g itself; zeros of g do not matter
        zero_free, mmb, grid, method, bound, zeros = True, 0.0, 0, "identity", None, None
    else:
        zero_free, mmb, grid, method, bound, zeros = certify_zero_free(g)
    try:
        err = float(np.max(np.abs(f(g.nodes if g.space.n > 1 else g.nodes[:, 0]) - s) / np.maximum(1.0, np.abs(s))))
    except hardy.BranchTrackingError:
        err = math.inf
    cert = LiftCertificate(
        zero_free=bool(zero_free),
        min_modulus_bound=max(float(mmb), 0.0),
        grid_used=grid,
        branch_consistent=err <= NODE_TOL,
        method=method,
        node_error=err,
        bound=bound,
        zeros=zeros,
    )
    return f, cert


def lift_problem(space: SpaceDescriptor, nodes, values, p, *, sheet: int = 0):
    """Power the data, solve the p = 2 problem and lift; returns ``(f, certificate, g)``."""
    pe = _even(p)
    s = np.atleast_1d(np.asarray(values, dtype=complex))
    g = rkhs_solve(space, nodes, s ** (pe // 2))
    f, cert = lift(g, pe, s, sheet=sheet)
    return f, cert, g


@dataclass
class CrossCheckReport:
    max_deviation: float
    norm_deviation: float
    solver_norm: float
    lift_norm: float
    certificate: LiftCertificate
    grid: int


def cross_check_hardy(problem: "hardy.HardyProblem", *, grid: int = 1024, sheet: int = 0, **solve_opts):
    """Compare the general H^p(D) solver with the lift for even ``p``.

    Raises :class:`LiftCertificateError` when the lift is not certified,
    since the comparison is meaningless then.
    """
    pe = _even(problem.p)
    space = SpaceDescriptor(Family.HARDY_DISK)
    f, cert, _ = lift_problem(space, problem.nodes, problem.values, pe, sheet=sheet)
    if not cert.ok:
        why = []
        if not cert.zero_free:
            where = "" if cert.zeros is None or not cert.zeros.size else f" (zeros at {np.round(cert.zeros, 6)})"
            why.append(f"g has a zero in the disk{where}")
        if not cert.branch_consistent:
            why.append(f"lifted node values miss the targets by {cert.node_error:.3e}")
        raise LiftCertificateError("even-p lift not certified: " + "; ".join(why), cert)
    rep = hardy.solve(problem, **solve_opts)
    zs = circle_grid(grid)
    fl = f(zs, allow_boundary=True)
    fs = hardy.candidate_eval(rep.solution, zs)
    lift_norm = hardy_disk_boundary_norm(lambda z: f(z, allow_boundary=True), pe, max(grid, 4096))
    return CrossCheckReport(
        max_deviation=float(np.abs(fl - fs).max()),
        norm_deviation=abs(rep.norm - lift_norm),
        solver_norm=rep.norm,
        lift_norm=lift_norm,
        certificate=cert,
        grid=grid,
    )
