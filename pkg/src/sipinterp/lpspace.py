"""Minimal-norm interpolation in l^p_S, the space C^n normed by ``||S x||_p``.

Given coordinates ``J`` and targets ``s``, the minimiser of ``||S x||_p``
subject to ``x_J = s`` satisfies ``x^star = sum_j c_j e_{J(j)}``, so::

    x = S^{-1} [ (S^{-T} E_J c)^{star_q} ]

and :func:`solve` finds ``c`` by damped Newton on ``x(c)_J = s`` with
continuation in ``p`` from the exact ``p = 2`` solution.  :func:`convex_oracle`
minimises ``||S x||_p^p`` directly over the free coordinates as an
independent check.

Indices in this module are zero-based.  The JSON problem format (see
:mod:`sipinterp.io`) uses one-based indices.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from ._numerics import (
    ConvergenceError,
    PowerSumObjective,
    damped_newton,
    minimize_power_sum,
    pack,
    unpack,
)
from .sip import (
    ExponentLike,
    _star_values,
    _weighted_norm,
    as_exponent,
    check_basis_change,
    star_lp_s,
    star_wirtinger,
)

logger = logging.getLogger("sipinterp")

__all__ = [
    "LpSProblem",
    "LpSReport",
    "SweepRow",
    "representer_map",
    "least_norm_p2",
    "solve",
    "convex_oracle",
    "orthogonality_residual",
    "p_sweep",
    "hadamard_problem",
    "tridiagonal_inverse_problem",
]

# problems with more constraints than this go through the primal route
REPRESENTER_MAX_K = 64


@dataclass(frozen=True, eq=False)
class LpSProblem:
    """Minimise ``||S x||_p`` subject to ``x[indices] = values``."""

    S: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    p: ExponentLike = 2.0

    def __post_init__(self):
        S = np.asarray(self.S)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError(f"S must be square, got shape {S.shape}")
        S = S.astype(complex) if np.iscomplexobj(S) else S.astype(float)
        check_basis_change(S)
        n = S.shape[0]
        J = np.atleast_1d(np.asarray(self.indices, dtype=int))
        if J.ndim != 1 or J.size == 0:
            raise ValueError("need at least one constrained index")
        if np.any(np.diff(J) <= 0):
            raise ValueError("constrained indices must be strictly increasing")
        if J[0] < 0 or J[-1] >= n:
            raise ValueError(f"constrained indices must lie in [0, {n})")
        s = np.atleast_1d(np.asarray(self.values))
        if s.shape != J.shape:
            raise ValueError("values and indices must have equal length")
        s = s.astype(complex) if np.iscomplexobj(s) else s.astype(float)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "indices", J)
        object.__setattr__(self, "values", s)
        object.__setattr__(self, "p", as_exponent(self.p))

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def k(self) -> int:
        return self.indices.size

    @property
    def free(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n), self.indices)

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.S) or np.iscomplexobj(self.values))

    def with_p(self, p) -> "LpSProblem":
        return LpSProblem(self.S, self.indices, self.values, p)

    def with_values(self, values) -> "LpSProblem":
        return LpSProblem(self.S, self.indices, values, self.p)

    def norm(self, x) -> float:
        Sx = self.S @ np.asarray(x)
        return _weighted_norm(Sx, np.ones(Sx.size), self.p.p)


@dataclass
class LpSReport:
    x_min: np.ndarray
    c: Optional[np.ndarray]
    norm: float
    residuals: np.ndarray
    p: float
    iterations: int
    certificate: float
    method: str
    oracle_gap: Optional[float] = None
    warnings: List[str] = field(default_factory=list)


class _Factors:
    """LU factors of S shared by the forward and transposed solves."""

    def __init__(self, S):
        self.lu = scipy.linalg.lu_factor(S)

    def solve(self, b):
        return scipy.linalg.lu_solve(self.lu, b)

    def solve_t(self, b):
        return scipy.linalg.lu_solve(self.lu, b, trans=1)


def _image(c, problem: LpSProblem, factors: _Factors, p: float) -> np.ndarray:
    """``S x(c)``, kept separately because it carries entries far below the
    rounding level of ``x`` itself when p is close to 1."""
    q = p / (p - 1.0)
    v = np.zeros(problem.n, dtype=complex)
    v[problem.indices] = c
    w = factors.solve_t(v)
    return _star_values(w, np.ones(w.size), q)


def _representer(c, problem: LpSProblem, factors: _Factors, p: float) -> np.ndarray:
    return factors.solve(_image(c, problem, factors, p))


def representer_map(c, problem: LpSProblem) -> np.ndarray:
    """``S^{-1} [ (S^{-T} E_J c)^{star_q} ]`` with ``q`` conjugate to ``problem.p``."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    if c.shape != (problem.k,):
        raise ValueError(f"expected {problem.k} coefficients, got shape {c.shape}")
    return _representer(c, problem, _Factors(problem.S), problem.p.p)


def least_norm_p2(problem: LpSProblem) -> np.ndarray:
    """Exact minimiser of ``||S x||_2`` under the constraints (QR least squares)."""
    x = np.zeros(problem.n, dtype=complex)
    x[problem.indices] = problem.values
    free = problem.free
    if free.size:
        A = problem.S[:, free]
        b = problem.S @ x
        Q, R = np.linalg.qr(A)
        x[free] = -scipy.linalg.solve_triangular(R, Q.conj().T @ b)
    return x


def _coefficients(x, problem: LpSProblem, p: float) -> np.ndarray:
    """Representer coefficients read off from ``x^star`` at exponent ``p``."""
    return star_lp_s(x, problem.S, p, check=False)[problem.indices]


def orthogonality_residual(x, problem: LpSProblem, Sx=None) -> float:
    """``max |[e_i, x]| / (||e_i|| ||x||)`` over unconstrained coordinates ``i``.

    Zero exactly when ``x`` is semi-orthogonal to every vector vanishing on
    the constrained coordinates.  ``Sx`` may be supplied when it is known
    more accurately than ``S @ x``.
    """
    free = problem.free
    if Sx is None:
        Sx = problem.S @ np.asarray(x, dtype=complex)
    p = problem.p.p
    nx = _weighted_norm(Sx, np.ones(Sx.size), p)
    if free.size == 0 or nx == 0.0:
        return 0.0
    xs = problem.S.T @ _star_values(Sx, np.ones(Sx.size), p)
    col = np.array([_weighted_norm(problem.S[:, i], np.ones(problem.n), p) for i in free])
    return float(np.max(np.abs(xs[free]) / (col * nx)))


def _report(problem, x, c, iterations, method, Sx=None) -> LpSReport:
    if problem.is_real:
        x = x.real.copy()
    norm = problem.norm(x) if Sx is None else _weighted_norm(Sx, np.ones(Sx.size), problem.p.p)
    return LpSReport(
        x_min=x,
        c=c,
        norm=norm,
        residuals=np.abs(x[problem.indices] - problem.values),
        p=problem.p.p,
        iterations=iterations,
        certificate=orthogonality_residual(x, problem, Sx),
        method=method,
    )


def _jacobian_c(c, problem, factors, p, Minv_t) -> np.ndarray:
    """Real Jacobian of ``c -> x(c)_J`` in ``(Re c, Im c)`` coordinates."""
    q = p / (p - 1.0)
    w = Minv_t @ c
    a, b, g, u, v = star_wirtinger(w, q)
    Mc = np.conj(Minv_t)
    A = a[:, None] * Minv_t + np.outer(g, u @ Minv_t)
    B = b[:, None] * Mc + np.outer(g, v @ Mc)
    P = factors.solve(A)[problem.indices]
    Q = factors.solve(B)[problem.indices]
    dr, di = P + Q, 1j * (P - Q)
    return np.block([[dr.real, di.real], [dr.imag, di.imag]])


def _newton_c(problem, factors, c0, p, tol, max_iter, jacobian="analytic"):
    s = problem.values

    def F(y):
        x = _representer(unpack(y), problem, factors, p)
        return pack(x[problem.indices] - s)

    if jacobian == "analytic":
        E = np.zeros((problem.n, problem.k), dtype=complex)
        E[problem.indices, np.arange(problem.k)] = 1.0
        Minv_t = factors.solve_t(E)
        res = damped_newton(
            F, pack(c0), tol=tol, max_iter=max_iter,
            jacobian=lambda y: _jacobian_c(unpack(y), problem, factors, p, Minv_t),
        )
    elif jacobian == "fd":
        # the star map is steep near sparse vectors when p or q approaches 1
        central = min(p, p / (p - 1.0)) < 1.5
        res = damped_newton(F, pack(c0), tol=tol, max_iter=max_iter, central=central)
    else:
        raise ValueError(f"unknown jacobian mode {jacobian!r}")
    return unpack(res.x), res


def _max_step(p: float, step: float, fine: float) -> float:
    return min(step, fine) if p < 1.2 else step


def _continuation(
    problem: LpSProblem,
    x_start: np.ndarray,
    c_start: np.ndarray,
    p_start: float,
    solve_at,
    *,
    step: float,
    fine_step: float,
    min_step: float = 1e-4,
):
    """Drive ``solve_at(history, p) -> (x, c, iterations) | None`` from
    ``p_start`` to ``problem.p`` with adaptive step control.

    ``history`` lists the accepted ``(p, x, c)`` triples, most recent last.
    """
    target = problem.p.p
    history = [(p_start, x_start, c_start)]
    p_cur, total = p_start, 0
    h = _max_step(p_cur, step, fine_step)
    first = True
    while abs(target - p_cur) > 1e-14 or first:
        remaining = target - p_cur
        h = min(h, _max_step(min(p_cur, target), step, fine_step))
        pk = p_cur + math.copysign(min(h, abs(remaining)), remaining) if remaining else p_cur
        out = solve_at(history, pk)
        if out is not None:
            x, c, its = out
            history = (history + [(pk, x, c)])[-2:]
            total += its
            p_cur = pk
            h = 1.5 * h
            first = False
            continue
        if h <= min_step:
            raise ConvergenceError(
                f"continuation stalled at p={p_cur:.6g} (target {target:.6g})", last_p=float(p_cur)
            )
        h /= 2
    _, x, c = history[-1]
    return x, c, total


def _solve_representer(problem, tol, max_newton, step, fine_step, jacobian):
    factors = _Factors(problem.S)
    x0 = least_norm_p2(problem)
    c0 = _coefficients(x0, problem, 2.0)

    def residual(c, p):
        return np.max(np.abs(_representer(c, problem, factors, p)[problem.indices] - problem.values))

    def solve_at(history, p):
        # c moves continuously in p; reading it off x^star instead is unstable
        # when S x is nearly sparse and p is close to 1
        p1, x1, c1 = history[-1]
        starts = [c1, _coefficients(x1, problem, p)]
        if len(history) > 1:
            p0, _, c0_ = history[-2]
            starts.append(c1 + (c1 - c0_) * (p - p1) / (p1 - p0))
        starts.sort(key=lambda c: residual(c, p))
        iters = 0
        for start in starts[:2]:
            c, res = _newton_c(problem, factors, start, p, tol, max_newton, jacobian)
            iters += res.iterations
            if res.converged:
                return _representer(c, problem, factors, p), c, iters
        logger.debug("lp representer: Newton failed at p=%.6g (residual %.3e)", p, res.residual)
        return None

    x, c, its = _continuation(problem, x0, c0, 2.0, solve_at, step=step, fine_step=fine_step)
    return x, c, its, _image(c, problem, factors, problem.p.p)


def _primal_objective(problem: LpSProblem, p: float) -> PowerSumObjective:
    x0 = np.zeros(problem.n, dtype=problem.values.dtype)
    x0[problem.indices] = problem.values
    real = problem.is_real
    return PowerSumObjective(problem.S[:, problem.free], problem.S @ x0, p, real=real)


def _assemble(problem, obj, t) -> np.ndarray:
    x = np.zeros(problem.n, dtype=complex)
    x[problem.indices] = problem.values
    x[problem.free] = obj.to_complex(t)
    return x


def _solve_primal(problem, step, fine_step, max_iter=50_000):
    def solve_at(history, p):
        x_prev = history[-1][1]
        obj = _primal_objective(problem, p)
        res = minimize_power_sum(obj, obj.from_complex(x_prev[problem.free]), gd_iters=0, max_iter=max_iter)
        if not res.converged:
            return None
        x = _assemble(problem, obj, res.t)
        return x, _coefficients(x, problem, p), res.iterations

    x0 = least_norm_p2(problem)
    return _continuation(
        problem, x0, _coefficients(x0, problem, 2.0), 2.0, solve_at, step=step, fine_step=fine_step
    )


def solve(
    problem: LpSProblem,
    *,
    tol: float = 1e-10,
    max_newton: int = 60,
    step: float = 0.25,
    fine_step: float = 0.05,
    method: str = "auto",
    jacobian: str = "analytic",
    oracle: bool = False,
) -> LpSReport:
    """Minimal-norm interpolant in l^p_S.

    Parameters
    ----------
    problem : LpSProblem
    tol : float
        Absolute tolerance on the interpolation residual.
    step, fine_step : float
        Maximal continuation step in p, and the smaller cap used below p = 1.2.
    method : {"auto", "representer", "primal"}
        ``"representer"`` solves for the ``k`` representer coefficients by
        Newton.  ``"primal"`` runs the same continuation but minimises over
        the ``n - k`` free coordinates, which is far cheaper when ``k`` is
        large.  ``"auto"`` picks the representer route for
        ``k <= REPRESENTER_MAX_K``.
    jacobian : {"analytic", "fd"}
        Newton Jacobian for the representer route: exact derivatives of the
        star map, or finite differences (step 1e-7, central when p or its
        conjugate is below 1.5).
    oracle : bool
        Also run :func:`convex_oracle` and store the norm gap.

    Returns
    -------
    LpSReport
    """
    if method == "auto":
        method = "representer" if problem.k <= REPRESENTER_MAX_K else "primal"
    if problem.k == problem.n:
        x = np.zeros(problem.n, dtype=complex)
        x[problem.indices] = problem.values
        rep = _report(problem, x, _coefficients(x, problem, problem.p.p), 0, "direct")
    elif not np.any(problem.values):
        rep = _report(problem, np.zeros(problem.n, dtype=complex), np.zeros(problem.k, complex), 0, "direct")
    elif method == "representer":
        x, c, its, Sx = _solve_representer(problem, tol, max_newton, step, fine_step, jacobian)
        rep = _report(problem, x, c, its, method, Sx)
    elif method == "primal":
        x, c, its = _solve_primal(problem, step, fine_step)
        rep = _report(problem, x, c, its, method)
    else:
        raise ValueError(f"unknown method {method!r}")
    if oracle:
        _, onorm = convex_oracle(problem)
        rep.oracle_gap = abs(rep.norm - onorm)
    return rep


def convex_oracle(problem: LpSProblem, t0=None, *, max_iter: int = 50_000):
    """Directly minimise ``||S x||_p^p`` over the free coordinates.

    Returns ``(x, norm)``.  ``t0`` optionally seeds the free coordinates
    (complex, length ``n - k``).
    """
    x = np.zeros(problem.n, dtype=complex)
    x[problem.indices] = problem.values
    if problem.free.size:
        obj = _primal_objective(problem, problem.p.p)
        start = None if t0 is None else obj.from_complex(np.asarray(t0, dtype=complex))
        res = minimize_power_sum(obj, start, max_iter=max_iter)
        if not res.converged:
            raise ConvergenceError(f"convex oracle hit the iteration cap (p={problem.p.p})")
        x = _assemble(problem, obj, res.t)
    if problem.is_real:
        x = x.real.copy()
    return x, problem.norm(x)


@dataclass
class SweepRow:
    p: float
    x_min: np.ndarray
    norm: float
    certificate: float
    oracle_gap: Optional[float] = None
    flagged: bool = False


def _sweep_chunk(problem, ps, opts):
    rows = []
    for p in ps:
        try:
            rep = solve(problem.with_p(p), **opts)
        except ConvergenceError as exc:
            raise ConvergenceError(f"sweep failed at p={p:.6g}: {exc}", last_p=exc.last_p) from exc
        rows.append(SweepRow(p, rep.x_min, rep.norm, rep.certificate, rep.oracle_gap))
    return rows


def _flag_jumps(rows: List[SweepRow]) -> List[str]:
    msgs = []
    lip = None
    for a, b in zip(rows, rows[1:]):
        dp = b.p - a.p
        dx = float(np.max(np.abs(b.x_min - a.x_min)))
        if lip is not None and dx > 10 * dp * max(lip, 1e-12):
            b.flagged = True
            msg = f"possible solver failure: x_min jumps by {dx:.3e} between p={a.p:.6g} and p={b.p:.6g}"
            msgs.append(msg)
            logger.warning(msg)
        lip = dx / dp if lip is None else max(lip, dx / dp)
    return msgs


def p_sweep(problem: LpSProblem, p_grid: Sequence[float], *, jobs: int = 1, **opts):
    """Solve across ``p_grid`` and return ``(rows, warnings)``.

    Each solve runs its own continuation from the exact p = 2 solution, so
    with ``jobs > 1`` contiguous chunks of the grid are processed in
    parallel.  Rows come back ordered by ``p``.  Jumps in ``x_min`` much
    larger than the running Lipschitz estimate are flagged as solver
    failures; the true path is continuous in ``p``.
    """
    ps = np.asarray(p_grid, dtype=float)
    if ps.ndim != 1 or ps.size == 0:
        raise ValueError("p_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(ps) <= 0):
        raise ValueError("p_grid must be strictly increasing")
    if ps[0] <= 1:
        raise ValueError("p_grid must lie in (1, inf)")
    jobs = max(1, int(jobs))
    if jobs == 1:
        rows = _sweep_chunk(problem, ps, opts)
    else:
        chunks = [c for c in np.array_split(ps, jobs) if c.size]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: _sweep_chunk(problem, c, opts), chunks))
        rows = [r for part in parts for r in part]
    return rows, _flag_jumps(rows)


def hadamard_problem(p: ExponentLike = 2.0) -> LpSProblem:
    """``S = H_4 / 4`` (Sylvester Hadamard), ``x_1, x_2, x_3 = 1, 2, 3``.

    As ``p -> inf`` the free coordinate tends to -1 with norm 1.25.
    """
    return LpSProblem(scipy.linalg.hadamard(4) / 4.0, [0, 1, 2], [1.0, 2.0, 3.0], p)


def tridiagonal_inverse_problem(n: int = 16, p: ExponentLike = 2.0) -> LpSProblem:
    """``S^{-1}`` tridiagonal Toeplitz (2 on the diagonal, 1 off it), with
    ``x_1 = 1, x_6 = 2, x_11 = 3`` (one-based)."""
    if n < 11:
        raise ValueError("n must be at least 11")
    T = 2 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    return LpSProblem(np.linalg.inv(T), [0, 5, 10], [1.0, 2.0, 3.0], p)
