"""Time-delay estimation by l^p minimisation.

Two sensors observe ``x1[n] = s[n] + v1[n]`` and ``x2[n] = beta s[n-D] + v2[n]``.
The delay is estimated from the FIR filter::

    h_opt = argmin_h  sum_{n=M+1}^{N-M} | x2[n] - beta sum_{i=-M}^{M} h_i x1[n-i] |^p

followed by ``D_opt = argmax_D sum_i h_i sinc(D - i)``.

The filter problem is recast as a minimal-norm interpolation in l^p_S: a
row reduction ``[T y] = S [E y_hat]`` turns ``y - beta T h`` into
``S (y_hat - beta E h)``, whose trailing ``#rows - rank`` entries are fixed.

Signals are one-based in the formulas above and zero-based as arrays here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import lpspace
from ._numerics import PowerSumObjective, minimize_power_sum
from .sip import ExponentLike, as_exponent

__all__ = [
    "TdeProblem",
    "TdeResult",
    "build_system",
    "rref_factor",
    "factor_residual",
    "estimate",
    "direct_objective_minimum",
    "sinc_score",
    "delay_from_filter",
    "synthetic_signals",
    "NOISE_PROBABILITIES",
]

# P(-a), P(0), P(+a) for the impulsive noise model
NOISE_PROBABILITIES = (1 / 3, 1 / 3, 1 / 3)
# continuation cap below p = 1.2 for the filter solve
TDE_FINE_STEP = 0.02


@dataclass(frozen=True, eq=False)
class TdeProblem:
    x1: np.ndarray
    x2: np.ndarray
    M: int
    beta: float = 1.0
    p: ExponentLike = 2.0
    D_grid: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        x1 = np.asarray(self.x1, dtype=float)
        x2 = np.asarray(self.x2, dtype=float)
        if x1.ndim != 1 or x1.shape != x2.shape:
            raise ValueError("x1 and x2 must be 1-d arrays of equal length")
        M = int(self.M)
        if M < 0:
            raise ValueError("M must be nonnegative")
        if x1.size <= 4 * M + 1:
            raise ValueError(f"need N > 4M + 1 samples (N={x1.size}, M={M})")
        if self.beta == 0 or not np.isfinite(self.beta):
            raise ValueError("beta must be finite and nonzero")
        grid = (-float(M), float(M), 0.01) if self.D_grid is None else tuple(map(float, self.D_grid))
        if len(grid) != 3 or grid[2] <= 0 or grid[1] < grid[0]:
            raise ValueError("D_grid must be (min, max, step) with step > 0 and max >= min")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "p", as_exponent(self.p))
        object.__setattr__(self, "D_grid", grid)

    @property
    def N(self) -> int:
        return self.x1.size


@dataclass
class TdeResult:
    h_opt: np.ndarray
    D_opt: float
    objective: float
    rank: int
    factor_residual: float
    lp_report: Optional[lpspace.LpSReport] = None

    def h_index(self, i: int) -> float:
        """Filter tap ``h_i`` for ``-M <= i <= M``."""
        M = (self.h_opt.size - 1) // 2
        return float(self.h_opt[i + M])


def build_system(prob: TdeProblem):
    """Toeplitz matrix ``T[n, i] = x1[n - i]`` and ``y[n] = x2[n]``.

    Rows run over ``n = M+1 .. N-M`` and columns over ``i = -M .. M``
    (one-based signal indices).
    """
    N, M = prob.N, prob.M
    n = np.arange(M + 1, N - M + 1)
    i = np.arange(-M, M + 1)
    T = prob.x1[(n[:, None] - i[None, :]) - 1]
    y = prob.x2[n - 1]
    return T, y


def rref_factor(T, y, tol: Optional[float] = None):
    """Gauss-Jordan elimination ``[T y] = S [E y_hat]``.

    Pivots are chosen by partial pivoting over the columns of ``T`` only;
    the inverse of every row operation is accumulated into ``S``.

    Returns
    -------
    S : ndarray, shape (m, m)
    E : ndarray, shape (m, c)
        Reduced row echelon form of ``T``; its first ``rank`` rows hold the
        pivots.
    y_hat : ndarray, shape (m,)
    pivots : list of int
        Pivot column of each of the first ``rank`` rows.
    """
    A = np.column_stack([np.asarray(T, dtype=float), np.asarray(y, dtype=float)])
    m, c = A.shape[0], A.shape[1] - 1
    S = np.eye(m)
    if tol is None:
        tol = max(m, c) * np.finfo(float).eps * max(np.abs(A[:, :c]).max(initial=0.0), 1.0)
    pivots = []
    row = 0
    for col in range(c):
        if row == m:
            break
        k = row + int(np.argmax(np.abs(A[row:, col])))
        if abs(A[k, col]) <= tol:
            continue
        if k != row:
            A[[row, k]] = A[[k, row]]
            S[:, [row, k]] = S[:, [k, row]]
        piv = A[row, col]
        A[row] /= piv
        S[:, row] *= piv
        f = A[:, col].copy()
        f[row] = 0.0
        A -= np.outer(f, A[row])
        # undo of "row_i -= f_i row_r" is "col_r of S += sum_i f_i col_i"
        S[:, row] += S @ f
        pivots.append(col)
        row += 1
    return S, A[:, :c], A[:, c], pivots


def factor_residual(T, y, S, E, y_hat) -> float:
    Ty = np.column_stack([T, y])
    return float(np.abs(Ty - S @ np.column_stack([E, y_hat])).max() / max(np.abs(Ty).max(), 1e-300))


def sinc_score(h, D) -> np.ndarray:
    """``sum_i h_i sinc(D - i)`` for ``i = -M .. M`` (vectorised over ``D``)."""
    h = np.asarray(h, dtype=float)
    M = (h.size - 1) // 2
    i = np.arange(-M, M + 1)
    D = np.asarray(D, dtype=float)
    return np.sinc(D[..., None] - i) @ h


def delay_from_filter(h, D_grid, tol: float = 1e-6) -> float:
    """Grid scan of :func:`sinc_score` followed by golden-section refinement."""
    lo, hi, step = D_grid
    n = int(np.floor((hi - lo) / step + 1e-9))
    grid = np.linspace(lo, lo + n * step, n + 1)
    scores = sinc_score(h, grid)
    j = int(np.argmax(scores))
    if j == 0 or j == grid.size - 1:
        return float(grid[j])
    res = minimize_scalar(
        lambda d: -float(sinc_score(h, d)),
        bracket=(grid[j - 1], grid[j], grid[j + 1]),
        method="golden",
        tol=tol,
    )
    D = float(res.x)
    if not lo <= D <= hi or -res.fun <= scores[j]:
        return float(grid[j])
    return D


def _objective(prob, T, y, h) -> float:
    r = y - prob.beta * (T @ h)
    return float(np.sum(np.abs(r) ** prob.p.p))


def estimate(prob: TdeProblem, **solve_opts) -> TdeResult:
    """Estimate the filter and the delay through the l^p_S recast."""
    T, y = build_system(prob)
    S, E, y_hat, pivots = rref_factor(T, y)
    rank = len(pivots)
    m = T.shape[0]
    resid = factor_residual(T, y, S, E, y_hat)
    report = None
    if rank < m:
        opts = {"fine_step": TDE_FINE_STEP, **solve_opts}
        lp = lpspace.LpSProblem(S, np.arange(rank, m), y_hat[rank:], prob.p)
        report = lpspace.solve(lp, **opts)
        x = np.real(report.x_min)
    else:
        # nothing is constrained: the filter fits y exactly
        x = np.zeros(m)
    # E h = (y_hat - x) / beta on the pivot rows, free taps set to zero
    h = np.zeros(T.shape[1])
    h[pivots] = (y_hat[:rank] - x[:rank]) / prob.beta
    D = delay_from_filter(h, prob.D_grid)
    return TdeResult(h, D, _objective(prob, T, y, h), rank, resid, report)


def direct_objective_minimum(prob: TdeProblem):
    """Minimise the filter objective over ``h`` directly; returns ``(h, value)``."""
    T, y = build_system(prob)
    obj = PowerSumObjective(-prob.beta * T, y, prob.p.p, real=True)
    res = minimize_power_sum(obj)
    if not res.converged:
        raise lpspace.ConvergenceError(f"direct filter minimisation did not converge (p={prob.p.p})")
    return res.t, _objective(prob, T, y, res.t)


def synthetic_signals(N: int, D: int, beta: float = 1.0, noise: float = 0.0, seed: int = 0,
                      probabilities=NOISE_PROBABILITIES):
    """Uniform [0, 1) source delayed by an integer ``D`` with impulsive noise on ``x2``.

    The noise takes values ``-noise, 0, +noise`` with ``probabilities``; the
    sign pattern depends only on ``seed``, so amplitudes can be compared on
    identical noise positions.  ``x1`` is noise free.
    """
    if N < 1:
        raise ValueError("N must be positive")
    D = int(D)
    rng = np.random.default_rng(seed)
    pad = abs(D)
    source = rng.uniform(0.0, 1.0, size=N + 2 * pad)
    pattern = rng.choice(np.array([-1.0, 0.0, 1.0]), size=N, p=probabilities)
    n = np.arange(N) + pad
    x1 = source[n]
    x2 = beta * source[n - D] + noise * pattern
    return x1, x2
