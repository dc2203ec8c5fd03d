"""Shared numerical engines: damped Newton for square systems and a convex
minimiser for weighted p-th power sums over an affine family."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

logger = logging.getLogger("sipinterp")


def pack(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag])


def unpack(x: np.ndarray) -> np.ndarray:
    k = x.size // 2
    return x[:k] + 1j * x[k:]


class ConvergenceError(RuntimeError):
    """A nonlinear solve or minimisation failed to converge."""

    def __init__(self, message, *, last_p: Optional[float] = None, residual: Optional[float] = None):
        super().__init__(message)
        self.last_p = last_p
        self.residual = residual


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool


def fd_jacobian(F: Callable, x: np.ndarray, f0: np.ndarray, step: float, central: bool) -> np.ndarray:
    J = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        if central:
            J[:, i] = (F(x + e) - F(x - e)) / (2 * h)
        else:
            J[:, i] = (F(x + e) - f0) / h
    return J


def damped_newton(
    F: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    tol: float = 1e-10,
    max_iter: int = 60,
    fd_step: float = 1e-7,
    central: bool = False,
    jacobian: Optional[Callable] = None,
) -> NewtonResult:
    """Newton's method with backtracking on ``||F||_inf`` for a square real system.

    ``F`` may raise ``FloatingPointError``/``ValueError`` for trial points
    outside its domain; such trials are treated as failed line-search steps.
    """
    x = np.array(x0, dtype=float)
    fx = F(x)
    res = float(np.max(np.abs(fx)))
    it = 0
    while res > tol and it < max_iter:
        it += 1
        J = jacobian(x) if jacobian is not None else fd_jacobian(F, x, fx, fd_step, central)
        try:
            dx = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -fx, rcond=None)[0]
        lam = 1.0
        accepted = False
        while lam >= 1.0 / 1024:
            xt = x + lam * dx
            try:
                ft = F(xt)
            except (FloatingPointError, ValueError, ArithmeticError):
                lam /= 2
                continue
            rt = float(np.max(np.abs(ft)))
            if np.isfinite(rt) and rt < (1 - 1e-4 * lam) * res:
                accepted = True
                break
            lam /= 2
        if not accepted:
            logger.debug("newton: line search stalled at residual %.3e", res)
            break
        x, fx, res = xt, ft, rt
    return NewtonResult(x=x, residual=res, iterations=it, converged=res <= tol)


@dataclass
class MinimizeResult:
    t: np.ndarray
    value: float
    iterations: int
    converged: bool


class PowerSumObjective:
    """``phi(t) = sum_j w_j |b_j + (A t)_j|^p`` with complex or real ``t``.

    Complex unknowns are handled in real coordinates ``(Re t, Im t)``.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, p: float, weights=None, real: bool = False):
        A = np.asarray(A)
        b = np.asarray(b)
        self.p = float(p)
        self.real = real
        self.w = np.ones(A.shape[0]) if weights is None else np.asarray(weights, dtype=float)
        if real:
            if np.iscomplexobj(A) or np.iscomplexobj(b):
                if np.abs(np.imag(A)).max(initial=0) > 0 or np.abs(np.imag(b)).max(initial=0) > 0:
                    raise ValueError("real=True requires real A and b")
            self.Ar = np.real(A).astype(float)
            self.br = np.real(b).astype(float)
            self.dim = A.shape[1]
        else:
            A = A.astype(complex)
            b = b.astype(complex)
            self.A_re = np.hstack([A.real, -A.imag])
            self.A_im = np.hstack([A.imag, A.real])
            self.b = b
            self.dim = 2 * A.shape[1]

    def residual(self, t: np.ndarray) -> np.ndarray:
        if self.real:
            return self.br + self.Ar @ t
        return self.b + self.A_re @ t + 1j * (self.A_im @ t)

    def value(self, t: np.ndarray) -> float:
        u = np.abs(self.residual(t))
        return float(np.sum(self.w * u ** self.p))

    def to_complex(self, t: np.ndarray) -> np.ndarray:
        return t.copy() if self.real else unpack(t)

    def from_complex(self, z: np.ndarray) -> np.ndarray:
        return np.real(z).astype(float) if self.real else pack(z)

    def derivatives(self, t: np.ndarray, with_hessian: bool = True):
        p, w = self.p, self.w
        u = self.residual(t)
        a = np.abs(u)
        val = float(np.sum(w * a**p))
        floor = 1e-8 * max(a.max(initial=0.0), 1e-300)
        ae = np.maximum(a, floor)
        if self.real:
            g = self.Ar.T @ (w * p * ae ** (p - 2) * u)
            if not with_hessian:
                return val, g, None
            d = w * p * (p - 1) * ae ** (p - 2)
            H = self.Ar.T @ (d[:, None] * self.Ar)
        else:
            s = w * p * ae ** (p - 2)
            g = self.A_re.T @ (s * u.real) + self.A_im.T @ (s * u.imag)
            if not with_hessian:
                return val, g, None
            # 2x2 block per sample: s * [I + (p-2) uhat uhat^T]
            ur, ui = u.real / ae, u.imag / ae
            d11 = s * (1 + (p - 2) * ur * ur)
            d22 = s * (1 + (p - 2) * ui * ui)
            d12 = s * (p - 2) * ur * ui
            Ar, Ai = self.A_re, self.A_im
            H = Ar.T @ (d11[:, None] * Ar) + Ai.T @ (d22[:, None] * Ai)
            C = Ar.T @ (d12[:, None] * Ai)
            H += C + C.T
        ridge = 1e-12 * max(np.trace(H) / max(H.shape[0], 1), 1e-300)
        H[np.diag_indices_from(H)] += ridge
        return val, g, H


def minimize_power_sum(
    obj: PowerSumObjective,
    t0: Optional[np.ndarray] = None,
    *,
    gd_iters: int = 25,
    max_iter: int = 50_000,
    rtol: float = 1e-15,
) -> MinimizeResult:
    """Minimise a :class:`PowerSumObjective`.

    A short gradient-descent phase with backtracking is followed by a Newton
    polish with Armijo line search.  The iteration cap counts both phases.
    """
    t = np.zeros(obj.dim) if t0 is None else np.array(t0, dtype=float)
    val = obj.value(t)
    if val == 0.0:
        return MinimizeResult(t, 0.0, 0, True)
    it = 0
    step = 1.0
    for _ in range(gd_iters):
        it += 1
        val, g, _ = obj.derivatives(t, with_hessian=False)
        gg = float(g @ g)
        if gg == 0.0:
            return MinimizeResult(t, val, it, True)
        step *= 2.0
        while step > 1e-30:
            tn = t - step * g
            vn = obj.value(tn)
            if vn <= val - 1e-4 * step * gg:
                break
            step /= 2.0
        else:
            break
        t, val = tn, vn

    converged = False
    stall = 0
    while it < max_iter:
        it += 1
        val, g, H = obj.derivatives(t)
        try:
            L = np.linalg.cholesky(H)
            dt = -np.linalg.solve(L.T, np.linalg.solve(L, g))
        except np.linalg.LinAlgError:
            dt = -np.linalg.lstsq(H, g, rcond=None)[0]
        slope = float(g @ dt)
        if slope >= 0:
            dt, slope = -g, -float(g @ g)
        if -slope <= rtol * val:
            converged = True
            break
        lam = 1.0
        while lam > 1e-20:
            tn = t + lam * dt
            vn = obj.value(tn)
            if vn <= val + 1e-4 * lam * slope:
                break
            lam /= 2.0
        else:
            # no representable decrease left: we are at the floating-point floor
            converged = True
            break
        if val - vn <= 1e-16 * val:
            stall += 1
            if stall >= 3:
                converged = True
                t, val = tn, vn
                break
        else:
            stall = 0
        t, val = tn, vn
    return MinimizeResult(t, obj.value(t), it, converged)
