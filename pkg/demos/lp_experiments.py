"""Minimal-norm interpolation in l^p_S.

Two fixed problems: the 4x4 Hadamard matrix with the first three
coordinates of S x prescribed as 1, 2, 3, and the inverse of the 16x16
tridiagonal matrix tridiag(1, 2, 1).  Both norms decrease as p grows.
Run with ``python demos/lp_experiments.py``.
"""

import numpy as np

from sipinterp import lpspace


def sweep(name, problem, grid):
    rows, warnings = lpspace.p_sweep(problem, grid)
    print(f"\n{name}")
    print(f"{'p':>7} {'norm':>12} {'last coordinate':>16} {'certificate':>12}")
    shown = rows[:: max(1, len(rows) // 12)]
    if shown[-1] is not rows[-1]:
        shown.append(rows[-1])
    for r in shown:
        print(f"{r.p:7.3f} {r.norm:12.8f} {r.x_min[-1].real:16.8f} {r.certificate:12.1e}")
    for w in warnings:
        print("warning:", w)
    return rows


def main():
    grid = np.exp(np.linspace(np.log(1.02), np.log(10.0), 60))
    rows = sweep("4x4 Hadamard", lpspace.hadamard_problem(), grid)
    # as p -> 1 the free coordinate settles on the plateau [0, 2] with norm 3,
    # and as p -> infinity it tends to -1
    print(f"norm at p={rows[0].p:.2f}: {rows[0].norm:.6f} (p = 1 limit is 3)")

    sweep("16x16 tridiagonal inverse", lpspace.tridiagonal_inverse_problem(16), np.linspace(1.05, 10.0, 40))

    rng = np.random.default_rng(0)
    S = rng.standard_normal((8, 8)) + 2 * np.eye(8)
    prob = lpspace.LpSProblem(S, [1, 4, 6], rng.standard_normal(3), 1.5)
    r = lpspace.solve(prob, oracle=True)
    print(f"\nrandom 8x8 at p=1.5: norm {r.norm:.10f}, oracle gap {r.oracle_gap:.1e}")


if __name__ == "__main__":
    main()
