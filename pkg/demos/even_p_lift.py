"""Even-exponent interpolation through the p = 2 problem.

For p = 2m the interpolant is f = g^{1/m}, where g is the p = 2
interpolant of the values raised to the power m, provided g has no zeros
in the domain.  The Bergman ball example is certified by a one-line
triangle inequality; the three-point Hardy problem at p = 4 is not, since
its g vanishes inside the disk.  Run with ``python demos/even_p_lift.py``.
"""

import numpy as np

from sipinterp import hardy, lift
from sipinterp.kernels import SpaceDescriptor


def bergman_example():
    space = SpaceDescriptor("bergman-ball", 2, 4.0)
    nodes = np.array([[0.25, 0.75], [0.0, 0.0]])
    f, cert, g = lift.lift_problem(space, nodes, [1.0, 0.98], 4)
    bound = lift.dominant_term_bound(g)
    print("Bergman ball, n = 2, p = 4")
    print("  coefficients:", g.coefficients.real)
    print(f"  dominant-term test: {bound.lhs:.7f} < {bound.rhs:.8f} -> {bound.holds}")
    print(f"  certificate method: {cert.method}, values at nodes: {np.round(f(nodes).real, 12)}")


def hardy_example():
    prob = hardy.HardyProblem([0.5, -1 / 3, 0.25j], [1.0, 0.9, 0.8], 4.0)
    print("\nHardy disk, three nodes, p = 4")
    try:
        rep = lift.cross_check_hardy(prob)
        print(f"  lift agrees with the solver to {rep.max_deviation:.1e}")
    except lift.LiftCertificateError as exc:
        print("  lift refused:", exc)
        r = hardy.solve(prob)
        print(f"  general solver norm {r.norm:.9f}, Blaschke zeros {np.round(r.solution.blaschke_zeros, 4)}")


if __name__ == "__main__":
    bergman_example()
    hardy_example()
