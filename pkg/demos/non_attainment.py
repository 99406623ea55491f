"""The autonomous problem: lambda2 is not attained.

For constant V the two bumps of the iterate repel each other and drift toward
the truncation boundary while J decreases toward the two-bump threshold
2^(1/2) lambda1_inf. The solver reports this as converged = False with the
diagnosis "mass escape" instead of pretending to find a critical point.
"""

import math

import scalarfield as sf


def main():
    grid = sf.build_grid("cartesian1d", 15, 0.01)
    V = sf.make_potential(sf.PotentialSpec("constant", 1.0), grid)
    p = 4.0

    gs = sf.ground_state(grid, V, p)
    threshold = math.sqrt(2.0) * gs.lam
    print(f"lambda1_inf = {gs.lam:.8f}, two-bump threshold "
          f"sqrt(2)*lambda1_inf = {threshold:.8f}")

    rep = sf.nodal_minimax(grid, V, p,
                           opts=sf.SolverOptions(max_iter=800,
                                                 tol_residual=1e-4))
    sep = rep.extras["separation_history"]
    print(f"converged = {rep.flags['converged']}, diagnosis = {rep.diagnosis!r}")
    print(f"J descended {rep.J_history[0]:.6f} -> {rep.J_history[-1]:.6f} "
          f"(threshold {threshold:.6f})")
    print(f"bump separation grew {sep[0]:.2f} -> {sep[-1]:.2f} "
          "(mass escaping toward the boundary)")


if __name__ == "__main__":
    main()
