"""Sign-changing solution at the second minimax level, with bounds.

Runs the full pipeline for V = 1 - 0.3 exp(-0.5|x|): hypothesis checks,
the sandwich lambda1_inf < lambda2 < (lambda1^2 + lambda1_inf^2)^(1/2), the
constrained minimization over M intersected with F, and certification of the
result (residual, nodality, h-value, loop upper bound).

Takes one to two minutes at h = 0.01.
"""

import scalarfield as sf


def main():
    grid = sf.build_grid("cartesian1d", 15, 0.01)
    spec = sf.PotentialSpec("exp_well", 1.0, c0=0.3, a=0.5)
    V = sf.make_potential(spec, grid)
    V_inf = sf.make_potential(sf.PotentialSpec("constant", 1.0), grid)
    p = 4.0

    gs = sf.ground_state(grid, V, p)
    gs_inf = sf.ground_state(grid, V_inf, p)
    lower, upper = sf.lambda2_bounds(gs.lam, gs_inf.lam, p)

    hyp = sf.hypothesis_report(spec, sf.ProblemParams(p, 1, 1.0), gs_inf.lam,
                               grid=grid)
    for check in hyp.checks:
        print(f"hypothesis {check['name']:<18} value {check['value']:.4f} "
              f"threshold {check['threshold']:.4f} "
              f"{'pass' if check['pass'] else 'FAIL'}")

    nodal = sf.nodal_minimax(grid, V, p)
    print(f"\nlambda2 = {nodal.lam:.8f} after {nodal.iterations} iterations "
          f"(residual {nodal.residual:.2e}, |h| = {abs(nodal.h_value):.2e})")
    print(f"sandwich: {lower:.6f} < {nodal.lam:.6f} < {upper:.6f}  ->  "
          f"{lower < nodal.lam < upper}")

    nod = sf.nodality(grid, nodal.u, p)
    print(f"signed masses: +{nod.pos_mass:.4f} / -{nod.neg_mass:.4f} "
          f"(nodal: {nod.is_nodal})")
    print(f"EL residual with lambda = J(u2): "
          f"{sf.residual_eq(grid, V, nodal.u, nodal.lam, p):.2e}")
    loop = sf.loop_minimax_upper(grid, V, nodal.u, p)
    print(f"odd-loop upper bound at u2: {loop:.8f} "
          f"(gap {abs(loop - nodal.lam) / nodal.lam:.2e})")


if __name__ == "__main__":
    main()
