"""The weighted eigenproblem A v = mu |u|^(p-2) v at the soliton.

For u = sech and V = 1 the pencil has exact pairs mu1 = 2 (v1 = sech) and
mu2 = 6 (v2 = sech*tanh); the computed values converge at second order.
"""

import numpy as np

import scalarfield as sf


def main():
    for h in (0.02, 0.01, 0.005):
        grid = sf.build_grid("cartesian1d", 15, h)
        V = sf.make_potential(sf.PotentialSpec("constant", 1.0), grid)
        sech = grid.field(1.0 / np.cosh(grid.x[:, 0]))
        pair1 = sf.principal_eigenpair(grid, V, sech, 4.0)
        pair2 = sf.second_eigenpair(grid, V, sech, 4.0, pair1)
        print(f"h = {h:<6} mu1 = {pair1.mu:.8f} (exact 2)   "
              f"mu2 = {pair2.mu:.8f} (exact 6)   "
              f"errors {abs(pair1.mu - 2):.2e} / {abs(pair2.mu - 6):.2e}")


if __name__ == "__main__":
    main()
