"""Shared fixtures.  The expensive solves (fine-grid ground states, the well
nodal run, the 2D bundle) are session-scoped so every test file reuses them."""

import time

import numpy as np
import pytest

import scalarfield as sf

P = 4.0
WELL = dict(c0=0.3, a=0.5)


def well_spec(V_inf=1.0):
    return sf.PotentialSpec("exp_well", V_inf, c0=WELL["c0"], a=WELL["a"])


def smooth_random_field(grid, rng, n_bumps=8, box=0.55, signed=True):
    """Sum of random Gaussian bumps, supported well inside the domain."""
    vals = np.zeros(grid.n)
    lo = 0.0 if grid.mode == "radial" else -box * grid.R
    for _ in range(n_bumps):
        center = rng.uniform(lo, box * grid.R, grid.x.shape[1])
        width = rng.uniform(0.5, 2.0)
        amp = rng.normal(0.0, 1.0) if signed else abs(rng.normal(0.0, 1.0)) + 0.1
        d2 = ((grid.x - center) ** 2).sum(axis=1)
        vals += amp * np.exp(-d2 / width**2)
    return grid.field(vals)


def sign_changing_random_field(grid, rng):
    """Random smooth field guaranteed to have both signed parts."""
    for _ in range(50):
        f = smooth_random_field(grid, rng)
        pos = sf.mass_I(grid, grid.field(np.maximum(f.values, 0.0)), P)
        neg = sf.mass_I(grid, grid.field(np.maximum(-f.values, 0.0)), P)
        if min(pos, neg) > 1e-6 * (pos + neg):
            return f
    raise AssertionError("could not draw a sign-changing field")


# ---------------------------------------------------------------------------
# grids and potentials

@pytest.fixture(scope="session")
def g1d():
    return sf.build_grid("cartesian1d", 15, 0.01)


@pytest.fixture(scope="session")
def g1d_fine():
    return sf.build_grid("cartesian1d", 15, 0.005)


@pytest.fixture(scope="session")
def V1(g1d):
    return sf.make_potential(sf.PotentialSpec("constant", 1.0), g1d)


@pytest.fixture(scope="session")
def V1_fine(g1d_fine):
    return sf.make_potential(sf.PotentialSpec("constant", 1.0), g1d_fine)


@pytest.fixture(scope="session")
def Vwell(g1d):
    return sf.make_potential(well_spec(), g1d)


# ---------------------------------------------------------------------------
# ground states

@pytest.fixture(scope="session")
def gs_inf_fine(g1d_fine, V1_fine):
    """Constant-potential ground state on the fine grid, with wall time."""
    t0 = time.perf_counter()
    rep = sf.ground_state(g1d_fine, V1_fine, P)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="session")
def gs_inf(g1d, V1):
    return sf.ground_state(g1d, V1, P)


@pytest.fixture(scope="session")
def gs_well(g1d, Vwell):
    return sf.ground_state(g1d, Vwell, P)


@pytest.fixture(scope="session")
def gs_radial():
    grid = sf.build_grid("radial", 12, 0.1, N=2)
    V = sf.make_potential(well_spec(), grid)
    return grid, V, sf.ground_state(grid, V, P)


# ---------------------------------------------------------------------------
# the nodal pipeline on the 1D well (shared by several criteria)

@pytest.fixture(scope="session")
def well_nodal(g1d, Vwell):
    """Full nodal run with default options, with wall time."""
    t0 = time.perf_counter()
    rep = sf.nodal_minimax(g1d, Vwell, P)
    return rep, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# 2D bundle: cartesian ground + nodal estimate + radial-mode reference

@pytest.fixture(scope="session")
def bundle2d():
    t0 = time.perf_counter()
    grid = sf.build_grid("cartesian2d", 12, 0.1)
    V = sf.make_potential(well_spec(), grid)
    gs = sf.ground_state(grid, V, P)
    # the 2D level estimate: the descent is monotone from above, so a capped
    # run still yields a valid upper estimate of lambda2
    opts = sf.SolverOptions(max_iter=200, tol_residual=1e-4)
    nodal = sf.nodal_minimax(grid, V, P, opts=opts)

    rgrid = sf.build_grid("radial", 12, 0.1, N=2)
    rV = sf.make_potential(well_spec(), rgrid)
    ropts = sf.SolverOptions(max_iter=6000, tol_residual=1e-4)
    rnodal = sf.nodal_minimax(rgrid, rV, P, opts=ropts, level="lambda2_radial")
    return {
        "grid": grid, "V": V, "gs": gs, "nodal": nodal,
        "radial_nodal": rnodal, "seconds": time.perf_counter() - t0,
    }
