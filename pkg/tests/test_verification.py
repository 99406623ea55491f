"""Residuals, nodality, decay fits and the radial-deviation observable."""

import math

import numpy as np
import pytest

import scalarfield as sf
from scalarfield.errors import GridMismatchError

from conftest import P


def test_residual_zero_field(g1d, V1):
    assert sf.residual_eq(g1d, V1, g1d.zeros(), 1.0, P) == 0.0


def test_residual_soliton_interior_floor():
    # the analytic soliton sqrt(2) sech solves -u'' + u = u^3; away from the
    # truncation boundary the residual shrinks at second order in h
    vals = []
    for h in (0.02, 0.01):
        g = sf.build_grid("cartesian1d", 15, h)
        V = sf.make_potential(sf.PotentialSpec("constant", 1.0), g)
        x = g.x[:, 0]
        u = g.field(math.sqrt(2.0) / np.cosh(x))
        r = sf.apply_A(g, V, u).values - u.values**3
        interior = (np.abs(x) <= 10.0)
        vals.append(math.sqrt(float((g.weights * r * r)[interior].sum())))
    assert vals[0] <= 5e-4
    order = math.log2(vals[0] / vals[1])
    assert 1.8 <= order <= 2.2


def test_residual_includes_truncation_tail(g1d_fine, V1_fine):
    # the full norm also sees the Dirichlet ghost defect u(R)/h^2 at the two
    # end nodes, which dominates the interior floor for the analytic soliton
    x = g1d_fine.x[:, 0]
    u = g1d_fine.field(math.sqrt(2.0) / np.cosh(x))
    r = sf.residual_eq(g1d_fine, V1_fine, u, 1.0, P)
    assert r <= 3e-3


def test_residual_lambda_sensitivity(g1d, V1):
    x = g1d.x[:, 0]
    u = g1d.field(math.sqrt(2.0) / np.cosh(x))
    assert sf.residual_eq(g1d, V1, u, 1.01, P) >= 1e-3


def test_residual_translation_consistency(g1d, V1):
    from scalarfield.variational import _shift_field
    x = g1d.x[:, 0]
    u = g1d.field(math.sqrt(2.0) / np.cosh(x))
    shifted = g1d.field(_shift_field(g1d, u.values, 1))
    r0 = sf.residual_eq(g1d, V1, u, 1.0, P)
    r1 = sf.residual_eq(g1d, V1, shifted, 1.0, P)
    assert abs(r1 - r0) <= 2.0 * r0


def test_residual_small_on_computed_solution(g1d, Vwell, gs_well):
    lam = sf.energy_J(g1d, Vwell, gs_well.u)
    assert sf.residual_eq(g1d, Vwell, gs_well.u, lam, P) <= 1e-8


def test_nodality_signed_masses(g1d, gs_well):
    rep = sf.nodality(g1d, gs_well.u, P)
    assert rep.neg_mass == 0.0
    assert not rep.is_nodal
    assert abs(rep.pos_mass + rep.neg_mass - sf.mass_I(g1d, gs_well.u, P)) <= 1e-12

    x = g1d.x[:, 0]
    odd = g1d.field(np.exp(-((x - 3) ** 2)) - np.exp(-((x + 3) ** 2)))
    rep2 = sf.nodality(g1d, odd, P)
    assert abs(rep2.pos_mass - rep2.neg_mass) <= 1e-10
    assert rep2.is_nodal

    scaled = sf.nodality(g1d, g1d.field(2.0 * odd.values), P)
    assert scaled.pos_mass == pytest.approx(2.0**P * rep2.pos_mass, rel=1e-14)


def test_decay_fit_synthetic_oracle():
    grid = sf.build_grid("radial", 15, 0.01, N=2)
    r = grid.radii()
    u = grid.field(np.exp(-r) / np.sqrt(r))
    fit = sf.decay_fit(grid, u, 1.0, 2)
    assert abs(fit.fitted_rate - 1.0) <= 1e-3
    assert fit.r_squared >= 0.9999
    assert fit.r_min == pytest.approx(0.3 * grid.R)
    assert fit.r_max == pytest.approx(0.8 * grid.R)

    scaled = sf.decay_fit(grid, grid.field(7.0 * u.values), 1.0, 2)
    assert scaled.fitted_rate == pytest.approx(fit.fitted_rate, abs=1e-12)
    assert scaled.fitted_C0 == pytest.approx(7.0 * fit.fitted_C0, rel=1e-10)


def test_decay_fit_guards(g1d, gs_well):
    with pytest.raises(ValueError):
        sf.decay_fit(g1d, g1d.field(-np.ones(g1d.n)), 1.0, 1)
    with pytest.raises(ValueError):
        sf.decay_fit(g1d, gs_well.u, 1.0, 1, r_min=0.1 * g1d.R)


def test_decay_fit_well_sanity_window(g1d, gs_well):
    fit = sf.decay_fit(g1d, gs_well.u, 1.0, 1)
    assert 0.5 <= fit.fitted_rate <= 1.05


def test_radial_deviation_synthetic():
    grid = sf.build_grid("cartesian2d", 6, 0.1)
    r = grid.radii()
    radial = grid.field(np.exp(-r * r))
    assert sf.radial_deviation(grid, radial) <= 0.02
    angular = grid.field(grid.x[:, 0] * np.exp(-r * r))
    assert sf.radial_deviation(grid, angular) >= 0.9


def test_radial_deviation_wrong_mode(g1d, gs_well):
    with pytest.raises(GridMismatchError):
        sf.radial_deviation(g1d, gs_well.u)


def test_angular_average_field_is_radial():
    grid = sf.build_grid("cartesian2d", 6, 0.1)
    r = grid.radii()
    angular = grid.field(grid.x[:, 0] * np.exp(-r * r))
    from scalarfield.verification import angular_average_field
    avg = angular_average_field(grid, angular)
    assert float(np.max(np.abs(avg.values))) <= 0.05
