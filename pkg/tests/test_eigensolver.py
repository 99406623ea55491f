"""The weighted pencil A v = mu |u|^(p-2) v: oracles and structure."""

import math

import numpy as np
import pytest

import scalarfield as sf
from scalarfield.errors import DegenerateInputError

from conftest import P, smooth_random_field


@pytest.fixture(scope="module")
def sech_pairs(g1d, V1):
    x = g1d.x[:, 0]
    sech = g1d.field(1.0 / np.cosh(x))
    pair1 = sf.principal_eigenpair(g1d, V1, sech, P)
    pair2 = sf.second_eigenpair(g1d, V1, sech, P, pair1)
    return sech, pair1, pair2


def test_sech_principal_oracle(sech_pairs):
    # -(sech)'' + sech = 2 sech^3, so mu1 = 2 with v1 proportional to sech
    _, pair1, _ = sech_pairs
    assert abs(pair1.mu - 2.0) <= 0.01 * 2.0
    assert float(np.min(pair1.v.values)) > 0
    assert abs(pair1.k_norm - 1.0) <= 1e-12


def test_sech_second_oracle(sech_pairs):
    # differentiating the principal identity: A(sech') = 6 sech^2 sech',
    # so mu2 = 6 with v2 proportional to the odd mode sech*tanh
    g1d = sech_pairs[0].grid
    _, pair1, pair2 = sech_pairs
    assert abs(pair2.mu - 6.0) <= 0.01 * 6.0
    assert pair2.mu >= pair1.mu
    x = g1d.x[:, 0]
    target = np.tanh(x) / np.cosh(x)
    target /= math.sqrt(float(g1d.weights @ (target * target)))
    v = pair2.v.values / math.sqrt(float(g1d.weights @ (pair2.v.values**2)))
    if v @ target < 0:
        v = -v
    assert math.sqrt(float(g1d.weights @ ((v - target) ** 2))) <= 1e-3


def test_v2_parity_and_orthogonality(sech_pairs):
    sech, pair1, pair2 = sech_pairs
    g1d = sech.grid
    # odd mode on an even problem
    defect = np.linalg.norm(pair2.v.values + pair2.v.values[::-1])
    defect /= np.linalg.norm(pair2.v.values)
    assert defect <= 1e-8
    # B_u-orthogonality, exactly enforced
    w = sf.weight_of(g1d, sech, P)
    assert abs(sf.weighted_inner(g1d, w, pair1.v, pair2.v)) <= 1e-13
    # the pencil then gives J-orthogonality as well
    V1 = sf.make_potential(sf.PotentialSpec("constant", 1.0), g1d)
    cross = sf.integrate(
        g1d, g1d.field(pair1.v.values * sf.apply_A(g1d, V1, pair2.v).values)
    )
    assert abs(cross) <= 1e-8 * math.sqrt(pair1.mu * pair2.mu)


def test_rayleigh_quotient_bounds_mu1(g1d, Vwell, gs_well):
    pair = sf.principal_eigenpair(g1d, Vwell, gs_well.u, P)
    w = sf.weight_of(g1d, gs_well.u, P)
    rng = np.random.default_rng(21)
    for _ in range(5):
        phi = smooth_random_field(g1d, rng)
        quotient = sf.energy_J(g1d, Vwell, phi) / sf.weighted_inner(g1d, w, phi, phi)
        assert pair.mu <= quotient * (1 + 1e-10)


def test_eigenvalue_interlacing_at_ground_state(g1d, Vwell, gs_well):
    # mu1(w1) = lambda1 < lambda2-candidates <= mu2(w1) for p > 2
    pair1 = sf.principal_eigenpair(g1d, Vwell, gs_well.u, P)
    pair2 = sf.second_eigenpair(g1d, Vwell, gs_well.u, P, pair1)
    assert pair1.mu < pair2.mu
    assert abs(pair1.mu - gs_well.lam) <= 1e-8 * gs_well.lam


def test_warm_start_block_round_trip(g1d, Vwell, gs_well):
    pair, block = sf.principal_eigenpair(g1d, Vwell, gs_well.u, P,
                                         return_block=True)
    warm = sf.principal_eigenpair(g1d, Vwell, gs_well.u, P, x0=block)
    assert abs(warm.mu - pair.mu) <= 1e-10 * pair.mu


def test_residuals_are_reported_small(sech_pairs):
    _, pair1, pair2 = sech_pairs
    assert pair1.residual <= 1e-10
    assert pair2.residual <= 1e-8


def test_degenerate_inputs(g1d, V1):
    with pytest.raises(DegenerateInputError):
        sf.principal_eigenpair(g1d, V1, g1d.zeros(), P)


def test_even_in_u(g1d, Vwell):
    rng = np.random.default_rng(22)
    u = smooth_random_field(g1d, rng)
    pair_u = sf.principal_eigenpair(g1d, Vwell, u, P)
    pair_abs = sf.principal_eigenpair(g1d, Vwell, g1d.field(np.abs(u.values)), P)
    assert pair_u.mu == pair_abs.mu
    assert np.array_equal(pair_u.v.values, pair_abs.v.values)
