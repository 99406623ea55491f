"""Variational quantities: energy J, mass I, weights, gradients, Jacobi identity.

All integrals are quadrature sums on the grid; J is evaluated through the
assembled SPD form so that J(v) = integrate(v * apply_A(v)) holds exactly.
"""

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, GridMismatchError
from .grid import Field, operator_for, same_grid

log = logging.getLogger("scalarfield")


@dataclass(eq=False)
class WeightField:
    """Nodewise |u|^(p-2) together with a checksum of its source field."""

    grid: object
    values: np.ndarray
    source_checksum: str

    def __post_init__(self):
        if np.min(self.values) < 0:
            raise ValueError("weight values must be nonnegative")
        if not np.any(self.values > 0):
            raise DegenerateInputError("weight is identically zero")


def energy_J(grid, V, u):
    """J(u) = integral of |grad u|^2 + V u^2 (>= 0, zero iff u = 0)."""
    same_grid(V, u)
    return operator_for(grid, V).quadratic_form(u.values)


def mass_I(grid, u, p):
    """I(u) = integral of |u|^p."""
    return float(grid.weights @ np.abs(u.values) ** p)


def grad_J(grid, V, u):
    """L2-representer of J'(u): g = 2 A u, so integrate(g*w) = dJ(u)[w]."""
    same_grid(V, u)
    op = operator_for(grid, V)
    return Field(grid, 2.0 * op.apply(u.values))


def grad_I(grid, u, p):
    """L2-representer of I'(u): p |u|^(p-2) u."""
    return Field(grid, p * _weight_values(u.values, p) * u.values)


def normalize_to_M(grid, u, p):
    """Rescale u so that I(u) = 1 (odd, idempotent map)."""
    m = mass_I(grid, u, p)
    if m <= 0:
        raise DegenerateInputError("cannot normalize a field with I(u) = 0")
    return Field(grid, u.values / m ** (1.0 / p))


def _weight_values(values, p):
    a = np.abs(values)
    if p == 4.0:
        return a * a
    # exp((p-2) log|u|) with tiny values mapped to 0
    out = np.zeros_like(a)
    mask = a > 1e-300
    out[mask] = np.exp((p - 2.0) * np.log(a[mask]))
    return out


def weight_of(grid, u, p):
    """Nodewise weight |u|^(p-2) used by K_u, L_u and h."""
    if u.grid.key != grid.key:
        raise GridMismatchError("field does not live on the given grid")
    w = _weight_values(u.values, p)
    if not np.any(w > 0):
        raise DegenerateInputError("u = 0 has no weight")
    checksum = hashlib.sha1(u.values.tobytes()).hexdigest()[:16]
    return WeightField(grid, w, checksum)


def weighted_inner(grid, w, f, g):
    """Symmetric bilinear form integral of w * f * g."""
    if not (w.grid.key == f.grid.key == g.grid.key == grid.key):
        raise GridMismatchError("weighted_inner requires one common grid")
    return float(grid.weights @ (w.values * f.values * g.values))


def jacobi_residual(grid, V, u, mu1, v1, v, floor, p):
    """Defect of the ground-state transform identity.

    With (mu1, v1) the principal weighted eigenpair of u, the discrete
    identity

        J(v) - mu1 * K_u(v) = sum over stiffness edges (i,j) of
                              (-K_ij) v1_i v1_j (v_i/v1_i - v_j/v1_j)^2

    holds exactly (it is matrix algebra given A v1 = mu1 w v1).  The edge sum
    is evaluated only where both endpoints satisfy v1 >= floor, which guards
    the division in the exponentially decaying tail; the excluded edges
    contribute only through v1-small coefficients when v is supported in the
    bulk.  The quadrature mass excluded by the floor is logged.  Returns
    |LHS - RHS|.
    """
    same_grid(V, u, v1, v)
    if floor <= 0:
        raise ValueError("floor must be positive")
    if np.min(v1.values) <= 0:
        raise ValueError("v1 must be strictly positive nodewise")

    w = weight_of(grid, u, p)
    lhs = energy_J(grid, V, v) - mu1 * weighted_inner(grid, w, v, v)

    K = operator_for(grid, V).K.tocoo()
    upper = K.row < K.col  # each undirected edge once; diagonal excluded
    i, j, kij = K.row[upper], K.col[upper], K.data[upper]

    keep = (v1.values[i] >= floor) & (v1.values[j] >= floor)
    i, j, kij = i[keep], j[keep], kij[keep]
    gi = v.values[i] / v1.values[i]
    gj = v.values[j] / v1.values[j]
    rhs = float(np.sum(-kij * v1.values[i] * v1.values[j] * (gi - gj) ** 2))

    excluded = grid.weights[v1.values < floor].sum()
    if excluded > 0:
        log.debug(
            "jacobi_residual: excluded quadrature mass %.3g below floor", excluded
        )
    return abs(lhs - rhs)
