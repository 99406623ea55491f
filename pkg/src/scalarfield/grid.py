"""Truncated computational grids and the discrete operator A = -lap + V.

The domain is truncated to [-R, R]^d (cartesian modes) or [0, R] with an
r^(N-1) volume weight (radial mode), with homogeneous Dirichlet data on the
truncation boundary.  A finite-volume discretization is used throughout: each
interior node owns a cell, the quadrature weight of a node is the exact
measure of its cell, and the assembled quadratic form

    K = diag(weights) * A

is symmetric positive definite.  This makes integrate(u * apply_A(v))
symmetric to rounding and makes the weights sum exactly to the domain
measure, at the cost of a purely local O(1) consistency defect in the cells
touching the boundary (harmless for exponentially decaying fields).
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, GridMismatchError, SolverError

MODES = ("cartesian1d", "cartesian2d", "radial")

#: default relative tolerance for linear solves
SOLVE_TOL = 1e-10
#: iteration cap honoured by iterative fallbacks (direct solves ignore it)
SOLVE_MAXITER = 50_000


@dataclass(eq=False)
class Grid:
    """Uniform grid on a truncated domain.

    Attributes
    ----------
    mode : one of "cartesian1d", "cartesian2d", "radial"
    R, h : half-width and spacing, with R/h an integer >= 8
    dim : effective dimension N (1, 2, or the radial N)
    x : (n, d) array of interior node coordinates (d = 1 except cartesian2d)
    weights : (n,) strictly positive quadrature weights (cell measures)
    """

    mode: str
    R: float
    h: float
    dim: int
    x: np.ndarray
    weights: np.ndarray

    @property
    def key(self):
        return (self.mode, float(self.R), float(self.h), int(self.dim))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def nodes_per_axis(self):
        m = int(round(self.R / self.h))
        return 2 * m - 1 if self.mode.startswith("cartesian") else m - 1

    def radii(self):
        """Distance of each node from the origin."""
        if self.x.shape[1] == 1:
            return np.abs(self.x[:, 0])
        return np.sqrt((self.x ** 2).sum(axis=1))

    def field(self, values):
        return Field(self, np.asarray(values, dtype=float))

    def zeros(self):
        return Field(self, np.zeros(self.n))

    def measure(self):
        return float(self.weights.sum())


@dataclass(eq=False)
class Field:
    """Real-valued grid function (interior node values only)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise GridMismatchError(
                f"field has {self.values.shape} values for a grid with {self.grid.n} nodes"
            )

    def copy(self):
        return Field(self.grid, self.values.copy())

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        return self


def same_grid(*fields):
    """Raise GridMismatchError unless all fields share one grid."""
    key = fields[0].grid.key
    for f in fields[1:]:
        if f.grid.key != key:
            raise GridMismatchError(f"grids {f.grid.key} and {key} are incompatible")
    return fields[0].grid


def build_grid(mode, R, h, N=None):
    """Build a truncated grid.

    cartesian1d/cartesian2d: interior nodes of [-R, R]^d with spacing h,
    2R/h - 1 nodes per axis.  radial: nodes at h, 2h, ..., R - h with an
    r^(N-1) volume weight (N >= 2); the surface measure of S^(N-1) is folded
    into the quadrature weights so integrate() returns full R^N integrals.
    """
    R = float(R)
    h = float(h)
    if R <= 0 or h <= 0:
        raise ConfigurationError("R and h must be positive")
    ratio = R / h
    m = int(round(ratio))
    if abs(ratio - m) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(f"R/h = {ratio} is not an integer")
    if m < 8:
        raise ConfigurationError(f"R/h = {m} < 8: domain is under-resolved")
    if mode not in MODES:
        raise ConfigurationError(f"unknown grid mode {mode!r}")

    if mode == "cartesian1d":
        x1 = np.arange(-(m - 1), m) * h
        w1 = _cartesian_axis_weights(x1.size, h)
        return Grid(mode, R, h, 1, x1[:, None], w1)

    if mode == "cartesian2d":
        x1 = np.arange(-(m - 1), m) * h
        w1 = _cartesian_axis_weights(x1.size, h)
        X, Y = np.meshgrid(x1, x1, indexing="ij")
        coords = np.column_stack([X.ravel(), Y.ravel()])
        weights = np.outer(w1, w1).ravel()
        return Grid(mode, R, h, 2, coords, weights)

    # radial
    if N is None or int(N) < 2:
        raise ConfigurationError("radial mode requires dimension N >= 2")
    N = int(N)
    r = np.arange(1, m) * h
    # cell boundaries: 0, 3h/2, 5h/2, ..., R; exact shell volumes
    edges = np.concatenate([[0.0], (np.arange(1, m - 1) + 0.5) * h, [R]])
    surf = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    weights = surf * (edges[1:] ** N - edges[:-1] ** N) / N
    return Grid(mode, R, h, N, r[:, None], weights)


def _cartesian_axis_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 1.5 * h  # end cells extend to the Dirichlet boundary
    return w


# ---------------------------------------------------------------------------
# assembled operator K = W * A and cached factorizations

def _stiffness_1d(n, h):
    """Symmetric stiffness of -d2/dx2 with zero Dirichlet data."""
    main = np.full(n, 2.0 / h)
    off = np.full(n - 1, -1.0 / h)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _stiffness_radial(n, h, R, N):
    """Symmetric stiffness of the radial -(r^(N-1) v')' / r^(N-1) flux form.

    Zero flux through r = 0 (regularity), Dirichlet value 0 at r = R.
    Includes the S^(N-1) surface factor so it pairs with the grid weights.
    """
    surf = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    faces = (np.arange(1, n) + 0.5) * h  # faces between nodes i, i+1
    off = -surf * faces ** (N - 1) / h
    main = np.zeros(n)
    main[:-1] += -off  # outward face of each inner node
    main[1:] += -off   # inward face of each outer node
    main[-1] += surf * R ** (N - 1) / h  # Dirichlet face at r = R
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _stiffness(grid):
    if grid.mode == "cartesian1d":
        return _stiffness_1d(grid.n, grid.h)
    if grid.mode == "cartesian2d":
        n1 = grid.nodes_per_axis
        K1 = _stiffness_1d(n1, grid.h)
        W1 = sp.diags(_cartesian_axis_weights(n1, grid.h))
        return (sp.kron(K1, W1) + sp.kron(W1, K1)).tocsr()
    return _stiffness_radial(grid.n, grid.h, grid.R, grid.dim)


class Operator:
    """The pair (K, W) with K = W*A SPD; apply and solve A as a field map."""

    def __init__(self, grid, V_values):
        V_values = np.asarray(V_values, dtype=float)
        if np.min(V_values) < 0:
            raise ValueError("potential must be nonnegative nodewise")
        self.grid = grid
        self.w = grid.weights
        self.K = (_stiffness(grid) + sp.diags(self.w * V_values)).tocsr()
        self._lu = None

    def apply(self, v):
        return (self.K @ v) / self.w

    def quadratic_form(self, u, v=None):
        """integrate(u * A v), evaluated exactly as u.K.v."""
        return float(u @ (self.K @ (u if v is None else v)))

    def solve(self, rhs, tol=SOLVE_TOL):
        """Solve A v = rhs, i.e. K v = W rhs (sparse Cholesky-grade direct solve)."""
        if self._lu is None:
            self._lu = splu(self.K.tocsc())
        b = self.w * rhs
        v = self._lu.solve(b)
        nb = np.linalg.norm(b)
        if nb > 0:
            res = np.linalg.norm(self.K @ v - b) / nb
            if not np.isfinite(res) or res > max(tol, 1e-8):
                raise SolverError("linear solve did not meet tolerance", residual=res)
        return v


_CACHE = {}
_CACHE_CAP = 6


def operator_for(grid, V):
    """Cached Operator for (grid, V); V is a Field on grid."""
    same_grid(V)
    digest = hashlib.sha1(V.values.tobytes()).hexdigest()
    key = (grid.key, digest)
    op = _CACHE.get(key)
    if op is None:
        op = Operator(grid, V.values)
        if len(_CACHE) >= _CACHE_CAP:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = op
    return op


# ---------------------------------------------------------------------------
# public field-level operations

def apply_A(grid, V, v):
    """(-lap + V) v with zero Dirichlet exterior values."""
    same_grid(V, v)
    if v.grid.key != grid.key:
        raise GridMismatchError("field does not live on the given grid")
    return Field(grid, operator_for(grid, V).apply(v.values))


def integrate(grid, f):
    """Quadrature sum of f over the truncated domain."""
    if f.grid.key != grid.key:
        raise GridMismatchError("field does not live on the given grid")
    return float(grid.weights @ f.values)


def solve_A(grid, V, rhs, tol=SOLVE_TOL, maxiter=SOLVE_MAXITER):
    """Solve (-lap + V) v = rhs to relative residual tol."""
    same_grid(V, rhs)
    if rhs.grid.key != grid.key:
        raise GridMismatchError("field does not live on the given grid")
    return Field(grid, operator_for(grid, V).solve(rhs.values, tol=tol))


def coercivity_constant(grid, V, iters=60):
    """Estimate the smallest eigenvalue of A in the weighted L2 metric.

    A positive value certifies that v -> integrate(v * A v) is an equivalent
    squared norm on the grid (discrete coercivity).
    """
    op = operator_for(grid, V)
    w = grid.weights
    v = np.ones(grid.n)
    lam = None
    for _ in range(iters):
        v = op.solve(v)
        v /= math.sqrt(w @ (v * v))
        lam = float(v @ (op.K @ v))
    return lam
