"""Linearized weighted eigenproblem A v = mu |u|^(p-2) v.

The pencil (A, B_u) with B_u = multiplication by the weight |u|^(p-2) is
solved by block inverse iteration with Rayleigh-Ritz extraction: every step
applies A^(-1) B_u to a small subspace (a direct factorization of the SPD
form is cached per potential), then B_u-orthonormalizes and solves the
projected eigenproblem.  The block is essential in practice: for two-bump
iterates the two lowest eigenvalues are nearly degenerate and single-vector
iteration stalls, while the 2x2 Ritz problem resolves the pair at the rate
set by the next eigenvalue up.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InternalConsistencyError,
    SolverError,
    SpectralDeficiencyError,
)
from .grid import Field, same_grid, operator_for
from .functionals import mass_I, weight_of

log = logging.getLogger("scalarfield")

EIGEN_TOL = 1e-10
EIGEN_MAXITER = 10_000
#: target for the relative eigen-residual |A v - mu w v| / (mu |w v|)
EIGEN_RESIDUAL = 1e-11


@dataclass
class Eigenpair:
    """Weighted eigenpair with K_u-normalization K_u(v) = 1."""

    mu: float
    v: Field
    k_norm: float
    residual: float


def principal_eigenpair(grid, V, u, p, tol=EIGEN_TOL, max_iter=EIGEN_MAXITER,
                        res_target=EIGEN_RESIDUAL, x0=None, return_block=False):
    """Smallest eigenpair (mu1, v1 > 0) of A v = mu |u|^(p-2) v.

    v1 is sign-fixed to be strictly positive (discrete strong maximum
    principle for the irreducible M-matrix stencil); a sign change after
    convergence raises InternalConsistencyError.  The result is an even
    function of u: it depends on u only through |u|^(p-2).

    With return_block=True the full iteration block is returned alongside
    the pair; feeding it back as x0 warm-starts nearby solves.
    """
    same_grid(V, u)
    if mass_I(grid, u, p) <= 0:
        raise DegenerateInputError("principal_eigenpair requires I(u) > 0")
    w = weight_of(grid, u, p)
    mus, vecs, res, block = _ritz_pairs(grid, V, w.values, k=1, tol=tol,
                                        max_iter=max_iter, res_target=res_target,
                                        x0=x0)
    v = _fix_sign(grid, vecs[:, 0])
    if np.min(v) < -1e-12 * np.max(v):
        raise InternalConsistencyError(
            "principal eigenvector changed sign after convergence"
        )
    k_norm = float(grid.weights @ (w.values * v * v))
    pair = Eigenpair(mus[0], Field(grid, v), k_norm, res[0])
    return (pair, block) if return_block else pair


def second_eigenpair(grid, V, u, p, v1, tol=EIGEN_TOL, max_iter=EIGEN_MAXITER,
                     res_target=EIGEN_RESIDUAL, x0=None):
    """Second eigenpair (mu2, v2), B_u-orthogonal to v1, with mu2 >= mu1."""
    same_grid(V, u, v1.v)
    w = weight_of(grid, u, p)
    if x0 is None:
        x0 = np.column_stack([v1.v.values, _odd_start(grid), _even_start(grid)])
    mus, vecs, res, _ = _ritz_pairs(grid, V, w.values, k=2, tol=tol,
                                    max_iter=max_iter, res_target=res_target, x0=x0)
    v2 = vecs[:, 1]
    # enforce the constraint L_u(v2) = 0 against the *given* v1 exactly
    bw = grid.weights * w.values
    v1n = v1.v.values / np.sqrt(float(v1.v.values @ (bw * v1.v.values)))
    v2 = v2 - float(v2 @ (bw * v1n)) * v1n
    nrm = float(v2 @ (bw * v2))
    if nrm <= 0:
        raise SpectralDeficiencyError(
            "weight support too small to carry a second eigenpair"
        )
    v2 = v2 / np.sqrt(nrm)
    mu2 = max(mus[1], mus[0])
    k_norm = float(grid.weights @ (w.values * v2 * v2))
    res2 = _relative_residual(grid, V, w.values, mu2, v2)
    return Eigenpair(mu2, Field(grid, v2), k_norm, res2)


# ---------------------------------------------------------------------------

def _odd_start(grid):
    return grid.x[:, 0] - (grid.x[:, 0].mean() if grid.mode == "radial" else 0.0)

def _even_start(grid):
    r = grid.radii()
    return 1.0 + 0.1 * (r - r.mean()) ** 2


def _fix_sign(grid, v):
    s = float(grid.weights @ v)
    return v if s >= 0 else -v


def _relative_residual(grid, V, wvals, mu, v):
    op = operator_for(grid, V)
    av = op.apply(v)
    wv = wvals * v
    denom = abs(mu) * np.linalg.norm(wv)
    if denom == 0:
        return float(np.linalg.norm(av))
    return float(np.linalg.norm(av - mu * wv) / denom)


def _ritz_pairs(grid, V, wvals, k, tol, max_iter, res_target, x0=None):
    """Block inverse iteration for the k smallest pencil eigenpairs.

    Returns (mus, vectors, residuals); vectors are B_u-orthonormal columns.
    Convergence requires the eigenvalue estimates to be stationary (relative
    change <= tol on 3 consecutive iterations) and the relative residual to
    reach res_target (or a rounding plateau below a loose 1e-8 ceiling).
    """
    op = operator_for(grid, V)
    n = grid.n
    bw = grid.weights * wvals
    if int(np.count_nonzero(wvals > 0)) < k + 1:
        raise SpectralDeficiencyError(
            f"weight supported on fewer than {k + 1} nodes"
        )

    m = k + 1
    if x0 is None:
        cols = [np.ones(n), _odd_start(grid), _even_start(grid)]
        X = np.column_stack(cols[:m])
    else:
        X = np.asarray(x0, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        while X.shape[1] < m:
            X = np.column_stack([X, [np.ones(n), _odd_start(grid),
                                     _even_start(grid)][X.shape[1] % 3]])
        X = X[:, :m]

    mu_prev = None
    consec = 0
    best_res = np.inf
    plateau = 0
    for it in range(1, max_iter + 1):
        Y = np.column_stack([op.solve(wvals * X[:, j]) for j in range(m)])
        Y = _b_orthonormalize(Y, bw)
        if Y.shape[1] < k:
            raise SpectralDeficiencyError(
                "iteration subspace collapsed below the requested pair count"
            )
        H = Y.T @ (op.K @ Y)
        H = 0.5 * (H + H.T)
        theta, S = np.linalg.eigh(H)
        X = Y @ S
        mus = theta[:k]

        res = max(_relative_residual(grid, V, wvals, mus[j], X[:, j])
                  for j in range(k))
        if mu_prev is not None and np.all(
            np.abs(mus - mu_prev) <= tol * np.abs(mus)
        ):
            consec += 1
        else:
            consec = 0
        mu_prev = mus.copy()

        if res >= 0.9 * best_res:
            plateau += 1
        else:
            plateau = 0
        best_res = min(best_res, res)

        if consec >= 3 and res <= res_target:
            break
        if consec >= 3 and plateau >= 4 and res <= 1e-8:
            log.debug("eigen: residual plateau at %.3g after %d iterations", res, it)
            break
    else:
        raise SolverError(
            f"eigensolver did not converge in {max_iter} iterations", residual=best_res
        )

    residuals = [_relative_residual(grid, V, wvals, mus[j], X[:, j])
                 for j in range(k)]
    block = X.copy()
    # exact B_u-normalization of the returned columns
    for j in range(k):
        X[:, j] /= np.sqrt(float(X[:, j] @ (bw * X[:, j])))
    return mus, X[:, :k], residuals, block


def _b_orthonormalize(Y, bw):
    """Orthonormalize columns of Y in the (possibly semidefinite) B-inner product."""
    G = Y.T @ (bw[:, None] * Y)
    G = 0.5 * (G + G.T)
    # Cholesky with a graceful fallback to eigen-based whitening
    try:
        L = np.linalg.cholesky(G)
        return np.linalg.solve(L, Y.T).T
    except np.linalg.LinAlgError:
        s, Q = np.linalg.eigh(G)
        keep = s > 1e-14 * s.max()
        return (Y @ Q[:, keep]) / np.sqrt(s[keep])
