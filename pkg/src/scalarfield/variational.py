"""The variational program: ground states, dual-set projection, nodal minimax.

Minimization runs on the mass manifold M = {I(u) = 1} with a tangent descent
direction computed in the A-metric (Sobolev gradient): the raw L2 gradient of
J is 2 A u, so its A-representer is 2u and the A-representer of the mass
constraint gradient is p A^(-1)(|u|^(p-2) u).  The resulting step with tau =
1/2 is exactly one preconditioned inverse-power step, which keeps the
iteration count independent of the mesh stiffness.  Steps are accepted by
Armijo backtracking on J restricted to M, so the recorded energy history is
non-increasing.

Sign-changing solutions are computed by minimizing J over M intersected with
the dual set F = {h(u) = 0}, h(u) = integral of |u|^(p-2) u v1(u): after each
accepted tangent step the iterate is rebalanced along the one-parameter odd
family t u+ - (1-t) u- until h vanishes (bracketed root find; the endpoint
signs are forced by the positivity of v1).
"""

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    InternalConsistencyError,
    SolverError,
)
from .eigen import EIGEN_RESIDUAL, EIGEN_TOL, principal_eigenpair, second_eigenpair
from .functionals import mass_I, normalize_to_M, weight_of, weighted_inner, _weight_values
from .grid import Field, operator_for, same_grid

log = logging.getLogger("scalarfield")

def _energy_slack(op, vals, J):
    """Rounding noise scale of the quadratic form v.K.v at vals.

    Without this slack the Armijo test rejects steps once J reaches its
    floating-point floor while the residual is still shrinking (the tau0
    step is a contraction near the minimizer).  The noise of the assembled
    form scales with sum |K_ij| |v_i| |v_j| = 2 diag - form for the M-matrix
    sign pattern, not with |J| itself.
    """
    diag_sum = float(op.K.diagonal() @ (vals * vals))
    return 16.0 * np.finfo(float).eps * abs(2.0 * diag_sum - J)


@dataclass
class SolverOptions:
    max_iter: int = 5000
    tol_residual: float = 1e-8
    tol_h: float = 1e-9
    tau0: float = 0.5
    armijo: float = 1e-4
    backtrack: float = 0.5
    tau_min: float = 1e-12
    eigen_tol: float = EIGEN_TOL
    eigen_res: float = EIGEN_RESIDUAL
    seed_separation: float = None  # default: 3 / sqrt(V at the boundary)
    nodal_delta: float = 1e-3
    max_restarts: int = 3


@dataclass
class SolveReport:
    """Outcome of one constrained minimization run."""

    level: str
    lam: float
    u: Field
    residual: float
    h_value: float
    iterations: int
    J_history: list
    flags: dict
    diagnosis: str = None
    extras: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {
            "level": self.level,
            "lambda": self.lam,
            "residual": self.residual,
            "h_value": self.h_value,
            "iterations": self.iterations,
            "flags": self.flags,
            "diagnosis": self.diagnosis,
            "J_final": self.J_history[-1] if self.J_history else None,
        }


# ---------------------------------------------------------------------------
# shared low-level pieces

def _residual_values(op, grid, uvals, lam, wvals):
    """Weighted-L2 Euler-Lagrange residual of A u = lam |u|^(p-2) u."""
    r = op.apply(uvals) - lam * wvals * uvals
    num = math.sqrt(float(grid.weights @ (r * r)))
    den = math.sqrt(float(grid.weights @ (uvals * uvals)))
    return num / max(1.0, den)


def _descent_direction(op, grid, uvals, p):
    """A-metric tangent gradient on M and its slope <grad J, d>.

    Returns (d, slope, J, z) with d = 2u - beta p A^(-1)(w u), beta chosen so
    the step is first-order mass preserving; slope >= 0 vanishes exactly at
    constrained critical points.
    """
    wvals = _weight_values(uvals, p)
    wu = wvals * uvals
    Ku = op.K @ uvals
    J = float(uvals @ Ku)
    I_val = float(grid.weights @ (np.abs(uvals) ** p))
    z = op.solve(wu)
    zwu = float(grid.weights @ (z * wu))
    if zwu <= 0:
        raise DegenerateInputError("weighted mass degenerated during descent")
    beta = 2.0 * I_val / (p * zwu)
    d = 2.0 * uvals - beta * p * z
    slope = max(4.0 * J - 4.0 * I_val * I_val / zwu, 0.0)
    return d, slope, J, wvals


def _energy_on_M(op, grid, vals, p):
    I_val = float(grid.weights @ (np.abs(vals) ** p))
    if I_val <= 0:
        raise DegenerateInputError("iterate left the mass manifold (I -> 0)")
    nvals = vals / I_val ** (1.0 / p)
    return float(nvals @ (op.K @ nvals)), nvals


def _default_seed(grid):
    r = grid.radii()
    return np.exp(-0.25 * r * r)


# ---------------------------------------------------------------------------
# ground state

def ground_state(grid, V, p, opts=None, seed=None, level="lambda1"):
    """Minimize J on M by preconditioned projected descent; w1 >= 0, I(w1) = 1.

    The absolute value is taken after every step (J(|u|) <= J(u) for the
    M-matrix form), so the output is independent of the seed's sign.
    """
    opts = opts or SolverOptions(max_iter=20000, tol_residual=1e-8)
    same_grid(V)
    op = operator_for(grid, V)

    vals = np.abs(seed.values if seed is not None else _default_seed(grid))
    J, vals = _energy_on_M(op, grid, vals, p)
    history = [J]
    residual = math.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        d, slope, J, wvals = _descent_direction(op, grid, vals, p)
        residual = _residual_values(op, grid, vals, J, wvals)
        if residual <= opts.tol_residual:
            converged = True
            break
        tau = opts.tau0
        accepted = False
        slack = _energy_slack(op, vals, J)
        while tau >= opts.tau_min:
            try:
                Jc, cand = _energy_on_M(op, grid, np.abs(vals - tau * d), p)
            except DegenerateInputError:
                tau *= opts.backtrack
                continue
            if Jc <= J - opts.armijo * tau * slope + slack:
                vals, J = cand, Jc
                history.append(J)
                accepted = True
                break
            tau *= opts.backtrack
        if not accepted:
            break  # stalled at rounding level
    else:
        it = opts.max_iter

    u = Field(grid, vals)
    flags = {
        "on_M": abs(mass_I(grid, u, p) - 1.0) <= 1e-10,
        "in_F": False,
        "nodal": False,
        "converged": converged,
    }
    diagnosis = None if converged else "descent stalled above tolerance"
    return SolveReport(level, J, u, residual, None, it, history, flags, diagnosis)


# ---------------------------------------------------------------------------
# the dual set F

def h_eval(grid, V, u, p, eigen_tol=EIGEN_TOL, eigen_res=EIGEN_RESIDUAL, x0=None,
           return_pair=False):
    """h(u) = integral of |u|^(p-2) u v1(u); odd in u, positive for u >= 0."""
    pair, block = principal_eigenpair(grid, V, u, p, tol=eigen_tol,
                                      res_target=eigen_res, x0=x0,
                                      return_block=True)
    w = weight_of(grid, u, p)
    h = weighted_inner(grid, w, u, pair.v)
    return (h, pair, block) if return_pair else h


def dual_split(grid, u, p, t):
    """Point of the odd rebalancing family: normalize(t u+ - (1-t) u-)."""
    plus = np.maximum(u.values, 0.0)
    minus = np.maximum(-u.values, 0.0)
    return normalize_to_M(grid, Field(grid, t * plus - (1.0 - t) * minus), p)


def project_to_F(grid, V, u, p, tol_h=1e-10, max_steps=60, opts=None):
    """Rebalance a sign-changing u onto the dual set F (|h| <= tol_h).

    Bracketed root find in t on [0, 1]: h > 0 at the pure-positive endpoint
    and h < 0 at the pure-negative endpoint because v1 > 0, so a root exists
    by the intermediate value theorem.
    """
    opts = opts or SolverOptions()
    field, _, h, _, _, steps = _project_to_F(grid, V, u, p, tol_h, max_steps, opts)
    log.debug("project_to_F: |h| = %.3g after %d steps", abs(h), steps)
    return field


def _split_parts(grid, u, p):
    plus = np.maximum(u.values, 0.0)
    minus = np.maximum(-u.values, 0.0)
    if mass_I(grid, Field(grid, plus), p) <= 0 or mass_I(grid, Field(grid, minus), p) <= 0:
        raise DegenerateInputError("projection onto F requires a sign-changing field")
    return plus, minus


def _project_to_F(grid, V, u, p, tol_h, max_steps, opts, t_guess=None, x0=None,
                  pure_bisection=False, eigen_res=None):
    """Returns (field, t, h, eigenpair, warm_block, steps).

    x0 may be a single vector or a full warm-start block from a previous
    eigensolve; eigen_res overrides the eigen residual target (the inner
    descent loop only needs it commensurate with its loose tol_h).
    """
    plus, minus = _split_parts(grid, u, p)
    if eigen_res is None:
        eigen_res = opts.eigen_res

    def field_at(t):
        return normalize_to_M(grid, Field(grid, t * plus - (1.0 - t) * minus), p)

    warm = {"x0": x0}

    def h_at(t):
        f = field_at(t)
        h, pair, block = h_eval(grid, V, f, p, eigen_tol=opts.eigen_tol,
                                eigen_res=eigen_res, x0=warm["x0"],
                                return_pair=True)
        warm["x0"] = block
        return h, f, pair

    steps = 0
    t = 0.5 if t_guess is None else min(max(t_guess, 1e-6), 1.0 - 1e-6)
    h, f, pair = h_at(t)
    steps += 1
    if abs(h) <= tol_h:
        return f, t, h, pair, warm["x0"], steps

    # establish a bracket: h increases with the positive share, h(0) < 0 < h(1)
    if h > 0:
        lo, hi, h_lo, h_hi = None, t, None, h
    else:
        lo, hi, h_lo, h_hi = t, None, h, None
    pad = 0.05
    while lo is None or hi is None:
        if steps >= max_steps:
            raise SolverError("projection onto F failed to bracket the root",
                              residual=abs(h))
        t_try = max(0.0, hi - pad) if lo is None else min(1.0, lo + pad)
        h_try, f_try, pair_try = h_at(t_try)
        steps += 1
        if abs(h_try) <= tol_h:
            return f_try, t_try, h_try, pair_try, warm["x0"], steps
        if h_try > 0:
            hi, h_hi = t_try, h_try
        else:
            lo, h_lo = t_try, h_try
        if lo is None and t_try == 0.0:
            raise InternalConsistencyError(
                "h > 0 at the pure-negative endpoint (eigensolver fault?)"
            )
        if hi is None and t_try == 1.0:
            raise InternalConsistencyError(
                "h < 0 at the pure-positive endpoint (eigensolver fault?)"
            )
        pad *= 4.0

    # bracketed root find: bisection, accelerated by Illinois secant steps
    side = 0
    while steps < max_steps:
        if pure_bisection:
            t = 0.5 * (lo + hi)
        else:
            t = (lo * h_hi - hi * h_lo) / (h_hi - h_lo)
            margin = 0.01 * (hi - lo)
            t = min(max(t, lo + margin), hi - margin)
        h, f, pair = h_at(t)
        steps += 1
        if abs(h) <= tol_h:
            return f, t, h, pair, warm["x0"], steps
        if h > 0:
            hi, h_hi = t, h
            if side == 1 and h_lo is not None:
                h_lo *= 0.5
            side = 1
        else:
            lo, h_lo = t, h
            if side == -1 and h_hi is not None:
                h_hi *= 0.5
            side = -1
    raise SolverError(
        f"projection onto F did not reach |h| <= {tol_h} in {max_steps} steps",
        residual=abs(h),
    )


# ---------------------------------------------------------------------------
# nodal minimax

def _signed_masses(grid, uvals, p):
    w = grid.weights
    return (
        float(w @ np.maximum(uvals, 0.0) ** p),
        float(w @ np.maximum(-uvals, 0.0) ** p),
    )


def _separation(grid, uvals, p):
    """Distance between the centroids of the positive and negative parts."""
    c = grid.x[:, 0] if grid.mode != "radial" else grid.x[:, 0]
    wp = grid.weights * np.maximum(uvals, 0.0) ** p
    wm = grid.weights * np.maximum(-uvals, 0.0) ** p
    if wp.sum() <= 0 or wm.sum() <= 0:
        return 0.0
    return abs(float((c * wp).sum() / wp.sum() - (c * wm).sum() / wm.sum()))


def _shift_field(grid, values, cells):
    """Translate a cartesian field by an integer number of cells along x1."""
    if grid.mode == "cartesian1d":
        out = np.zeros_like(values)
        if cells >= 0:
            out[cells:] = values[: values.size - cells]
        else:
            out[:cells] = values[-cells:]
        return out
    n1 = grid.nodes_per_axis
    arr = values.reshape(n1, n1)
    out = np.zeros_like(arr)
    if cells >= 0:
        out[cells:, :] = arr[: n1 - cells, :]
    else:
        out[:cells, :] = arr[-cells:, :]
    return out.ravel()


def two_bump_seed(grid, w1, p, separation):
    """Asymmetric two-bump seed w1 - w1(. - s e1), normalized.

    The positive bump stays where w1 sits (in the potential well), the
    negative one is displaced by s along the first axis.  A symmetric
    +-s seed is deliberately avoided: for even potentials the descent
    preserves the symmetry and parks on the symmetric two-bump critical
    point, which lies strictly above the second minimax level.
    """
    cells = max(1, int(round(separation / grid.h)))
    vals = w1.values - _shift_field(grid, w1.values, cells)
    return normalize_to_M(grid, Field(grid, vals), p)


def radial_nodal_seed(grid, w1, p, r0):
    """Radial sign-changing seed: positive core, negative annulus."""
    r = grid.radii()
    vals = w1.values * (1.0 - (r / r0) ** 2)
    return normalize_to_M(grid, Field(grid, vals), p)


def nodal_minimax(grid, V, p, seed=None, opts=None, level="lambda2"):
    """Minimize J over M intersected with the dual set F.

    Alternates an Armijo tangent-descent step on M with the rebalancing
    projection onto F; converged means the *unconstrained* Euler-Lagrange
    residual with the single multiplier lambda = J(u) meets tol_residual
    while |h(u)| <= tol_h.  Non-attained levels (autonomous potentials) are
    reported as converged = False with diagnosis "mass escape" when the
    residual plateaus while the bump separation keeps growing.
    """
    opts = opts or SolverOptions(max_iter=6000, tol_residual=1e-4)
    same_grid(V)
    op = operator_for(grid, V)

    auto_seeded = seed is None
    base_w1 = None
    separation = opts.seed_separation
    if auto_seeded:
        gs = ground_state(grid, V, p,
                          opts=SolverOptions(max_iter=opts.max_iter * 4,
                                             tol_residual=max(opts.tol_residual, 1e-7)))
        base_w1 = gs.u
        if separation is None:
            v_edge = float(V.values[np.argmax(grid.radii())])
            separation = 3.0 / math.sqrt(max(v_edge, 1e-6))
        if grid.mode == "radial":
            seed = radial_nodal_seed(grid, base_w1, p, separation)
        else:
            seed = two_bump_seed(grid, base_w1, p, separation)

    restarts = 0
    while True:
        report = _nodal_descent(grid, V, op, p, seed, opts, level)
        if report is not None:
            return report
        # iterate left the sign-changing class
        restarts += 1
        if not auto_seeded or restarts > opts.max_restarts:
            raise SolverError(
                "nodal iterate collapsed to a signed state "
                f"after {restarts - 1} restarts"
            )
        separation *= 1.5
        log.info("nodal_minimax: restarting with separation %.3g", separation)
        if grid.mode == "radial":
            seed = radial_nodal_seed(grid, base_w1, p, separation)
        else:
            seed = two_bump_seed(grid, base_w1, p, separation)


def _nodal_descent(grid, V, op, p, seed, opts, level):
    """One descent run; returns None if the iterate loses its sign change."""
    u = normalize_to_M(grid, seed, p)
    _split_parts(grid, u, p)  # precondition: sign-changing

    inner_tol_h = max(opts.tol_h, 1e-8)
    inner_res = max(opts.eigen_res, 0.1 * inner_tol_h)
    u, t, h, pair, block, _ = _project_to_F(grid, V, u, p, inner_tol_h, 200, opts,
                                            eigen_res=inner_res)
    vals = u.values
    J = float(vals @ (op.K @ vals))
    history = [J]
    sep0 = _separation(grid, vals, p)
    sep_hist = [sep0]
    residual = math.inf
    converged = False
    stalled = False
    collapse_floor = 0.01 * opts.nodal_delta

    it = 0
    for it in range(1, opts.max_iter + 1):
        d, slope, J, wvals = _descent_direction(op, grid, vals, p)
        residual = _residual_values(op, grid, vals, J, wvals)
        if residual <= opts.tol_residual and abs(h) <= inner_tol_h:
            converged = True
            break

        tau = opts.tau0
        accepted = False
        slack = _energy_slack(op, vals, J)
        while tau >= opts.tau_min:
            cand = vals - tau * d
            pm, mm = _signed_masses(grid, cand, p)
            if min(pm, mm) <= collapse_floor * (pm + mm):
                tau *= opts.backtrack
                continue
            try:
                cand_f, t_c, h_c, pair_c, block_c, _ = _project_to_F(
                    grid, V, Field(grid, cand), p, inner_tol_h, 200, opts,
                    t_guess=t, x0=block, eigen_res=inner_res,
                )
            except (DegenerateInputError, SolverError):
                tau *= opts.backtrack
                continue
            Jc = float(cand_f.values @ (op.K @ cand_f.values))
            if Jc <= J - opts.armijo * tau * slope + slack:
                vals, J, t, h, pair, block = cand_f.values, Jc, t_c, h_c, pair_c, block_c
                history.append(J)
                sep_hist.append(_separation(grid, vals, p))
                accepted = True
                break
            tau *= opts.backtrack
        if not accepted:
            stalled = True
            break

        pm, mm = _signed_masses(grid, vals, p)
        if min(pm, mm) <= collapse_floor:
            return None  # signal restart

    # final tight projection onto F
    final_tol_h = min(opts.tol_h, 1e-9)
    u_f, t, h, pair, block, _ = _project_to_F(grid, V, Field(grid, vals), p,
                                              final_tol_h, 200, opts,
                                              t_guess=t, x0=block)
    vals = u_f.values
    d, slope, J, wvals = _descent_direction(op, grid, vals, p)
    residual = _residual_values(op, grid, vals, J, wvals)
    converged = residual <= opts.tol_residual and abs(h) <= opts.tol_h

    pm, mm = _signed_masses(grid, vals, p)
    u = Field(grid, vals)
    flags = {
        "on_M": abs(mass_I(grid, u, p) - 1.0) <= 1e-10,
        "in_F": abs(h) <= opts.tol_h,
        "nodal": min(pm, mm) >= opts.nodal_delta,
        "converged": converged,
    }
    diagnosis = None
    if not converged:
        sep_grew = sep_hist[-1] > sep_hist[0] + 2.0 * grid.h
        monotone = all(b >= a - grid.h for a, b in zip(sep_hist, sep_hist[1:]))
        if sep_grew and monotone:
            diagnosis = "mass escape"
        elif stalled:
            diagnosis = "descent stalled above tolerance"
        else:
            diagnosis = "non-convergence"
    extras = {
        "pos_mass": pm,
        "neg_mass": mm,
        "separation_history": sep_hist,
        "split_t": t,
    }
    return SolveReport(level, J, u, residual, h, it, history, flags,
                       diagnosis, extras)


# ---------------------------------------------------------------------------
# loop upper bound and the sandwich

def loop_minimax_upper(grid, V, u, p, n_samples=64, opts=None):
    """Max of J over the sampled odd loop through (v1(u), v2(u)) on M.

    Upper bound for the second minimax level; at most mu2(u) + O(1/n^2).
    """
    opts = opts or SolverOptions()
    pair1 = principal_eigenpair(grid, V, u, p, tol=opts.eigen_tol,
                                res_target=opts.eigen_res)
    pair2 = second_eigenpair(grid, V, u, p, pair1, tol=opts.eigen_tol,
                             res_target=opts.eigen_res)
    op = operator_for(grid, V)
    best = -math.inf
    for k in range(n_samples):
        theta = 2.0 * math.pi * k / n_samples
        vals = math.cos(theta) * pair1.v.values + math.sin(theta) * pair2.v.values
        try:
            Jv, _ = _energy_on_M(op, grid, vals, p)
        except DegenerateInputError as exc:  # impossible for independent v1, v2
            raise InternalConsistencyError(
                "loop sample degenerated; v1 and v2 are not independent"
            ) from exc
        best = max(best, Jv)
    return best


def lambda2_bounds(lambda1, lambda1_inf, p):
    """Sandwich (lambda1_inf, (lambda1^q + lambda1_inf^q)^(1/q)), q = p/(p-2)."""
    if not (0 < lambda1 <= lambda1_inf):
        raise ConfigurationError(
            f"need 0 < lambda1 <= lambda1_inf, got {lambda1}, {lambda1_inf}"
        )
    q = p / (p - 2.0)
    upper = (lambda1 ** q + lambda1_inf ** q) ** (1.0 / q)
    return lambda1_inf, upper
