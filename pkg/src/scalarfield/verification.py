"""Post-hoc certification: residuals, nodality, decay fits, radial deviation."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .functionals import _weight_values
from .grid import Field, operator_for, same_grid


@dataclass
class NodalityReport:
    pos_mass: float
    neg_mass: float
    is_nodal: bool
    threshold: float


@dataclass
class DecayFit:
    fitted_rate: float
    fitted_C0: float
    r_min: float
    r_max: float
    r_squared: float


def residual_eq(grid, V, u, lam, p):
    """Weighted-L2 residual of -lap u + V u = lam |u|^(p-2) u, relative to max(1, |u|)."""
    same_grid(V, u)
    op = operator_for(grid, V)
    r = op.apply(u.values) - lam * _weight_values(u.values, p) * u.values
    num = math.sqrt(float(grid.weights @ (r * r)))
    den = math.sqrt(float(grid.weights @ (u.values * u.values)))
    return num / max(1.0, den)


def nodality(grid, u, p, delta=1e-3):
    """Signed masses of u and the sign-change flag min(pos, neg) >= delta.

    delta is an absolute threshold; fields on the mass manifold have total
    mass 1, so the default 1e-3 reads as a fraction of the total.
    """
    pos = float(grid.weights @ np.maximum(u.values, 0.0) ** p)
    neg = float(grid.weights @ np.maximum(-u.values, 0.0) ** p)
    return NodalityReport(pos, neg, min(pos, neg) >= delta, delta)


def decay_fit(grid, u, V_inf, N_eff, r_min=None, r_max=None):
    """Least-squares fit of log(u |x|^((N-1)/2)) against |x| on an annulus.

    The annulus defaults to [0.3 R, 0.8 R], away from both the core and the
    truncation boundary.  The fitted decay constant should approach
    sqrt(V_inf) for ground states.  Requires u > 0 on the annulus.
    """
    r_min = 0.3 * grid.R if r_min is None else r_min
    r_max = 0.8 * grid.R if r_max is None else r_max
    if r_min < 0.3 * grid.R - 1e-12 or r_max > 0.8 * grid.R + 1e-12:
        raise ValueError("fit annulus must sit inside [0.3 R, 0.8 R]")
    r = grid.radii()
    sel = (r >= r_min) & (r <= r_max)
    if not np.any(sel):
        raise ValueError("fit annulus contains no nodes")
    uv = u.values[sel]
    if np.min(uv) <= 0:
        raise ValueError("decay_fit requires u > 0 on the fit annulus")
    rr = r[sel]
    y = np.log(uv * rr ** ((N_eff - 1) / 2.0))
    slope, intercept = np.polyfit(rr, y, 1)
    resid = y - (slope * rr + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(-float(slope), math.exp(float(intercept)), r_min, r_max, r2)


def radial_deviation(grid, u, bin_width=None, min_nodes=4):
    """Relative weighted-L2 distance of u from its angular average.

    Nodes are grouped in radius bins (default width 2h); bins with fewer than
    min_nodes nodes are dropped from the norm.  Radial fields score near 0,
    pure angular modes near 1.
    """
    if grid.mode != "cartesian2d":
        raise GridMismatchError("radial_deviation requires a cartesian2d grid")
    bw = 2.0 * grid.h if bin_width is None else bin_width
    r = grid.radii()
    idx = np.floor(r / bw).astype(int)
    nbins = idx.max() + 1
    counts = np.bincount(idx, minlength=nbins)
    sum_u = np.bincount(idx, weights=u.values, minlength=nbins)
    sum_r = np.bincount(idx, weights=r, minlength=nbins)
    good = counts >= min_nodes
    centers = sum_r[good] / counts[good]
    means = sum_u[good] / counts[good]
    order = np.argsort(centers)
    avg_at_node = np.interp(r, centers[order], means[order])
    keep = good[idx]
    w = grid.weights[keep]
    diff = u.values[keep] - avg_at_node[keep]
    num = math.sqrt(float(w @ (diff * diff)))
    den = math.sqrt(float(w @ (u.values[keep] ** 2)))
    if den == 0:
        return 0.0
    return num / den


def angular_average_field(grid, u, bin_width=None, min_nodes=4):
    """The interpolated angular average used by radial_deviation, as a Field."""
    if grid.mode != "cartesian2d":
        raise GridMismatchError("angular averaging requires a cartesian2d grid")
    bw = 2.0 * grid.h if bin_width is None else bin_width
    r = grid.radii()
    idx = np.floor(r / bw).astype(int)
    nbins = idx.max() + 1
    counts = np.bincount(idx, minlength=nbins)
    sum_u = np.bincount(idx, weights=u.values, minlength=nbins)
    sum_r = np.bincount(idx, weights=r, minlength=nbins)
    good = counts >= min_nodes
    centers = sum_r[good] / counts[good]
    means = sum_u[good] / counts[good]
    order = np.argsort(centers)
    return Field(grid, np.interp(r, centers[order], means[order]))
