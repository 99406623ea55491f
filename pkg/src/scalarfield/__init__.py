"""Numerical study of -lap u + V(x) u = lambda |u|^(p-2) u on truncated domains.

Ground states on the mass manifold, the linearized weighted eigenproblem,
sign-changing (nodal) solutions at the second minimax level, two-sided bounds
for that level, and post-hoc certification of stored solutions.
"""

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    GridMismatchError,
    HypothesisViolationError,
    InternalConsistencyError,
    ScalarFieldError,
    SolverError,
    SpectralDeficiencyError,
)
from .grid import (
    Field,
    Grid,
    apply_A,
    build_grid,
    coercivity_constant,
    integrate,
    same_grid,
    solve_A,
)
from .potentials import (
    EXPONENT_CONVENTION,
    HypothesisReport,
    PotentialSpec,
    ProblemParams,
    hypothesis_report,
    make_potential,
    well_norm,
    well_norm_closed_form,
)
from .functionals import (
    energy_J,
    grad_I,
    grad_J,
    jacobi_residual,
    mass_I,
    normalize_to_M,
    weight_of,
    weighted_inner,
)
from .eigen import Eigenpair, principal_eigenpair, second_eigenpair
from .variational import (
    SolveReport,
    SolverOptions,
    dual_split,
    ground_state,
    h_eval,
    lambda2_bounds,
    loop_minimax_upper,
    nodal_minimax,
    project_to_F,
    radial_nodal_seed,
    two_bump_seed,
)
from .verification import (
    DecayFit,
    NodalityReport,
    decay_fit,
    nodality,
    radial_deviation,
    residual_eq,
)
from .fieldio import read_field, write_field, write_history
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DegenerateInputError", "GridMismatchError",
    "HypothesisViolationError", "InternalConsistencyError", "ScalarFieldError",
    "SolverError", "SpectralDeficiencyError",
    "Field", "Grid", "apply_A", "build_grid", "coercivity_constant",
    "integrate", "same_grid", "solve_A",
    "EXPONENT_CONVENTION", "HypothesisReport", "PotentialSpec", "ProblemParams",
    "hypothesis_report", "make_potential", "well_norm", "well_norm_closed_form",
    "energy_J", "grad_I", "grad_J", "jacobi_residual", "mass_I",
    "normalize_to_M", "weight_of", "weighted_inner",
    "Eigenpair", "principal_eigenpair", "second_eigenpair",
    "SolveReport", "SolverOptions", "dual_split", "ground_state", "h_eval",
    "lambda2_bounds", "loop_minimax_upper", "nodal_minimax", "project_to_F",
    "radial_nodal_seed", "two_bump_seed",
    "DecayFit", "NodalityReport", "decay_fit", "nodality", "radial_deviation",
    "residual_eq",
    "read_field", "write_field", "write_history",
    "RunConfig",
]
