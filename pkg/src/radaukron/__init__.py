"""Radau IIA stage systems with Kronecker-structured triangular preconditioning.

The package builds implicit Runge-Kutta collocation tableaux, factorizes the
inverse coefficient matrix, assembles bilinear finite elements on the unit
square, applies the coupled stage operator and its block-triangular
preconditioner matrix-free, solves with right-preconditioned GMRES, and
analyzes the spectrum of the preconditioned operator through its per-mode
branch reduction.
"""

from .backend import ENV_VAR as BACKEND_ENV_VAR
from .backend import HAVE_NUMBA, selected_backend, use_numba
from .errors import (DefinitenessError, DegenerateEigenvaluesError,
                     FactorizationError, NumericalError, SolverError,
                     UnsupportedSymbolError)
from .factor import (TriangularFactorization, factorize, invert_tableau,
                     lower_inverse, lu_unit_upper, spectral_decompose_lower)
from .fem import (GridOperators, SymbolDescriptor, assemble_q1,
                  fivepoint_symbol, generalized_eigenvalues, mass_symbol,
                  ratio_symbol, sample_symbol, stiffness_symbol,
                  toeplitz_from_symbol, zt_eigenvalues)
from .kron import (DENSE_ORACLE_LIMIT, DIRECT_LIMIT, PreconditionerState,
                   StageSystem, assemble_rhs, build_preconditioner,
                   build_stage_system, default_solver_kind,
                   dense_preconditioner_matrix, dense_stage_matrix,
                   prec_apply, stage_apply, stage_system_from_grid,
                   tau_from_rule)
from .krylov import (SolveReport, StepReport, gmres, gmres_operator,
                     integrate, irk_step)
from .spectrum import (DistributionSummary, RadiusEstimate, SpectralReport,
                       branch_eigenvalues, distribution_check, eigenvector_q2,
                       eigenvector_q3, f_q2, preconditioned_spectrum,
                       q3_quadratic_coefficients, radius_estimate,
                       reduced_block, test1_counts, test2_vectors)
from .tableau import (ButcherTableau, OrderConditionReport, radau_nodes,
                      radau_tableau, verify_order_conditions)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_ENV_VAR", "HAVE_NUMBA", "selected_backend", "use_numba",
    "NumericalError", "FactorizationError", "DegenerateEigenvaluesError",
    "DefinitenessError", "SolverError", "UnsupportedSymbolError",
    "ButcherTableau", "OrderConditionReport", "radau_nodes", "radau_tableau",
    "verify_order_conditions",
    "TriangularFactorization", "factorize", "invert_tableau",
    "lu_unit_upper", "lower_inverse", "spectral_decompose_lower",
    "GridOperators", "SymbolDescriptor", "assemble_q1", "stiffness_symbol",
    "mass_symbol", "fivepoint_symbol", "ratio_symbol", "sample_symbol",
    "toeplitz_from_symbol", "zt_eigenvalues", "generalized_eigenvalues",
    "StageSystem", "PreconditionerState", "build_stage_system",
    "stage_system_from_grid", "tau_from_rule", "stage_apply", "assemble_rhs",
    "build_preconditioner", "prec_apply", "default_solver_kind",
    "dense_stage_matrix", "dense_preconditioner_matrix", "DIRECT_LIMIT",
    "DENSE_ORACLE_LIMIT",
    "SolveReport", "StepReport", "gmres", "gmres_operator", "irk_step",
    "integrate",
    "SpectralReport", "RadiusEstimate", "DistributionSummary",
    "reduced_block", "f_q2", "q3_quadratic_coefficients",
    "branch_eigenvalues", "eigenvector_q2", "eigenvector_q3",
    "radius_estimate", "preconditioned_spectrum", "test1_counts",
    "test2_vectors", "distribution_check",
]
