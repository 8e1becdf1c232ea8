"""Kronecker-structured stage system and its block-triangular preconditioner.

One implicit time step couples all q stages into the (q*n) x (q*n) operator

    A_stage = Ainv (x) M + tau * I (x) K,

where (x) is the Kronecker product.  Replacing Ainv by its lower triangular
factor L gives the preconditioner

    P = L (x) M + tau * I (x) K,

and diagonalizing L = T Lam T^-1 turns every application of P^-1 into q
independent sparse solves with B_i = Lam_i * M + tau * K plus two cheap
triangular stage mixes.  Neither operator is ever formed densely except in
small test oracles.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .factor import TriangularFactorization, factorize
from .fem import GridOperators
from .tableau import ButcherTableau, radau_tableau

#: largest spatial dimension for which the per-stage solves default to a
#: direct sparse factorization
DIRECT_LIMIT = 40_000

#: largest q*n for which the dense oracles will materialize a matrix
DENSE_ORACLE_LIMIT = 5_000

SOLVER_KINDS = ("direct_cholesky", "cg_inner")


@dataclass(frozen=True)
class StageSystem:
    """The coupled q-stage operator for one implicit time step."""

    tableau: ButcherTableau
    fact: TriangularFactorization
    M: sp.csr_matrix
    K: sp.csr_matrix
    tau: float
    grid: Optional[GridOperators] = None   # set when assembled from a mesh

    @property
    def q(self):
        return self.tableau.q

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def dim(self):
        return self.q * self.n


def tau_from_rule(rule, h, q):
    """Resolve a time-step rule string to a numeric tau.

    Supported forms: "matched" (tau = h^(2/(2q-1)), which balances the
    spatial and temporal resolving power), "c<value>" (tau = value * h^2)
    and "explicit:<value>" (tau = value).
    """
    if isinstance(rule, (int, float)):
        return float(rule)
    rule = rule.strip()
    if rule == "matched":
        return float(h) ** (2.0 / (2 * q - 1))
    if rule.startswith("explicit:"):
        return float(rule[len("explicit:"):])
    if rule.startswith("c"):
        try:
            c = float(rule[1:])
        except ValueError:
            raise ValueError(f"unrecognized time-step rule {rule!r}") from None
        return c * float(h) ** 2
    raise ValueError(f"unrecognized time-step rule {rule!r}")


def build_stage_system(q, M, K, tau, grid=None):
    """Stage system from explicit matrices (CSR-converted, never copied densely)."""
    tab = radau_tableau(q)
    fact = factorize(tab)
    M = sp.csr_matrix(M)
    K = sp.csr_matrix(K)
    if M.shape != K.shape or M.shape[0] != M.shape[1]:
        raise ValueError("mass and stiffness matrices must be square and congruent")
    if tau <= 0.0:
        raise ValueError(f"time step must be positive, got {tau}")
    return StageSystem(tableau=tab, fact=fact, M=M, K=K, tau=float(tau), grid=grid)


def stage_system_from_grid(q, grid, tau_rule):
    """Stage system on assembled grid operators; tau_rule as in tau_from_rule."""
    tau = tau_from_rule(tau_rule, grid.h, q)
    return build_stage_system(q, grid.M, grid.K, tau, grid=grid)


def stage_apply(system, x):
    """Matrix-vector product with A_stage = Ainv (x) M + tau I (x) K."""
    q, n = system.q, system.n
    X = np.asarray(x).reshape(q, n)
    MX = (system.M @ X.T).T
    KX = (system.K @ X.T).T
    return (system.fact.Ainv @ MX + system.tau * KX).ravel()


def assemble_rhs(system, g_stack, u0):
    """Right-hand side of the stage system for source values and initial state.

    g_stack holds the q stage source vectors row-wise (shape (q, n)); u0 is
    the current state.  The result is (Ainv (x) I) g  -  (Ainv 1) (x) (K u0),
    with 1 the all-ones stage vector.
    """
    q, n = system.q, system.n
    G = np.asarray(g_stack, dtype=float).reshape(q, n)
    lifted = system.fact.Ainv @ G
    row_sums = system.fact.Ainv @ np.ones(q)
    Ku0 = system.K @ np.asarray(u0, dtype=float)
    return (lifted - np.outer(row_sums, Ku0)).ravel()


def default_solver_kind(n):
    """Pick the per-stage linear solver for a spatial dimension n."""
    return "direct_cholesky" if n <= DIRECT_LIMIT else "cg_inner"


def _cg_solve(B, rhs, rtol):
    try:
        sol, info = spla.cg(B, rhs, rtol=rtol, atol=0.0)
    except TypeError:   # older scipy spells the keyword 'tol'
        sol, info = spla.cg(B, rhs, tol=rtol, atol=0.0)
    if info != 0:
        raise SolverError(f"inner conjugate gradient failed to converge (info={info})")
    return sol


@dataclass(frozen=True)
class PreconditionerState:
    """Prefactored data for applying P^-1; immutable once built."""

    system: StageSystem
    solver_kind: str
    solves: Sequence    # per-stage callables, rhs -> B_i^-1 rhs

    @property
    def q(self):
        return self.system.q


def build_preconditioner(system, solver_kind=None, cg_rtol=1e-12):
    """Prepare the q spatial solves behind P^-1.

    solver_kind "direct_cholesky" prefactors each SPD block B_i =
    Lam_i M + tau K once; "cg_inner" keeps the blocks matrix-free and runs a
    tight conjugate gradient per application.  The default switches on the
    spatial dimension via default_solver_kind.
    """
    kind = solver_kind or default_solver_kind(system.n)
    if kind not in SOLVER_KINDS:
        raise ValueError(f"solver_kind must be one of {SOLVER_KINDS}, got {kind!r}")
    solves = []
    for lam in system.fact.Lambda:
        B = (lam * system.M + system.tau * system.K).tocsc()
        if kind == "direct_cholesky":
            lu = spla.splu(B)
            solves.append(lu.solve)
        else:
            solves.append(lambda rhs, B=B: _cg_solve(B, rhs, cg_rtol))
    return PreconditionerState(system=system, solver_kind=kind, solves=tuple(solves))


def prec_apply(state, r):
    """Apply P^-1 = (T (x) I) (Lam (x) M + tau I (x) K)^-1 (T^-1 (x) I)."""
    system = state.system
    q, n = system.q, system.n
    R = np.asarray(r).reshape(q, n)
    mixed = system.fact.Tinv @ R
    solved = np.empty_like(mixed)
    for i in range(q):
        solved[i] = state.solves[i](mixed[i])
    return (system.fact.T @ solved).ravel()


def dense_stage_matrix(system):
    """Dense A_stage for small test oracles (guarded by DENSE_ORACLE_LIMIT)."""
    _check_dense(system)
    return (np.kron(system.fact.Ainv, system.M.toarray())
            + system.tau * np.kron(np.eye(system.q), system.K.toarray()))


def dense_preconditioner_matrix(system):
    """Dense P for small test oracles (guarded by DENSE_ORACLE_LIMIT)."""
    _check_dense(system)
    return (np.kron(system.fact.L, system.M.toarray())
            + system.tau * np.kron(np.eye(system.q), system.K.toarray()))


def _check_dense(system):
    if system.dim > DENSE_ORACLE_LIMIT:
        raise ValueError(
            f"dense oracle requested for dimension {system.dim} "
            f"(> {DENSE_ORACLE_LIMIT}); dense assembly is a small-problem "
            "testing device only")
