"""Bilinear (Q1) finite elements on the unit square and their symbols.

The mesh is a uniform n_side x n_side grid of nodes on [0,1]^2 (spacing
h = 1/(n_side-1)) with one square element per cell.  Stiffness assembles the
gradient inner product (h-independent in 2D); the consistent mass matrix
scales with h^2.  Both operators are tensor products of 1D tridiagonal
Toeplitz factors away from the boundary, so their interior behaviour is
captured by trigonometric symbols g(theta1, theta2); those symbols are also
first-class objects here because the eigenvalue analysis feeds on the ratio
tau * g_stiffness / g_mass.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import _kernels
from .errors import DefinitenessError, UnsupportedSymbolError

#: interior 9-point stencil of the Q1 stiffness matrix (multiply by 1/3)
STIFFNESS_STENCIL = np.array([[-1.0, -1.0, -1.0],
                              [-1.0, 8.0, -1.0],
                              [-1.0, -1.0, -1.0]]) / 3.0

#: interior 9-point stencil of the consistent mass matrix (multiply by h^2/36)
MASS_STENCIL = np.array([[1.0, 4.0, 1.0],
                         [4.0, 16.0, 4.0],
                         [1.0, 4.0, 1.0]]) / 36.0

#: classical 5-point finite difference Laplacian stencil
FIVEPOINT_STENCIL = np.array([[0.0, -1.0, 0.0],
                              [-1.0, 4.0, -1.0],
                              [0.0, -1.0, 0.0]])

BC_MODES = ("full", "dirichlet_interior")


@dataclass(frozen=True)
class GridOperators:
    """Assembled mass/stiffness pair on a uniform Q1 grid."""

    n_side: int          # nodes per side of the square grid
    h: float             # mesh spacing 1/(n_side - 1)
    bc_mode: str         # "full" (all nodes) or "dirichlet_interior"
    n: int               # matrix dimension
    M: sp.csr_matrix     # consistent mass matrix, n x n
    K: sp.csr_matrix     # stiffness matrix, n x n


@dataclass(frozen=True, eq=False)
class SymbolDescriptor:
    """A trigonometric symbol g(theta1, theta2) with optional stencil."""

    role: str                               # "stiffness", "mass" or "ratio"
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    stencil: Optional[np.ndarray] = None    # 3x3 Fourier coefficients, or None
    scale: float = 1.0                      # multiplies the stencil
    label: str = ""


def assemble_q1(n_side, bc_mode="full"):
    """Assemble consistent mass and stiffness matrices on the unit square.

    bc_mode "full" keeps every node (stiffness is then singular with the
    constants in its kernel); "dirichlet_interior" restricts both operators
    to the (n_side-2)^2 interior nodes.
    """
    if n_side < 3:
        raise ValueError(f"n_side must be at least 3, got {n_side}")
    if bc_mode not in BC_MODES:
        raise ValueError(f"bc_mode must be one of {BC_MODES}, got {bc_mode!r}")
    h = 1.0 / (n_side - 1)
    rows, cols, kvals, mvals = _kernels.q1_triplets(n_side)
    n_full = n_side * n_side
    K = sp.coo_matrix((kvals, (rows, cols)), shape=(n_full, n_full)).tocsr()
    M = sp.coo_matrix((mvals * h * h, (rows, cols)), shape=(n_full, n_full)).tocsr()
    if bc_mode == "dirichlet_interior":
        idx = np.arange(n_full).reshape(n_side, n_side)[1:-1, 1:-1].ravel()
        K = K[np.ix_(idx, idx)].tocsr()
        M = M[np.ix_(idx, idx)].tocsr()
    n = K.shape[0]
    return GridOperators(n_side=n_side, h=h, bc_mode=bc_mode, n=n, M=M, K=K)


def stiffness_symbol():
    """Interior symbol of the Q1 stiffness matrix."""

    def evaluator(t1, t2):
        return (8.0 - 2.0 * np.cos(t1) - 2.0 * np.cos(t2) * (1.0 + 2.0 * np.cos(t1))) / 3.0

    return SymbolDescriptor(role="stiffness", evaluator=evaluator,
                            stencil=STIFFNESS_STENCIL, label="q1_stiffness")


def mass_symbol(h):
    """Interior symbol of the consistent mass matrix at spacing h."""
    h2 = float(h) ** 2

    def evaluator(t1, t2):
        return (h2 / 9.0) * (2.0 + np.cos(t1)) * (2.0 + np.cos(t2))

    return SymbolDescriptor(role="mass", evaluator=evaluator,
                            stencil=MASS_STENCIL, scale=h2, label="q1_mass")


def fivepoint_symbol():
    """Symbol of the 5-point finite difference Laplacian."""

    def evaluator(t1, t2):
        return 4.0 - 2.0 * np.cos(t1) - 2.0 * np.cos(t2)

    return SymbolDescriptor(role="stiffness", evaluator=evaluator,
                            stencil=FIVEPOINT_STENCIL, label="fivepoint_laplacian")


def ratio_symbol(tau, h):
    """Symbol of tau * M^-1 K on the interior: tau * g_K / g_M."""
    g_k = stiffness_symbol().evaluator
    g_m = mass_symbol(h).evaluator
    tau = float(tau)

    def evaluator(t1, t2):
        return tau * g_k(t1, t2) / g_m(t1, t2)

    return SymbolDescriptor(role="ratio", evaluator=evaluator,
                            label=f"ratio_tau={tau:g}_h={h:g}")


def sample_symbol(symbol, m):
    """Evaluate a symbol on the m^2 grid theta_j = j*pi/(m+1), j = 1..m.

    Returns the samples as a flat array of length m^2 (row-major in
    (theta1, theta2)).
    """
    if m < 1:
        raise ValueError(f"sample count per direction must be positive, got {m}")
    theta = np.arange(1, m + 1) * (math.pi / (m + 1))
    t1, t2 = np.meshgrid(theta, theta, indexing="ij")
    return np.asarray(symbol.evaluator(t1, t2), dtype=float).ravel()


def toeplitz_from_symbol(symbol, m):
    """Sparse m^2 x m^2 two-level Toeplitz matrix generated by a stencil.

    Only symbols carrying an explicit 3x3 stencil can be materialized; the
    ratio symbol, for instance, is not a polynomial symbol and is rejected.
    """
    if symbol.stencil is None:
        raise UnsupportedSymbolError(
            f"symbol {symbol.label!r} has no stencil; it cannot be "
            "materialized as a Toeplitz matrix")
    if m < 1:
        raise ValueError(f"block size must be positive, got {m}")
    stencil = np.asarray(symbol.stencil, dtype=float) * symbol.scale
    shifts = {}
    for d in (-1, 0, 1):
        shifts[d] = sp.eye(m, format="csr") if d == 0 else \
            sp.diags([np.ones(m - 1)], [d], shape=(m, m), format="csr")
    out = sp.csr_matrix((m * m, m * m))
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            w = stencil[a + 1, b + 1]
            if w != 0.0:
                out = out + w * sp.kron(shifts[a], shifts[b], format="csr")
    return out.tocsr()


def zt_eigenvalues(ops, tau):
    """All eigenvalues of tau * M^-1 K, ascending, as a dense computation.

    ops is a GridOperators bundle (or any object with .M and .K).  Solves the
    symmetric generalized problem K v = mu M v by Cholesky reduction of the
    positive definite M; tiny negative values from roundoff are clipped to
    zero, while genuinely indefinite inputs raise DefinitenessError.
    """
    return generalized_eigenvalues(ops.M, ops.K, tau)


def generalized_eigenvalues(M, K, tau):
    """zt_eigenvalues on raw matrices (sparse or dense) instead of a bundle."""
    Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    try:
        mu = scipy.linalg.eigh(Kd, Md, eigvals_only=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise DefinitenessError(
            f"mass matrix is not positive definite: {exc}") from exc
    tol = 1e-10 * max(1.0, float(np.abs(mu).max()))
    if mu.min() < -tol:
        raise DefinitenessError(
            f"negative generalized eigenvalue {mu.min():.3e} detected; "
            "the stiffness matrix is expected to be positive semidefinite")
    mu = np.clip(mu, 0.0, None)
    return float(tau) * np.sort(mu)
