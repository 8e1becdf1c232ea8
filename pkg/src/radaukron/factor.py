"""Triangular factorization of the inverse coefficient matrix.

The stage system is driven by Ainv = A^-1, which admits an LU factorization
Ainv = L U with L lower triangular and U unit upper triangular (Crout, no
pivoting).  The strictly upper part Uhat = U - I is the perturbation that the
lower-triangular preconditioner discards; its smallness is what drives the
eigenvalue clustering.  L itself is diagonalized as L = T Lambda T^-1 with a
unit lower triangular T, which splits the preconditioner into q independent
spatial solves.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigenvaluesError, FactorizationError
from .tableau import ButcherTableau, radau_tableau


@dataclass(frozen=True)
class TriangularFactorization:
    """All triangular pieces derived from a q-stage tableau."""

    q: int
    Ainv: np.ndarray    # inverse of the Runge-Kutta matrix A
    L: np.ndarray       # lower triangular Crout factor
    U: np.ndarray       # unit upper triangular factor
    Uhat: np.ndarray    # U - I (strictly upper triangular defect)
    Linv: np.ndarray    # inverse of L
    Lambda: np.ndarray  # eigenvalues of L (its diagonal), shape (q,)
    T: np.ndarray       # unit lower triangular eigenvector matrix of L
    Tinv: np.ndarray    # inverse of T


def invert_tableau(tab):
    """Inverse of the Runge-Kutta matrix A (dense, q x q)."""
    if not isinstance(tab, ButcherTableau):
        raise TypeError("invert_tableau expects a ButcherTableau")
    try:
        return np.linalg.solve(tab.A, np.eye(tab.q))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"tableau matrix is singular: {exc}") from exc


def lu_unit_upper(A):
    """Crout factorization A = L U with unit diagonal U and no pivoting.

    Raises FactorizationError (carrying the pivot index) when a pivot
    vanishes, since no row exchanges are allowed here.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("lu_unit_upper expects a square matrix")
    L = np.zeros((n, n))
    U = np.eye(n)
    scale = np.abs(A).max() or 1.0
    for j in range(n):
        for i in range(j, n):
            L[i, j] = A[i, j] - L[i, :j] @ U[:j, j]
        piv = L[j, j]
        if abs(piv) <= 1e-14 * scale:
            raise FactorizationError(
                f"zero pivot encountered at index {j}", pivot_index=j)
        for k in range(j + 1, n):
            U[j, k] = (A[j, k] - L[j, :j] @ U[:j, k]) / piv
    return L, U


def lower_inverse(L):
    """Inverse of a lower triangular matrix by forward substitution."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    diag = np.diag(L)
    if np.any(diag == 0.0):
        idx = int(np.flatnonzero(diag == 0.0)[0])
        raise FactorizationError(
            f"singular triangular matrix: zero diagonal at index {idx}",
            pivot_index=idx)
    X = np.zeros((n, n))
    for j in range(n):
        X[j, j] = 1.0 / diag[j]
        for i in range(j + 1, n):
            X[i, j] = -(L[i, j:i] @ X[j:i, j]) / diag[i]
    return X


def spectral_decompose_lower(L, rtol=1e-10):
    """Diagonalize a lower triangular matrix: L = T diag(Lambda) T^-1.

    Returns (T, Lambda, Tinv).  The eigenvalues are the diagonal entries; T
    is unit lower triangular and is built column by column with a forward
    recursion.  Eigenvalues closer than rtol (relatively) would make that
    recursion blow up, so that case is rejected explicitly.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    lam = np.diag(L).copy()
    scale = np.abs(lam).max() or 1.0
    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= rtol * scale:
                raise DegenerateEigenvaluesError(
                    f"eigenvalues {i} and {j} coincide to within {rtol:g} "
                    f"(values {lam[i]!r}, {lam[j]!r}); the triangular "
                    "eigenvector recursion is not applicable")
    T = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            T[j, i] = (L[j, i:j] @ T[i:j, i]) / (lam[i] - L[j, j])
    Tinv = lower_inverse(T)
    return T, lam, Tinv


def factorize(q_or_tableau):
    """Full factorization bundle for a stage count or an explicit tableau."""
    if isinstance(q_or_tableau, ButcherTableau):
        tab = q_or_tableau
    else:
        tab = radau_tableau(q_or_tableau)
    Ainv = invert_tableau(tab)
    L, U = lu_unit_upper(Ainv)
    Uhat = U - np.eye(tab.q)
    Linv = lower_inverse(L)
    T, lam, Tinv = spectral_decompose_lower(L)
    return TriangularFactorization(q=tab.q, Ainv=Ainv, L=L, U=U, Uhat=Uhat,
                                   Linv=Linv, Lambda=lam, T=T, Tinv=Tinv)
