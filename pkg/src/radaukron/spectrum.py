"""Spectral analysis of the preconditioned stage operator.

Conjugating P^-1 A by the eigenbasis of Z = tau * M^-1 K reduces the qn x qn
eigenproblem to n independent q x q problems: for each eigenvalue mu of Z the
reduced block R(mu) = (I + mu L^-1)^-1 Uhat contributes the eigenvalues
1 + lambda_i(mu), i = 1..q-1, next to a lambda = 1 copy.  Everything here —
closed forms for q = 2 and q = 3, branch roots for general q, the cluster
radius sup_mu max_i |lambda_i(mu)|, eigenvector formulas, and the two
empirical eigenvalue statistics — is built on that reduction.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import NumericalError
from .factor import TriangularFactorization, factorize
from .fem import generalized_eigenvalues, ratio_symbol, sample_symbol
from .kron import dense_preconditioner_matrix, dense_stage_matrix

SPECTRUM_MODES = ("structured", "dense_oracle")

DEFAULT_MU_GRID = (1e-8, 1e8, 2000)

_FACT_CACHE: Dict[int, TriangularFactorization] = {}


def _cached_fact(q):
    if q not in _FACT_CACHE:
        _FACT_CACHE[q] = factorize(q)
    return _FACT_CACHE[q]


@dataclass
class SpectralReport:
    """Spectrum of P^-1 A together with its per-mu branch decomposition."""

    q: int
    n: int
    tau: float
    h: Optional[float]
    mode: str
    eigenvalues: np.ndarray                  # all qn eigenvalues, complex
    mu: Optional[np.ndarray] = None          # eigenvalues of tau M^-1 K
    branches: Optional[np.ndarray] = None    # (n, q-1) branch values
    radius: float = 0.0                      # max |lambda - 1| over branches
    counts: Optional[Dict[float, Tuple[int, float]]] = None
    E1: Optional[np.ndarray] = None
    E2: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RadiusEstimate:
    """Estimated cluster radius sup_mu max_i |lambda_i(mu)| and its argmax."""

    q: int
    radius: float
    mu_star: float

    def __float__(self):
        return self.radius


@dataclass(frozen=True)
class DistributionSummary:
    """Refinement-series verdict for an eigenvalue-distribution law."""

    rule: str                       # "matched" or "c_constant"
    eps: float
    rows: Tuple[Tuple[float, float, float], ...]   # (h, tau, value) per level
    values: Tuple[float, ...]       # the per-level statistic, in order
    satisfied: bool


def _check_mu(mu):
    mu = float(mu)
    if not mu > 0.0:
        raise ValueError(f"spectral parameter mu must be positive, got {mu}")
    return mu


def reduced_block(mu, fact):
    """R(mu) = (I + mu L^-1)^-1 Uhat, the q x q coupling block."""
    mu = _check_mu(mu)
    B = np.eye(fact.q) + mu * fact.Linv
    if np.any(np.diag(B) == 0.0):
        raise NumericalError("I + mu L^-1 is singular")   # unreachable for mu > 0
    return scipy.linalg.solve_triangular(B, fact.Uhat, lower=True)


def f_q2(mu):
    """The single nonzero branch for q = 2 in closed form (always real)."""
    arr = np.asarray(mu, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("spectral parameter mu must be positive")
    val = -1.0 / (4.0 / arr + (2.0 / 3.0) * arr + 11.0 / 3.0)
    return float(val) if np.isscalar(mu) else val


def q3_quadratic_coefficients(mu, fact=None):
    """Coefficients (a, b, c) with a*l^2 + b*l + c = 0 giving the q=3 branches.

    These are det(I + mu L^-1) times the deflated characteristic polynomial
    of R(mu), written directly in terms of the entries u_ij of Uhat and l_ij
    of L^-1.
    """
    fact = _cached_fact(3) if fact is None else fact
    if fact.q != 3:
        raise ValueError("the quadratic closed form is specific to q = 3")
    mu = np.asarray(mu, dtype=float)
    l = fact.Linv
    u = fact.Uhat
    d1, d2, d3 = 1.0 + l[0, 0] * mu, 1.0 + l[1, 1] * mu, 1.0 + l[2, 2] * mu
    a = d1 * d2 * d3
    b = (d1 * u[1, 2] * l[2, 1] * mu
         + u[0, 2] * mu * (l[2, 0] * d2 - l[1, 0] * l[2, 1] * mu)
         + u[0, 1] * l[1, 0] * mu * d3)
    c = u[0, 1] * u[1, 2] * l[2, 0] * mu
    return a, b, c


def branch_eigenvalues(mu, fact):
    """The q-1 generically nonzero eigenvalues of R(mu).

    mu may be a scalar (returns shape (q-1,)) or an array (returns
    (len(mu), q-1)).  Computed as roots of the deflated characteristic
    polynomial of R(mu); the trivial lambda = 0 root is removed.
    """
    if fact.q < 2:
        raise ValueError("branch eigenvalues require q >= 2")
    arr = np.atleast_1d(np.asarray(mu, dtype=float))
    if np.any(arr < 0.0):
        raise ValueError("spectral parameter mu must be nonnegative")
    vals = _kernels.branch_values_batch(arr, fact.Linv, fact.Uhat)
    return vals[0] if np.isscalar(mu) or np.ndim(mu) == 0 else vals


def eigenvector_q2(mu, v2):
    """Stage-space eigenvector [alpha(mu) v2; v2] for the nonzero q=2 branch.

    v2 must be an eigenvector of tau M^-1 K for the eigenvalue mu; the
    returned vector is an eigenvector of P^-1 A for 1 + f_q2(mu).
    """
    mu = _check_mu(mu)
    v2 = np.asarray(v2, dtype=float)
    if np.linalg.norm(v2) == 0.0:
        raise ValueError("v2 must be a nonzero vector")
    alpha = -(1.0 / 3.0) * (1.0 + 4.0 / mu)
    return np.concatenate([alpha * v2, v2])


def eigenvector_q3(mu, v1, fact=None, branch=0):
    """Stage-space eigenvector [v1; alpha v1; beta v1] for a q=3 branch.

    v1 must be an eigenvector of tau M^-1 K for the eigenvalue mu; branch
    selects which of the two branch eigenvalues at mu the vector belongs to.
    The returned vector is complex whenever the branch is.
    """
    mu = _check_mu(mu)
    v1 = np.asarray(v1, dtype=float)
    if np.linalg.norm(v1) == 0.0:
        raise ValueError("v1 must be a nonzero vector")
    fact = _cached_fact(3) if fact is None else fact
    if fact.q != 3:
        raise ValueError("the eigenvector closed form is specific to q = 3")
    if branch not in (0, 1):
        raise ValueError("branch must be 0 or 1")
    lam = branch_eigenvalues(mu, fact)[branch]
    l = fact.Linv
    u23 = fact.Uhat[1, 2]
    w = u23 / (1.0 + l[2, 2] * mu)
    l1 = -(w * l[2, 1] * mu + lam * (1.0 + l[1, 1] * mu))
    l2 = w * l[2, 0] * mu + lam * l[1, 0] * mu
    if l1 == 0.0:
        raise NumericalError("degenerate eigenvector system at this mu")
    alpha = l2 / l1
    beta = -mu / (1.0 + l[2, 2] * mu) * (l[2, 0] + l[2, 1] * alpha)
    return np.concatenate([v1.astype(complex), alpha * v1, beta * v1])


def _branch_magnitude(fact):
    def g(mu):
        vals = _kernels.branch_values_batch(np.array([mu]), fact.Linv, fact.Uhat)
        return float(np.abs(vals).max())
    return g


def _golden_max(g, lo, hi, iters=200):
    """Golden-section maximization of g on [lo, hi]; returns (x, g(x))."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        if b - a < 1e-14 * max(1.0, abs(a)):
            break
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + phi * (b - a)
            gd = g(d)
    x = 0.5 * (a + b)
    return x, g(x)


def radius_estimate(q, grid_spec=None):
    """Cluster radius sup_mu max_i |lambda_i(mu)| with its maximizer.

    The sup is approximated on a logarithmic mu-grid (grid_spec =
    (mu_min, mu_max, num_points), default 1e-8..1e8 with 2000 points) and
    then sharpened by golden-section search around the grid maximizer.
    """
    if q < 2:
        raise ValueError("the cluster radius is defined for q >= 2")
    mu_min, mu_max, num = grid_spec if grid_spec is not None else DEFAULT_MU_GRID
    if not (0.0 < mu_min <= mu_max) or num < 1:
        raise ValueError(f"invalid mu grid specification {grid_spec!r}")
    fact = _cached_fact(q)
    g = _branch_magnitude(fact)
    if mu_min == mu_max:
        return RadiusEstimate(q=q, radius=g(mu_min), mu_star=mu_min)
    mus = np.logspace(math.log10(mu_min), math.log10(mu_max), int(num))
    vals = np.abs(_kernels.branch_values_batch(mus, fact.Linv, fact.Uhat)).max(axis=1)
    i = int(np.argmax(vals))
    lo = mus[max(i - 1, 0)]
    hi = mus[min(i + 1, len(mus) - 1)]
    x, gx = _golden_max(lambda t: g(math.exp(t)), math.log(lo), math.log(hi))
    if gx >= vals[i]:
        return RadiusEstimate(q=q, radius=gx, mu_star=math.exp(x))
    return RadiusEstimate(q=q, radius=float(vals[i]), mu_star=float(mus[i]))


def preconditioned_spectrum(system, mode="structured"):
    """Full spectrum of P^-1 A as a SpectralReport.

    structured mode uses the reduction through the eigenvalues mu_j of
    tau M^-1 K: the spectrum is {1 (n times)} union {1 + lambda_i(mu_j)}.
    dense_oracle assembles P^-1 A densely (small problems only) and runs a
    general nonsymmetric eigensolver.
    """
    if mode not in SPECTRUM_MODES:
        raise ValueError(f"mode must be one of {SPECTRUM_MODES}, got {mode!r}")
    q, n = system.q, system.n
    h = system.grid.h if system.grid is not None else None
    if mode == "dense_oracle":
        A = dense_stage_matrix(system)
        P = dense_preconditioner_matrix(system)
        eigs = np.linalg.eigvals(np.linalg.solve(P, A))
        radius = float(np.abs(eigs - 1.0).max()) if eigs.size else 0.0
        return SpectralReport(q=q, n=n, tau=system.tau, h=h, mode=mode,
                              eigenvalues=eigs, radius=radius)
    mu = generalized_eigenvalues(system.M, system.K, system.tau)
    if q >= 2:
        branches = _kernels.branch_values_batch(mu, system.fact.Linv,
                                                system.fact.Uhat)
    else:
        branches = np.zeros((n, 0), dtype=np.complex128)
    eigenvalues = np.concatenate([np.ones(n, dtype=np.complex128),
                                  (1.0 + branches).ravel()])
    radius = float(np.abs(branches).max()) if branches.size else 0.0
    return SpectralReport(q=q, n=n, tau=system.tau, h=h, mode=mode,
                          eigenvalues=eigenvalues, mu=mu, branches=branches,
                          radius=radius)


def test1_counts(report, eps_list):
    """Count eigenvalues within each radius eps of 1.

    Returns a list of rows (eps, N, r) with N = #{ |lambda - 1| < eps } and
    r = N / (qn); the same table is stored on the report's counts field.
    """
    dev = np.abs(report.eigenvalues - 1.0)
    total = report.eigenvalues.size
    rows = []
    counts = {}
    for eps in eps_list:
        N = int(np.count_nonzero(dev < eps))
        r = N / total
        rows.append((float(eps), N, r))
        counts[float(eps)] = (N, r)
    report.counts = counts
    return rows


def test2_vectors(system):
    """Empirical vs symbol-predicted sorted eigenvalue magnitudes (E1, E2).

    E1 sorts |lambda| over the actual spectrum of P^-1 A (structured mode).
    E2 sorts the prediction that replaces the true eigenvalues mu_j of
    tau M^-1 K by samples of the ratio symbol on the matching uniform grid:
    n ones (the lambda = 1 copies) plus |1 + lambda_i(s(theta_j, theta_k))|
    over all branches.  Both vectors are ascending with length qn.
    """
    report = preconditioned_spectrum(system, mode="structured")
    E1 = np.sort(np.abs(report.eigenvalues))
    m = math.isqrt(system.n)
    if m * m != system.n:
        raise ValueError(
            "symbol-grid prediction requires a square spatial dimension")
    if system.grid is None:
        raise ValueError("test2_vectors requires a grid-backed system")
    samples = sample_symbol(ratio_symbol(system.tau, system.grid.h), m)
    if system.q >= 2:
        pred = _kernels.branch_values_batch(samples, system.fact.Linv,
                                            system.fact.Uhat)
        pred_mags = np.abs(1.0 + pred).ravel()
    else:
        pred_mags = np.empty(0)
    E2 = np.sort(np.concatenate([np.ones(system.n), pred_mags]))
    report.E1, report.E2 = E1, E2
    return E1, E2


def distribution_check(systems, rule, eps=0.05):
    """Check the limiting eigenvalue-distribution law on a refinement series.

    systems is a StageSystem or a coarse-to-fine sequence of them.  Under
    rule "matched" (tau^(2q-1) = h^2) the fraction of eigenvalues within eps
    of 1 must be monotone nondecreasing toward 1 across refinements; under
    rule "c_constant" (tau = C h^2) the maximal deviation between the sorted
    magnitudes E1 and their symbol prediction E2 must decrease.
    """
    if rule not in ("matched", "c_constant"):
        raise ValueError(f"rule must be 'matched' or 'c_constant', got {rule!r}")
    seq: Sequence = systems if isinstance(systems, (list, tuple)) else [systems]
    if not seq:
        raise ValueError("at least one system is required")
    rows: List[Tuple[float, float, float]] = []
    values: List[float] = []
    for system in seq:
        h = system.grid.h if system.grid is not None else float("nan")
        if rule == "matched":
            report = preconditioned_spectrum(system, mode="structured")
            test1_counts(report, [eps])
            value = report.counts[float(eps)][1]
        else:
            E1, E2 = test2_vectors(system)
            value = float(np.abs(E1 - E2).max())
        rows.append((h, system.tau, value))
        values.append(value)
    if rule == "matched":
        ok = all(b >= a for a, b in zip(values, values[1:]))
    else:
        ok = all(b < a for a, b in zip(values, values[1:]))
    return DistributionSummary(rule=rule, eps=float(eps), rows=tuple(rows),
                               values=tuple(values), satisfied=ok)
