"""Radau IIA collocation tableaux.

The q-stage method collocates at the roots in (0, 1] of the (q-1)-th
derivative of t^(q-1) (t-1)^q, which places the last abscissa exactly at 1.
Coefficients come from exact antiderivatives of the Lagrange basis, so no
numerical quadrature is involved; the resulting method has quadrature order
2q-1, is stiffly accurate (last row of A equals b) and L-stable.
"""

import math
from dataclasses import dataclass

import numpy as np

MAX_STAGES = 10


@dataclass(frozen=True)
class ButcherTableau:
    """Runge-Kutta coefficients (A, b, c) for a q-stage method."""

    q: int
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class OrderConditionReport:
    """Residuals of the defining algebraic conditions of a tableau."""

    q: int
    quadrature: float      # max_k |sum_j b_j c_j^(k-1) - 1/k|, k = 1..2q-1
    collocation: float     # max_{i,k} |sum_j a_ij c_j^(k-1) - c_i^k / k|, k = 1..q
    stiff_accuracy: float  # max_j |A[q-1, j] - b_j|

    @property
    def max_residual(self):
        return max(self.quadrature, self.collocation, self.stiff_accuracy)


def _check_stages(q):
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= MAX_STAGES:
        raise ValueError(f"stage count must be an integer in 1..{MAX_STAGES}, got {q!r}")


def _node_polynomial_coeffs(q):
    """Integer coefficients (ascending) of d^(q-1)/dt^(q-1) [t^(q-1) (t-1)^q]."""
    # t^(q-1) (t-1)^q = sum_k C(q,k) (-1)^(q-k) t^(q-1+k); differentiating
    # q-1 times turns t^(q-1+k) into ((q-1+k)! / k!) t^k.
    coeffs = []
    for k in range(q + 1):
        c = math.comb(q, k) * (-1) ** (q - k)
        c *= math.factorial(q - 1 + k) // math.factorial(k)
        coeffs.append(c)
    return coeffs


def _polish_roots(coeffs, roots):
    """Newton-polish roots of an integer-coefficient polynomial.

    Evaluation uses extended precision when the platform provides it
    (np.longdouble), which keeps the q = 10 nodes accurate to ~1e-18.
    """
    cs = [np.longdouble(c) for c in coeffs[::-1]]      # descending
    dcs = [np.longdouble(k * c) for k, c in zip(range(len(coeffs) - 1, 0, -1), cs[:-1])]

    def horner(cl, x):
        acc = np.longdouble(0.0)
        for c in cl:
            acc = acc * x + c
        return acc

    polished = []
    for r in roots:
        x = np.longdouble(r)
        for _ in range(60):
            fp = horner(dcs, x)
            if fp == 0.0:
                break
            step = horner(cs, x) / fp
            x -= step
            if abs(step) <= np.longdouble(1e-22) * max(abs(x), np.longdouble(1.0)):
                break
        polished.append(float(x))
    return polished


def radau_nodes(q):
    """Collocation abscissae, sorted ascending, all in (0, 1] with c[-1] == 1."""
    _check_stages(q)
    coeffs = _node_polynomial_coeffs(q)
    raw = np.polynomial.Polynomial([float(c) for c in coeffs]).roots()
    nodes = sorted(_polish_roots(coeffs, np.real(raw)))
    nodes[-1] = 1.0   # t = 1 is an exact root of the node polynomial
    return np.array(nodes)


def radau_tableau(q):
    """Build the q-stage tableau by integrating the Lagrange basis exactly."""
    c = radau_nodes(q)
    A = np.zeros((q, q))
    b = np.zeros(q)
    for j in range(q):
        basis = np.poly1d([1.0])
        for r in range(q):
            if r != j:
                basis *= np.poly1d([1.0, -c[r]]) / (c[j] - c[r])
        antideriv = np.polyint(basis)
        A[:, j] = antideriv(c)
        b[j] = antideriv(1.0)
    return ButcherTableau(q=q, A=A, b=b, c=c)


def verify_order_conditions(tab):
    """Residuals of quadrature, collocation and stiff-accuracy conditions."""
    q, A, b, c = tab.q, tab.A, tab.b, tab.c
    quad = max(abs(b @ c ** (k - 1) - 1.0 / k) for k in range(1, 2 * q))
    coll = 0.0
    for k in range(1, q + 1):
        res = A @ c ** (k - 1) - c**k / k
        coll = max(coll, float(np.abs(res).max()))
    stiff = float(np.abs(A[-1] - b).max())
    return OrderConditionReport(q=q, quadrature=float(quad),
                                collocation=coll, stiff_accuracy=stiff)
