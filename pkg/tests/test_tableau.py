"""Collocation tableau construction: nodes, coefficients, order conditions."""

import math

import numpy as np
import pytest
import sympy

import radaukron as rk
from radaukron.tableau import MAX_STAGES, _node_polynomial_coeffs

from _oracles import radau_nodes_oracle, vandermonde_tableau_oracle

SQRT6 = math.sqrt(6.0)

# Closed-form coefficient tables for the two- and three-stage methods.
C2 = np.array([1.0 / 3.0, 1.0])
A2 = np.array([[5.0 / 12.0, -1.0 / 12.0],
               [3.0 / 4.0, 1.0 / 4.0]])
B2 = np.array([3.0 / 4.0, 1.0 / 4.0])

C3 = np.array([2.0 / 5.0 - SQRT6 / 10.0, 2.0 / 5.0 + SQRT6 / 10.0, 1.0])
A3 = np.array([
    [11.0 / 45.0 - 7.0 * SQRT6 / 360.0,
     37.0 / 225.0 - 169.0 * SQRT6 / 1800.0,
     -2.0 / 225.0 + SQRT6 / 75.0],
    [37.0 / 225.0 + 169.0 * SQRT6 / 1800.0,
     11.0 / 45.0 + 7.0 * SQRT6 / 360.0,
     -2.0 / 225.0 - SQRT6 / 75.0],
    [4.0 / 9.0 - SQRT6 / 36.0, 4.0 / 9.0 + SQRT6 / 36.0, 1.0 / 9.0],
])
B3 = np.array([4.0 / 9.0 - SQRT6 / 36.0, 4.0 / 9.0 + SQRT6 / 36.0, 1.0 / 9.0])


def test_single_stage_is_implicit_euler():
    tab = rk.radau_tableau(1)
    np.testing.assert_array_equal(tab.c, [1.0])
    np.testing.assert_allclose(tab.A, [[1.0]], rtol=0, atol=1e-15)
    np.testing.assert_allclose(tab.b, [1.0], rtol=0, atol=1e-15)


def test_two_stage_closed_form():
    tab = rk.radau_tableau(2)
    np.testing.assert_allclose(tab.c, C2, rtol=0, atol=1e-14)
    np.testing.assert_allclose(tab.A, A2, rtol=0, atol=1e-14)
    np.testing.assert_allclose(tab.b, B2, rtol=0, atol=1e-14)


def test_three_stage_closed_form():
    tab = rk.radau_tableau(3)
    np.testing.assert_allclose(tab.c, C3, rtol=0, atol=1e-14)
    np.testing.assert_allclose(tab.A, A3, rtol=0, atol=1e-14)
    np.testing.assert_allclose(tab.b, B3, rtol=0, atol=1e-14)


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_node_polynomial_coefficients_match_symbolic_derivative(q):
    t = sympy.Symbol("t")
    poly = sympy.Poly(sympy.diff(t ** (q - 1) * (t - 1) ** q, t, q - 1), t)
    expected = [int(v) for v in reversed(poly.all_coeffs())]
    assert _node_polynomial_coeffs(q) == expected


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_nodes_match_orthogonal_polynomial_oracle(q):
    nodes = rk.radau_nodes(q)
    oracle = radau_nodes_oracle(q)
    np.testing.assert_allclose(nodes, oracle, rtol=0, atol=5e-13)
    assert nodes[-1] == 1.0
    assert np.all(nodes > 0.0)
    assert np.all(np.diff(nodes) > 0.0)


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_coefficients_match_vandermonde_oracle(q):
    tab = rk.radau_tableau(q)
    A_or, b_or = vandermonde_tableau_oracle(tab.c)
    tol = 1e-10 if q >= 9 else 1e-12
    np.testing.assert_allclose(tab.A, A_or, rtol=0, atol=tol)
    np.testing.assert_allclose(tab.b, b_or, rtol=0, atol=tol)


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_stiff_accuracy_and_node_range(q):
    tab = rk.radau_tableau(q)
    assert tab.c[-1] == 1.0
    np.testing.assert_allclose(tab.A[-1, :], tab.b, rtol=0, atol=1e-14)


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_quadrature_conditions_direct(q):
    tab = rk.radau_tableau(q)
    tol = 1e-8 if q >= 8 else 1e-10
    for k in range(1, 2 * q):
        residual = abs(tab.b @ tab.c ** (k - 1) - 1.0 / k)
        assert residual < tol, f"quadrature condition k={k} residual {residual}"


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_collocation_conditions_direct(q):
    tab = rk.radau_tableau(q)
    tol = 1e-8 if q >= 8 else 1e-10
    for k in range(1, q + 1):
        residual = np.abs(tab.A @ tab.c ** (k - 1) - tab.c ** k / k).max()
        assert residual < tol, f"collocation condition k={k} residual {residual}"


@pytest.mark.parametrize("q", range(1, MAX_STAGES + 1))
def test_order_condition_report_consistent(q):
    tab = rk.radau_tableau(q)
    report = rk.verify_order_conditions(tab)
    assert report.q == q
    quad = max(abs(tab.b @ tab.c ** (k - 1) - 1.0 / k) for k in range(1, 2 * q))
    coll = max(np.abs(tab.A @ tab.c ** (k - 1) - tab.c ** k / k).max()
               for k in range(1, q + 1))
    stiff = np.abs(tab.A[-1, :] - tab.b).max()
    assert report.quadrature == pytest.approx(quad, rel=0, abs=1e-16)
    assert report.collocation == pytest.approx(coll, rel=0, abs=1e-16)
    assert report.stiff_accuracy == pytest.approx(stiff, rel=0, abs=1e-16)
    assert report.max_residual == max(quad, coll, stiff)


def test_weights_are_positive_and_sum_to_one():
    for q in range(1, MAX_STAGES + 1):
        tab = rk.radau_tableau(q)
        assert np.all(tab.b > 0.0)
        tol = 1e-8 if q >= 8 else 1e-10   # the k=1 quadrature tolerance
        assert tab.b.sum() == pytest.approx(1.0, rel=0, abs=tol)


@pytest.mark.parametrize("bad", [0, -1, MAX_STAGES + 1, 2.5, "3"])
def test_invalid_stage_count_rejected(bad):
    with pytest.raises(ValueError):
        rk.radau_tableau(bad)
    with pytest.raises(ValueError):
        rk.radau_nodes(bad)
