import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fqsl.errors import ParameterError
from fqsl.lattice import Lattice, power
from fqsl.qcore import QContext, q_gamma, qpoch_real
from fqsl.qfrac import RightEdgePolicy
from fqsl.spectrum import (
    JacobiParams,
    eigen_residual,
    eigenpair,
    eigenvalue,
    eigenvalue_alt,
    gram_matrix,
    jacobi_coeffs,
    jacobi_fn,
    jacobi_norm,
    jacobi_weight,
    left_map_sides,
    little_q_jacobi,
    right_map_sides,
    spectral_coefficients,
    verify_caputo_map,
    verify_eigenpairs,
    verify_left_map,
    verify_right_deriv_map,
    verify_right_map,
)


def gq(x, q):
    return q_gamma(x, QContext(q))


@pytest.fixture(scope="module")
def lat48():
    return Lattice(1.0, 0.5, 48)


def brute_gram(n_max, alpha, beta, q, kmax=1500):
    """Float Jackson sum of x^alpha (qx;q)_beta p_i p_j over x = q^k."""
    ctx = QContext(q)
    k = np.arange(kmax)
    x = q**k
    w = x**alpha * np.array([qpoch_real(q * xx, beta, ctx) for xx in x])
    P = [little_q_jacobi(n, JacobiParams(alpha, beta), x, q) for n in range(n_max + 1)]
    return np.array([[(1 - q) * np.sum(x * w * pi * pj) for pj in P] for pi in P])


# -- polynomials ---------------------------------------------------------------
@pytest.mark.parametrize("q,alpha,beta", [(0.5, 0.6, 0.4), (0.3, -0.5, 0.2), (0.7, 1.5, 0.0)])
def test_degree_one_closed_form(q, alpha, beta):
    x = np.linspace(0, 1, 7)
    slope = (1 - q ** (alpha + beta + 2)) / (1 - q ** (alpha + 1))
    assert_allclose(little_q_jacobi(1, JacobiParams(alpha, beta), x, q), 1 - slope * x, atol=1e-15)


@pytest.mark.parametrize("n", range(6))
def test_polynomial_is_one_at_zero(n):
    assert little_q_jacobi(n, JacobiParams(0.3, 0.4), 0.0, 0.5) == 1.0
    assert len(jacobi_coeffs(n, 0.3, 0.4, 0.5)) == n + 1


def test_negative_degree_rejected():
    with pytest.raises(ParameterError):
        jacobi_coeffs(-1, 0.3, 0.4, 0.5)


def test_params_window():
    with pytest.raises(ParameterError):
        JacobiParams(-1.0, 0.0)
    with pytest.raises(ParameterError):
        JacobiParams(0.0, -1.5)
    with pytest.raises(ParameterError):
        JacobiParams(0.5, 0.0, mu=1.0)


def test_lattice_function_matches_float_evaluation(lat):
    f = jacobi_fn(lat, 4, 0.6, 0.4, shift=0.6, coef=2.0)
    x = lat.visible
    expected = 2.0 * x**0.6 * little_q_jacobi(4, JacobiParams(0.6, 0.4), x, 0.5)
    assert_allclose(f.values, expected, rtol=1e-12, atol=1e-14)


def test_weight_positive(lat):
    w = jacobi_weight(JacobiParams(0.6, 0.4), lat)
    assert np.all(w.all_values > 0)


def test_weight_needs_unit_interval():
    with pytest.raises(ParameterError):
        jacobi_weight(JacobiParams(0.6, 0.4), Lattice(2.0, 0.5))


# -- orthogonality -------------------------------------------------------------
@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("alpha,beta", [(0.6, 0.4), (-0.5, 0.3), (1.5, -0.5)])
def test_norms_positive(q, alpha, beta):
    assert all(jacobi_norm(n, JacobiParams(alpha, beta), q) > 0 for n in range(21))


def test_gram_against_float_oracle():
    params = JacobiParams(0.5, 0.0)
    G = gram_matrix(params, Lattice(1.0, 0.5), 6)
    ref = brute_gram(6, 0.5, 0.0, 0.5)
    C = np.array([jacobi_norm(n, params, 0.5) for n in range(7)])
    # the float oracle loses digits to cancellation in high-degree products
    assert_allclose(G / np.sqrt(np.outer(C, C)), ref / np.sqrt(np.outer(C, C)), atol=1e-9)
    assert_allclose(np.diag(ref), C, rtol=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_gram_is_diagonal_with_closed_form_norms(q):
    params = JacobiParams(0.6, 0.4)
    G = gram_matrix(params, Lattice(1.0, q), 6)
    C = np.array([jacobi_norm(n, params, q) for n in range(7)])
    off = np.abs(G - np.diag(np.diag(G))) / np.sqrt(np.outer(C, C))
    assert off.max() <= 1e-10
    assert_allclose(np.diag(G), C, rtol=1e-10)


# -- eigenvalues ---------------------------------------------------------------
def test_lowest_eigenvalue():
    q, mu, beta = 0.5, 0.6, 0.4
    expected = gq(mu + beta + 1, q) * gq(mu + 1, q) / gq(beta + 1, q)
    assert eigenvalue(0, mu, beta, q) == pytest.approx(expected, rel=1e-14)
    # the variant without the Gamma_q(mu + 1) factor
    assert eigenvalue_alt(0, mu, beta, q) == pytest.approx(gq(mu + beta + 1, q) / gq(beta + 1, q), rel=1e-14)


@pytest.mark.parametrize("n", range(4))
def test_alternative_eigenvalue_fails_the_equation(lat48, n):
    pair = eigenpair(n, 0.6, 0.4, lat48)
    good = eigen_residual(pair, 0.6, 0.4)
    pair.lam = pair.lam_alt
    bad = eigen_residual(pair, 0.6, 0.4)
    assert good < 1e-12 and bad > 1e-2


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("mu", [0.3, 0.6, 0.9])
@pytest.mark.parametrize("beta", [0.0, 0.4, 2.0])
def test_eigenvalues_positive_and_increasing(q, mu, beta):
    lams = [eigenvalue(n, mu, beta, q) for n in range(21)]
    assert lams[0] > 0
    assert np.all(np.diff(lams) > 0)


@pytest.mark.parametrize("q,mu,beta", [(0.5, 0.6, 0.4), (0.3, 0.25, 0.0), (0.7, 0.8, 1.2)])
def test_eigen_equation(q, mu, beta):
    lat = Lattice(1.0, q)
    for n in range(4):
        assert eigen_residual(eigenpair(n, mu, beta, lat), mu, beta) <= 1e-8


def test_spectral_coefficients(lat):
    p, w = spectral_coefficients(0.6, 0.4, lat)
    ctx = QContext(0.5)
    x = lat.visible
    assert_allclose(p.values, [qpoch_real(0.5 * xx, 1.0, ctx) for xx in x], rtol=1e-13)
    assert_allclose(w.values, x**-0.6 * np.array([qpoch_real(0.5 * xx, 0.4, ctx) for xx in x]), rtol=1e-13)


def test_verify_eigenpairs_grid(lat48):
    rep = verify_eigenpairs(5, 0.6, 0.4, lat48)
    assert rep.passed
    assert len(rep.rows) == 6
    for row in rep.rows:
        assert row.eq51_residual <= 1e-8
        assert row.bc0_residual == 0
        assert row.bc1_value_policyA == row.bc1_value_policyB == 0
        assert row.lam == pytest.approx(eigenvalue(row.n, 0.6, 0.4, 0.5), rel=1e-15)


def test_verify_eigenpairs_edge_value_reported(lat48):
    rep = verify_eigenpairs(1, 0.6, 0.4, lat48, RightEdgePolicy("user_value", 0.25))
    assert all(r.bc1_value_policyA == 0.25 for r in rep.rows)


def test_single_eigenpair_has_trivial_gram(lat48):
    rep = verify_eigenpairs(0, 0.6, 0.4, lat48)
    assert rep.rows[0].gram_offdiag_max == 0.0


# -- mapping rules -------------------------------------------------------------
GRID = [
    (verify_left_map, (3, 0.5, 0.4, 0.6)),
    (verify_left_map, (2, -0.5, 0.3, 0.4)),
    (verify_caputo_map, (2, 0.3, 0.4, 0.6)),
    (verify_caputo_map, (3, -0.6, 0.4, 0.6)),
    (verify_caputo_map, (0, -0.6, 0.4, 0.6)),
    (verify_right_map, (2, 0.8, 0.1, 0.5)),
    (verify_right_map, (3, 0.6, 0.4, 0.6)),
    (verify_right_deriv_map, (2, 0.8, 0.1, 0.5)),
    (verify_right_deriv_map, (3, 0.5, 0.4, 0.6)),
]


@pytest.mark.parametrize("fn,args", GRID)
def test_mapping_rules(lat, fn, args):
    assert fn(*args, lat) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(
    n=st.integers(0, 4),
    alpha=st.floats(-0.9, 1.5),
    beta=st.floats(-0.5, 1.0),
    mu=st.floats(0.05, 0.95),
)
def test_left_map_property(n, alpha, beta, mu):
    assert verify_left_map(n, alpha, beta, mu, Lattice(1.0, 0.5)) <= 1e-9


def test_degree_zero_reduces_to_power_rule(lat):
    lhs, rhs = left_map_sides(0, 0.5, 0.4, 0.6, lat)
    direct = power(lat, 1.1, gq(1.5, 0.5) / gq(2.1, 0.5))
    assert_allclose(rhs.values, direct.values, rtol=1e-14)
    assert_allclose(lhs.values, direct.values, rtol=1e-13)


def test_degree_zero_right_rule(lat):
    ctx = QContext(0.5)
    lhs, rhs = right_map_sides(0, 0.8, 0.1, 0.5, lat)
    x = lat.visible
    direct = gq(1.1, 0.5) / gq(1.6, 0.5) * np.array([qpoch_real(0.5 * xx, 0.6, ctx) for xx in x])
    assert_allclose(rhs.values, direct, rtol=1e-13)
    assert_allclose(lhs.values, direct, rtol=1e-12)


@pytest.mark.parametrize("args", [(2, 0.2, 0.1, 1.5), (2, 0.8, 0.1, -0.5), (2, -1.2, 0.1, 0.5)])
def test_right_map_window(lat, args):
    with pytest.raises(ParameterError):
        verify_right_map(*args, lat)


def test_caputo_map_window(lat):
    with pytest.raises(ParameterError):
        verify_caputo_map(2, -0.8, 0.4, 0.6, lat)


def test_small_order_probe(lat):
    assert verify_left_map(3, 0.5, 0.4, 1e-3, lat) <= 1e-6
