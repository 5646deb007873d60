import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fqsl.errors import ParameterError
from fqsl.lattice import (
    Lattice,
    constant,
    jackson_int,
    l2_norm,
    power,
    power_series,
    qpoch_fn,
    sup_norm,
)
from fqsl.qcore import QContext, q_gamma, qpoch_real
from fqsl.qfrac import (
    RightEdgePolicy,
    bound_constants,
    c_alpha,
    caputo_left,
    caputo_right,
    dleft_rl,
    dright_rl,
    frac_ibp_residuals,
    gamma_alpha,
    ileft,
    iright,
    kernel_weights,
    right_edge_value,
    right_l2_constant,
)
from fqsl.verify import random_fn, sup_diff


def gq(x, q=0.5):
    return q_gamma(x, QContext(q))


def brute_ileft(alpha, f, x, q, kmax=400):
    """Jackson sum of x^(alpha-1)/Gamma_q(alpha) int_0^x (qt/x;q)_(alpha-1) f(t) d_q t."""
    ctx = QContext(q)
    k = np.arange(kmax)
    t = x * q**k
    kern = np.array([qpoch_real(q ** (kk + 1), alpha - 1, ctx) for kk in k])
    return x ** (alpha - 1) / gq(alpha, q) * x * (1 - q) * np.sum(q**k * kern * f(t))


def brute_iright(alpha, f, m, a, q):
    """Jackson sum of 1/Gamma_q(alpha) int_{qx}^a t^(alpha-1) (qx/t;q)_(alpha-1) f(t) d_q t at x = a q^m."""
    ctx = QContext(q)
    j = np.arange(m + 1)
    t = a * q**j
    kern = np.array([qpoch_real(q ** (m + 1 - jj), alpha - 1, ctx) for jj in j])
    return (1 - q) * np.sum(t * t ** (alpha - 1) * kern * f(t)) / gq(alpha, q)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9, 1.7])
def test_ileft_matches_definition_and_power_rule(q, alpha):
    lat = Lattice(1.0, q)
    mu = 0.3
    out = ileft(alpha, power(lat, mu))
    rule = gq(mu + 1, q) / gq(mu + alpha + 1, q) * lat.visible ** (mu + alpha)
    assert_allclose(out.values, rule, rtol=1e-13)
    for m in (0, 3, 10):
        x = lat.visible[m]
        assert_allclose(out.values[m], brute_ileft(alpha, lambda t: t**mu, x, q), rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 1.4])
def test_iright_matches_definition(alpha, rng):
    lat = Lattice(2.0, 0.5)
    f = lambda t: np.cos(3 * t) + t**2  # noqa: E731
    fn = power_series(lat, []) + 0.0
    from fqsl.lattice import sample

    fn = sample(f, lat)
    out = iright(alpha, fn)
    for m in (0, 1, 5, 20):
        assert_allclose(out.values[m], brute_iright(alpha, f, m, lat.a, lat.q), rtol=1e-12)


def test_iright_two_sum_forms_agree():
    # first and second discrete forms of the right integral
    q, a, alpha, m = 0.5, 1.0, 0.4, 6
    ctx = QContext(q)
    fv = np.cos(np.arange(m + 1))
    j = np.arange(m + 1)
    w = np.array([qpoch_real(q**alpha, m - jj, ctx) / qpoch_real(q, m - jj, ctx) for jj in j])
    first = a**alpha * (1 - q) ** alpha * np.sum(q ** (j * alpha) * w * fv)
    ratio = np.array([qpoch_real(q**-m, jj, ctx) / qpoch_real(q ** (1 - m - alpha), jj, ctx) for jj in j])
    second = a**alpha * (1 - q) ** alpha * qpoch_real(q**alpha, m, ctx) / qpoch_real(q, m, ctx)
    second *= np.sum(q**j * ratio * fv)
    assert_allclose(first, second, rtol=1e-12)


def test_order_zero_is_identity(lat, rand):
    f = rand()
    assert_allclose(ileft(0.0, f).values, f.values)
    assert_allclose(iright(0.0, f).values, f.values)


def test_iright_of_one(lat):
    for alpha in (0.3, 0.7):
        out = iright(alpha, constant(lat, 1.0))
        want = qpoch_fn(lat, alpha) * (lat.a**alpha / gq(alpha + 1))
        assert sup_diff(out, want) < 1e-14


@pytest.mark.parametrize("b", [1.0, 2.5])
@pytest.mark.parametrize("alpha,mu", [(0.3, 0.4), (0.7, 1.2), (0.5, -0.4)])
def test_iright_qpochhammer_rule(b, alpha, mu):
    lat = Lattice(b, 0.5)
    q = lat.q
    f = qpoch_fn(lat, mu, scale=1 / b) * b**mu
    want = qpoch_fn(lat, mu + alpha, scale=1 / b) * (gq(mu + 1, q) / gq(mu + alpha + 1, q) * b ** (alpha + mu))
    assert sup_diff(iright(alpha, f), want) < 1e-13


def test_kernel_weights_positive():
    for alpha in (0.1, 0.5, 0.9, 1.5):
        w = kernel_weights(0.5, alpha, 50)
        assert np.all(w > 0)


def test_order_validation(lat):
    f = constant(lat, 1.0)
    with pytest.raises(ParameterError):
        ileft(-0.1, f)
    for op in (dleft_rl, caputo_left):
        for alpha in (0.0, 1.0, 1.5):
            with pytest.raises(ParameterError):
                op(alpha, f)
    with pytest.raises(ParameterError):
        dright_rl(1.0, f)
    with pytest.raises(ParameterError):
        RightEdgePolicy("mirror")
    with pytest.raises(ParameterError):
        RightEdgePolicy("user_value")


def test_dleft_power_rule(lat):
    for alpha, mu in ((0.3, 0.6), (0.7, 2.0), (0.5, 0.0)):
        out = dleft_rl(alpha, power(lat, mu))
        want = gq(mu + 1) / gq(mu - alpha + 1) * lat.visible ** (mu - alpha)
        assert_allclose(out.values, want, rtol=1e-12)


def test_caputo_of_constant(lat):
    assert_allclose(caputo_left(0.4, constant(lat, 2.0)).values, 0.0)
    assert_allclose(caputo_right(0.4, constant(lat, 2.0), RightEdgePolicy("user_value", 2.0)).values, 0.0, atol=1e-15)
    # zero extension puts a jump of size c at a; the result is that jump times the right kernel
    kern = qpoch_fn(lat, -0.4) * (2.0 / gq(0.6))
    assert sup_diff(caputo_right(0.4, constant(lat, 2.0)), kern) < 1e-14


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_inversions(alpha, lat, rand):
    f = rand()
    assert sup_diff(dleft_rl(alpha, ileft(alpha, f)), f) < 1e-12
    assert sup_diff(dright_rl(alpha, iright(alpha, f)), f) < 1e-12
    assert sup_diff(caputo_left(alpha, ileft(alpha, f)), f) < 1e-12
    assert sup_diff(ileft(alpha, caputo_left(alpha, f)), f - f.zero_limit) < 1e-12
    assert sup_diff(caputo_left(alpha, f), dleft_rl(alpha, f - f.zero_limit)) < 1e-12


def test_right_inversion_near_integer_order(lat, rand):
    eps = 1e-3
    f = rand()
    assert sup_diff(dright_rl(1 - eps, iright(1 - eps, f)), f) < 1e-8


def test_edge_policy_corrections(lat, rand):
    alpha, e = 0.6, 0.8
    f = rand()
    user = RightEdgePolicy("user_value", e)
    kern = qpoch_fn(lat, -alpha) * (1 / gq(1 - alpha))
    assert sup_diff(caputo_right(alpha, iright(alpha, f), user), f - kern * e) < 1e-12
    kern = qpoch_fn(lat, alpha - 1) * (1 / gq(alpha))
    assert sup_diff(iright(alpha, dright_rl(alpha, f, user)), f - kern * e) < 1e-12
    assert right_edge_value(alpha, f) == 0.0
    assert right_edge_value(alpha, f, user) == e


@given(st.sampled_from([0.2, 0.3, 0.45, 0.7]), st.sampled_from([0.2, 0.3, 0.45, 0.7]), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_semigroup(a, b, seed):
    lat = Lattice(1.0, 0.5)
    f = random_fn(lat, np.random.default_rng(seed))
    assert sup_diff(ileft(a, ileft(b, f)), ileft(a + b, f)) < 1e-10
    assert sup_diff(iright(a, iright(b, f)), iright(a + b, f)) < 1e-12


def test_ibp_of_ones(lat):
    one = constant(lat, 1.0)
    r = frac_ibp_residuals(0.4, one, one)
    assert r.integral < 1e-15
    assert_allclose(jackson_int(ileft(0.4, one)), jackson_int(iright(0.4, one)), rtol=1e-14)


def test_ibp_random_polynomials(lat, rng):
    for _ in range(5):
        f = power_series(lat, [(c, k) for k, c in enumerate(rng.normal(size=4))])
        g = power_series(lat, [(c, k) for k, c in enumerate(rng.normal(size=4))])
        r = frac_ibp_residuals(0.6, f, g)
        assert max(r.integral, r.rl, r.caputo) < 1e-10


def test_ibp_with_user_edge(lat, rand):
    r = frac_ibp_residuals(0.35, rand(), rand(), RightEdgePolicy("user_value", -1.3))
    assert max(r.integral, r.rl, r.caputo) < 1e-10


def test_bound_constants_closed_forms():
    lat = Lattice(2.0, 0.5)
    q, a = 0.5, 2.0
    for alpha in (0.3, 0.7):
        bc = bound_constants(alpha, lat)
        qq = np.prod(1 - q ** np.arange(1, 80))
        assert_allclose(bc.M_alpha1, a**alpha * (1 - q) ** alpha / ((1 - q**alpha) * qq), rtol=1e-14)
        assert_allclose(bc.K_alpha, math.sqrt(a) * bc.M_alpha2, rtol=1e-15)
    assert bound_constants(0.3, lat).c_alpha is None
    with pytest.raises(ParameterError):
        c_alpha(0.3, 0.5)
    with pytest.raises(ParameterError):
        gamma_alpha(0.7, 0.5)
    with pytest.raises(ParameterError):
        right_l2_constant(0.5, lat)


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_left_sup_bound(alpha, lat, rng):
    c = lat.a**alpha / gq(alpha + 1)
    for _ in range(100):
        f = random_fn(lat, rng)
        assert sup_norm(ileft(alpha, f)) <= c * sup_norm(f) * (1 + 1e-12)


def test_left_l2_bound(lat, rng):
    bc = bound_constants(0.6, lat)
    for _ in range(50):
        f = random_fn(lat, rng)
        assert l2_norm(ileft(0.6, f)) <= bc.M_alpha2 * l2_norm(f)
