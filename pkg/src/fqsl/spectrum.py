"""Little q-Jacobi polynomials and the explicit discrete spectrum on [0, 1].

The problem

    D^mu_{1-} (qx; q)_(beta+mu) cD^mu_{0+} y = lam x^-mu (qx; q)_beta y

has eigenfunctions phi_n(x) = x^mu p_n(x; q^mu, q^beta | q) with

    lam_n = q^(-n mu) Gamma_q(mu+beta+n+1) Gamma_q(mu+n+1) / (Gamma_q(beta+n+1) Gamma_q(n+1)).

Polynomials are built from exact coefficients, so every lattice function
here carries an exact tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hp
from .errors import ParameterError
from .lattice import Lattice, LatticeFn, jackson_int_hp, power_series, qpoch_fn
from .qfrac import (
    ZERO_EXTENSION,
    RightEdgePolicy,
    caputo_left,
    check_derivative_order,
    dright_rl,
    ileft,
    iright,
)


@dataclass(frozen=True)
class JacobiParams:
    """Parameters of p_n(x; q^alpha, q^beta | q); ``mu`` is the fractional order when needed."""

    alpha: float
    beta: float
    mu: float | None = None

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ParameterError("little q-Jacobi parameters need alpha > -1 and beta > -1")
        if self.mu is not None:
            check_derivative_order(self.mu)


def _require_unit_interval(lattice: Lattice):
    if lattice.a != 1.0:
        raise ParameterError("the little q-Jacobi setting lives on the lattice with a = 1")


# -- polynomials -----------------------------------------------------------
def jacobi_coeffs(n: int, alpha: float, beta: float, q: float) -> list:
    """Monomial coefficients c_k (k = 0..n) of p_n(x; q^alpha, q^beta | q).

    p_n = 2phi1(q^-n, q^(alpha+beta+n+1); q^(alpha+1); q, q x). ``alpha`` and
    ``beta`` enter only through q-powers, so any real values are accepted.
    """
    if n < 0:
        raise ParameterError("polynomial degree must be >= 0")
    qa = hp.arb(q)
    A = qa ** hp.to_arb(-n)
    B = qa ** hp.to_arb(alpha + beta + n + 1)
    C = qa ** hp.to_arb(alpha + 1)
    coeffs = [hp.ONE]
    t = hp.ONE
    for k in range(n):
        qk = qa**k
        t = t * (1 - A * qk) * (1 - B * qk) / ((1 - qa * qk) * (1 - C * qk)) * qa
        coeffs.append(t)
    return coeffs


def little_q_jacobi(n: int, params: JacobiParams, x, q: float):
    """p_n(x; q^alpha, q^beta | q) evaluated at float x (scalar or array)."""
    coeffs = [float(c) for c in jacobi_coeffs(n, params.alpha, params.beta, q)]
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


def jacobi_fn(lattice: Lattice, n: int, alpha: float, beta: float, shift: float = 0.0, coef=1.0) -> LatticeFn:
    """coef * x^shift * p_n(x; q^alpha, q^beta | q) on the lattice, with exact tail."""
    c = hp.to_arb(coef)
    poly = power_series(lattice, [(c * ck, k) for k, ck in enumerate(jacobi_coeffs(n, alpha, beta, lattice.q))])
    if shift == 0:
        return poly
    # x^shift applied as a separate factor so the float exponent shift + k never rounds
    return poly * power_series(lattice, [(1, shift)])


def jacobi_weight(params: JacobiParams, lattice: Lattice) -> LatticeFn:
    """w(x) = x^alpha (qx; q)_beta."""
    _require_unit_interval(lattice)
    return qpoch_fn(lattice, params.beta) * power_series(lattice, [(1.0, params.alpha)])


def jacobi_norm_hp(n: int, alpha: float, beta: float, q: float):
    qa = hp.arb(q)
    a, b = hp.to_arb(alpha), hp.to_arb(beta)
    qab1 = qa ** (a + b + 1)
    out = qa ** ((a + 1) * n) * (1 - qa) * (1 - qab1) / (1 - qab1 * qa ** (2 * n))
    out = out * hp.qpoch_inf(qa, qa) * hp.qpoch_inf(qab1 * qa, qa)
    out = out / (hp.qpoch_inf(qa ** (a + 1), qa) * hp.qpoch_inf(qa ** (b + 1), qa))
    out = out * hp.qpoch_n(qa, n, qa) * hp.qpoch_n(qa ** (b + 1), n, qa)
    out = out / (hp.qpoch_n(qa ** (a + 1), n, qa) * hp.qpoch_n(qab1, n, qa))
    return out


def jacobi_norm(n: int, params: JacobiParams, q: float) -> float:
    """C_n = int_0^1 x^alpha (qx;q)_beta p_n(x)^2 d_q x in closed form."""
    return float(jacobi_norm_hp(n, params.alpha, params.beta, q))


def gram_matrix(params: JacobiParams, lattice: Lattice, n_max: int) -> np.ndarray:
    """Jackson-quadrature Gram matrix of p_0..p_nmax under the weight x^alpha (qx;q)_beta."""
    w = jacobi_weight(params, lattice)
    polys = [jacobi_fn(lattice, n, params.alpha, params.beta) for n in range(n_max + 1)]
    G = np.zeros((n_max + 1, n_max + 1))
    for i in range(n_max + 1):
        wi = w * polys[i]
        for j in range(i, n_max + 1):
            G[i, j] = G[j, i] = float(jackson_int_hp(wi * polys[j]))
    return G


# -- eigenpairs ------------------------------------------------------------
@dataclass
class EigenPair:
    n: int
    lam: float
    phi: LatticeFn
    lam_alt: float = field(default=math.nan)


def eigenvalue_hp(n: int, mu: float, beta: float, q: float):
    g = lambda x: hp.q_gamma(x, q)  # noqa: E731
    qa = hp.arb(q)
    return qa ** hp.to_arb(-n * mu) * g(mu + beta + n + 1) * g(mu + n + 1) / (g(beta + n + 1) * g(n + 1.0))


def eigenvalue(n: int, mu: float, beta: float, q: float) -> float:
    """lam_n = q^(-n mu) Gamma_q(mu+beta+n+1) Gamma_q(mu+n+1) / (Gamma_q(beta+n+1) Gamma_q(n+1))."""
    return float(eigenvalue_hp(n, mu, beta, q))


def eigenvalue_alt(n: int, mu: float, beta: float, q: float) -> float:
    """The same expression divided by Gamma_q(mu+1).

    This variant does not satisfy the eigen-equation; it is kept for comparison.
    """
    return float(eigenvalue_hp(n, mu, beta, q) / hp.q_gamma(mu + 1.0, q))


def eigenpair(n: int, mu: float, beta: float, lattice: Lattice) -> EigenPair:
    """(lam_n, phi_n) with phi_n(x) = x^mu p_n(x; q^mu, q^beta | q)."""
    mu = check_derivative_order(mu)
    JacobiParams(mu, beta)
    _require_unit_interval(lattice)
    q = lattice.q
    phi = jacobi_fn(lattice, n, mu, beta, shift=mu)
    return EigenPair(n, eigenvalue(n, mu, beta, q), phi, eigenvalue_alt(n, mu, beta, q))


def spectral_coefficients(mu: float, beta: float, lattice: Lattice) -> tuple[LatticeFn, LatticeFn]:
    """p(x) = (qx; q)_(beta+mu) and w(x) = x^-mu (qx; q)_beta on the lattice."""
    p = qpoch_fn(lattice, beta + mu)
    w = qpoch_fn(lattice, beta) * power_series(lattice, [(1.0, -mu)])
    return p, w


# -- two-route checks of the Jacobi mapping rules --------------------------------
def _rel_sup(lhs: LatticeFn, rhs: LatticeFn, start: int = 0) -> float:
    n = lhs.lattice.depth + 1
    a = hp.tofloat(lhs.data[start:n] - rhs.data[start:n])
    scale = np.max(np.abs(rhs.values[start:]))
    return float(np.max(np.abs(a)) / scale) if scale > 0 else float(np.max(np.abs(a)))


def _gq(x, q):
    return hp.q_gamma(float(x), q)


def left_map_sides(n, alpha, beta, mu, lattice):
    """I^mu_{0+}(x^alpha p_n(x; q^alpha, q^beta)) and its closed form."""
    q = lattice.q
    f = jacobi_fn(lattice, n, alpha, beta, shift=alpha)
    lhs = ileft(mu, f)
    c = _gq(alpha + 1, q) / _gq(mu + alpha + 1, q)
    rhs = jacobi_fn(lattice, n, alpha + mu, beta - mu, shift=alpha + mu, coef=c)
    return lhs, rhs


def verify_left_map(n: int, alpha: float, beta: float, mu: float, lattice: Lattice) -> float:
    """Relative sup residual of the left fractional integral of x^alpha p_n."""
    if not alpha > -1:
        raise ParameterError("needs alpha > -1")
    _require_unit_interval(lattice)
    return _rel_sup(*left_map_sides(n, alpha, beta, mu, lattice))


def caputo_map_sides(n, alpha, beta, mu, lattice):
    """cD^mu_{0+}(x^(alpha+mu) p_n(x; q^(alpha+mu), q^(beta-mu))) and its closed form."""
    q = lattice.q
    f = jacobi_fn(lattice, n, alpha + mu, beta - mu, shift=alpha + mu)
    lhs = caputo_left(mu, f)
    if abs(alpha + mu) < 1e-12:
        c = 1 / _gq(1 - mu, q)
        pn = jacobi_fn(lattice, n, alpha, beta, shift=-mu, coef=c)
        rhs = pn - power_series(lattice, [(c, -mu)])
    else:
        c = _gq(mu + alpha + 1, q) / _gq(alpha + 1, q)
        rhs = jacobi_fn(lattice, n, alpha, beta, shift=alpha, coef=c)
    return lhs, rhs


def verify_caputo_map(n: int, alpha: float, beta: float, mu: float, lattice: Lattice) -> float:
    """Relative sup residual of the Caputo mapping (both branches alpha > -mu and alpha = -mu)."""
    mu = check_derivative_order(mu)
    if alpha < -mu - 1e-12:
        raise ParameterError("needs alpha >= -mu")
    _require_unit_interval(lattice)
    lhs, rhs = caputo_map_sides(n, alpha, beta, mu, lattice)
    if abs(alpha + mu) < 1e-12 and n == 0:
        return float(np.max(np.abs(lhs.values)))
    return _rel_sup(lhs, rhs)


def _check_window(alpha, beta, mu):
    if not (alpha > -1 and beta > -1 and beta - 1 < mu < alpha + 1):
        raise ParameterError(
            f"needs alpha > -1, beta > -1 and beta - 1 < mu < alpha + 1 (got {alpha}, {beta}, {mu})"
        )


def _right_ratio(m, alpha, beta, mu, q):
    qa = hp.arb(q)
    num = _gq(beta + m + 1, q) * _gq(alpha - mu + 1 + m, q) * _gq(alpha + 1, q)
    den = _gq(mu + beta + m + 1, q) * _gq(alpha + m + 1, q) * _gq(alpha - mu + 1, q)
    return qa ** hp.to_arb(m * mu) * num / den


def right_map_sides(m, alpha, beta, mu, lattice):
    """I^mu_{1-}((qt;q)_beta p_m(t; q^alpha, q^beta)) and its closed form."""
    q = lattice.q
    f = qpoch_fn(lattice, beta) * jacobi_fn(lattice, m, alpha, beta)
    lhs = iright(mu, f)
    rhs = qpoch_fn(lattice, beta + mu) * jacobi_fn(
        lattice, m, alpha - mu, beta + mu, coef=_right_ratio(m, alpha, beta, mu, q)
    )
    return lhs, rhs


def verify_right_map(m: int, alpha: float, beta: float, mu: float, lattice: Lattice) -> float:
    _check_window(alpha, beta, mu)
    _require_unit_interval(lattice)
    return _rel_sup(*right_map_sides(m, alpha, beta, mu, lattice))


def right_deriv_map_sides(m, alpha, beta, mu, lattice, edge=ZERO_EXTENSION):
    """D^mu_{1-}((qt;q)_(beta+mu) p_m(t; q^(alpha-mu), q^(beta+mu))) and its closed form."""
    q = lattice.q
    f = qpoch_fn(lattice, beta + mu) * jacobi_fn(lattice, m, alpha - mu, beta + mu)
    lhs = dright_rl(mu, f, edge)
    rhs = qpoch_fn(lattice, beta) * jacobi_fn(
        lattice, m, alpha, beta, coef=1 / _right_ratio(m, alpha, beta, mu, q)
    )
    return lhs, rhs


def verify_right_deriv_map(
    m: int, alpha: float, beta: float, mu: float, lattice: Lattice, edge: RightEdgePolicy = ZERO_EXTENSION
) -> float:
    """Relative residual at the points below x = 1 (x = 1 itself depends on the edge policy)."""
    mu = check_derivative_order(mu)
    _check_window(alpha, beta, mu)
    _require_unit_interval(lattice)
    return _rel_sup(*right_deriv_map_sides(m, alpha, beta, mu, lattice, edge), start=1)


# -- full eigenproblem check -----------------------------------------------
EQ_TOL = 1e-8
BC0_TOL = 1e-12
GRAM_TOL = 1e-10


@dataclass
class SpectrumRow:
    n: int
    lam: float
    eq51_residual: float
    bc0_residual: float
    bc1_value_policyA: float
    bc1_value_policyB: float
    gram_offdiag_max: float
    gram_diag_rel: float
    lam_alt: float

    def passed(self) -> bool:
        return (
            self.eq51_residual <= EQ_TOL
            and self.bc0_residual <= BC0_TOL
            and self.gram_offdiag_max <= GRAM_TOL
            and self.gram_diag_rel <= GRAM_TOL
        )


@dataclass
class SpectrumReport:
    q: float
    mu: float
    beta: float
    depth: int
    edge: str
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed() for r in self.rows)


def eigen_residual(pair: EigenPair, mu: float, beta: float, edge: RightEdgePolicy = ZERO_EXTENSION) -> float:
    """sup over x = q^j, j = 1..N, of |L phi - lam w phi| / sup |lam w phi|."""
    lat = pair.phi.lattice
    p, w = spectral_coefficients(mu, beta, lat)
    lhs = dright_rl(mu, p * caputo_left(mu, pair.phi), edge)
    rhs = w * pair.phi * pair.lam
    return _rel_sup(lhs, rhs, start=1)


def verify_eigenpairs(
    n_max: int, mu: float, beta: float, lattice: Lattice, edge: RightEdgePolicy = ZERO_EXTENSION
) -> SpectrumReport:
    """Eigen-equation, boundary conditions and orthogonality for n = 0..n_max.

    bc1_value_policyA uses the flux weight (q^(beta+1) x; q)_mu, policyB the
    coefficient (qx; q)_(beta+mu); both are evaluated at the off-lattice
    point 1/q and therefore equal the edge policy's value.
    """
    mu = check_derivative_order(mu)
    JacobiParams(mu, beta)
    _require_unit_interval(lattice)
    q = lattice.q
    pairs = [eigenpair(n, mu, beta, lattice) for n in range(n_max + 1)]
    _, w = spectral_coefficients(mu, beta, lattice)
    norms = [float(jacobi_norm_hp(n, mu, beta, q)) for n in range(n_max + 1)]
    G = np.zeros((n_max + 1, n_max + 1))
    for i in range(n_max + 1):
        wi = w * pairs[i].phi
        for j in range(i, n_max + 1):
            G[i, j] = G[j, i] = float(jackson_int_hp(wi * pairs[j].phi))
    rows = []
    edge_val = edge.edge_value()
    for n, pair in enumerate(pairs):
        off = [abs(G[n, m]) / math.sqrt(norms[n] * norms[m]) for m in range(n_max + 1) if m != n]
        rows.append(
            SpectrumRow(
                n=n,
                lam=pair.lam,
                eq51_residual=eigen_residual(pair, mu, beta, edge),
                bc0_residual=abs(pair.phi.zero_limit),
                bc1_value_policyA=edge_val,
                bc1_value_policyB=edge_val,
                gram_offdiag_max=float(max(off)) if off else 0.0,
                gram_diag_rel=float(abs(G[n, n] - norms[n]) / norms[n]),
                lam_alt=pair.lam_alt,
            )
        )
    return SpectrumReport(q, mu, beta, lattice.depth, edge.mode, rows)

