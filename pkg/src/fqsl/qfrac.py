"""Riemann-Liouville and Caputo fractional q-operators on a lattice.

Left operators are anchored at 0, right operators at the lattice endpoint a.
On the lattice both integrals reduce to weighted sums with the positive
weights ``w_k = (q^alpha; q)_k / (q; q)_k``:

    I_left^alpha f(x_m)  = x_m^alpha (1-q)^alpha sum_{k>=0} q^k w_k f(x_{m+k})
    I_right^alpha f(x_m) = a^alpha (1-q)^alpha sum_{j<=m} q^(j alpha) w_{m-j} f(x_j)

The right-sided derivatives need one value off the lattice, at a/q; it comes
from a :class:`RightEdgePolicy`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hp
from .errors import NonDecayingSummandError, ParameterError
from .lattice import LatticeFn, d_q, d_qinv, jackson_int_hp
from .qcore import QContext, q_gamma, qpoch_inf

_EXP_TOL = 1e-12
_WEIGHT_CAP = 400_000


@dataclass(frozen=True)
class RightEdgePolicy:
    """Value used for right-sided quantities at the off-lattice point a/q."""

    mode: str = "zero_extension"
    value: float | None = None

    def __post_init__(self):
        if self.mode not in ("zero_extension", "user_value"):
            raise ParameterError(f"unknown edge policy {self.mode!r}")
        if self.mode == "user_value" and (self.value is None or not math.isfinite(self.value)):
            raise ParameterError("user_value policy needs a finite value")

    def edge_value(self) -> float:
        return 0.0 if self.mode == "zero_extension" else float(self.value)


ZERO_EXTENSION = RightEdgePolicy()


def check_integral_order(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise ParameterError(f"integral order must be >= 0, got {alpha!r}")
    return alpha


def check_derivative_order(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"derivative order must lie in (0, 1), got {alpha!r}")
    return alpha


def kernel_weights(q: float, alpha: float, n: int) -> np.ndarray:
    """w_k = (q^alpha; q)_k / (q; q)_k for k = 0..n-1 (float view)."""
    return hp.tofloat(hp.kernel_weights(float(q), float(alpha), int(n)))


def _left_tail_sums(q: float, alpha: float, e: float, starts: np.ndarray) -> list:
    """T[K] = sum_{k>=K} q^(k(1+e)) w_k for each K in ``starts``."""
    rate = q ** (1.0 + e)
    kmax = int(starts.max())
    extra = math.ceil((hp.PREC + 16) * math.log(2) / -math.log(rate)) + 2
    n = kmax + extra
    if n > _WEIGHT_CAP:
        raise NonDecayingSummandError(
            f"left fractional sum of x^{e:g} decays too slowly (needs {n} terms)"
        )
    w = hp.kernel_weights(q, alpha, n)
    r = hp.arb(q) ** hp.to_arb(1.0 + e)
    rev = [hp.ZERO] * (n + 1)
    acc = hp.ZERO
    rk = r**n
    rinv = 1 / r
    for k in range(n - 1, -1, -1):
        rk = rk * rinv
        acc = acc + rk * w[k]
        rev[k] = acc
    return [rev[int(k)] for k in starts]


def _qgamma_ratio(q: float, e: float, alpha: float):
    return hp.q_gamma(e + 1.0, q) / hp.q_gamma(e + alpha + 1.0, q)


def ileft(alpha: float, f: LatticeFn) -> LatticeFn:
    """Left Riemann-Liouville q-integral I^alpha_{0+} f."""
    alpha = check_integral_order(alpha)
    if alpha == 0.0:
        return f
    lat = f.lattice
    q, size, last = lat.q, lat.size, lat.last
    for c, e in f.tail:
        if e <= -1.0 + _EXP_TOL:
            raise NonDecayingSummandError(
                f"summands q^k f(x q^k) do not decay: f behaves like x^{e:g} at 0"
            )
    qa = hp.arb(q)
    w = hp.kernel_weights(q, alpha, size)
    kern = np.array([qa**k * w[k] for k in range(size)], dtype=object)
    # body[m] = sum_k kern[k] data[m+k] = coefficient M-m of kern * reversed(data)
    conv = hp.convolve(kern, f.data[::-1], size)
    body = conv[::-1].copy()
    x = lat.x_hp
    out = body
    starts = last - np.arange(size) + 1
    for c, e in f.tail:
        t = _left_tail_sums(q, alpha, e, starts)
        ee = hp.to_arb(e)
        out = out + np.array([c * x[m] ** ee * t[m] for m in range(size)], dtype=object)
    al = hp.to_arb(alpha)
    pref = np.array([(xm * (1 - qa)) ** al for xm in x], dtype=object)
    tail = [(c * _qgamma_ratio(q, e, alpha), e + alpha) for c, e in f.tail]
    return LatticeFn(lat, pref * out, tail)


def _kappa(q: float, alpha: float, e: float):
    """Coefficient of x^(e+alpha) in I_right^alpha of x^e near 0."""
    qa = hp.arb(q)
    num = hp.qpoch_inf(qa ** hp.to_arb(-e), qa)
    den = hp.qpoch_inf(qa ** hp.to_arb(-alpha - e), qa)
    return (1 - qa) ** hp.to_arb(alpha) * num / den


def iright(alpha: float, f: LatticeFn) -> LatticeFn:
    """Right Riemann-Liouville q-integral I^alpha_{a-} f (exact finite sums).

    The value at the off-lattice point a/q is not part of the result; see
    :class:`RightEdgePolicy`.
    """
    alpha = check_integral_order(alpha)
    if alpha == 0.0:
        return f
    lat = f.lattice
    q, a, size = lat.q, lat.a, lat.size
    qa, aa, al = hp.arb(q), hp.arb(a), hp.to_arb(alpha)
    w = np.array(hp.kernel_weights(q, alpha, size), dtype=object)
    qal = qa**al
    g = np.empty(size, dtype=object)
    p = hp.ONE
    for j in range(size):
        g[j] = p * f.data[j]
        p = p * qal
    body = hp.convolve(g, w, size)
    scale = (aa * (1 - qa)) ** al
    data = scale * body
    # below the stored lattice: power terms plus a constant limit
    w_inf = hp.weights_inf(q, alpha)
    const = hp.hsum(g) * w_inf
    tail = []
    log_like = False
    for c, e in f.tail:
        s = alpha + e
        if abs(s - round(s)) < _EXP_TOL and s <= 0:
            log_like = True
            continue
        ss = hp.to_arb(s)
        const = const + c * aa ** hp.to_arb(e) * w_inf * qa ** (ss * (lat.last + 1)) / (1 - qa**ss)
        if abs(e - round(e)) < _EXP_TOL and e >= 0:
            continue
        if abs(s - round(s)) < _EXP_TOL:
            # x^s log x behaviour; it vanishes at 0 and is dropped from the model
            continue
        kap = _kappa(q, alpha, e)
        if not kap.is_zero():
            tail.append((c * kap, s))
    const = const * scale
    if log_like:
        # logarithmic growth at 0 has no power-law form; continue the last value
        const = data[-1] - sum((c * lat.x_hp[-1] ** hp.to_arb(e) for c, e in tail), hp.ZERO)
    tail.append((const, 0.0))
    return LatticeFn(lat, data, tail)


def dleft_rl(alpha: float, f: LatticeFn) -> LatticeFn:
    """Riemann-Liouville derivative D^alpha_{0+} f = D_q I^{1-alpha}_{0+} f."""
    alpha = check_derivative_order(alpha)
    return d_q(ileft(1.0 - alpha, f))


def _minus_dqinv_over_q(g: LatticeFn, edge: float) -> LatticeFn:
    return d_qinv(g, edge) * (-1 / hp.arb(g.lattice.q))


def dright_rl(alpha: float, f: LatticeFn, policy: RightEdgePolicy = ZERO_EXTENSION) -> LatticeFn:
    """Riemann-Liouville derivative D^alpha_{a-} f = (-1/q) D_{1/q} I^{1-alpha}_{a-} f."""
    alpha = check_derivative_order(alpha)
    return _minus_dqinv_over_q(iright(1.0 - alpha, f), policy.edge_value())


def caputo_left(alpha: float, f: LatticeFn) -> LatticeFn:
    """Caputo derivative cD^alpha_{0+} f = I^{1-alpha}_{0+} D_q f."""
    alpha = check_derivative_order(alpha)
    if not f.has_zero_limit:
        raise ParameterError("Caputo derivative needs a function with a zero limit (q-regular at 0)")
    return ileft(1.0 - alpha, d_q(f))


def caputo_right(alpha: float, f: LatticeFn, policy: RightEdgePolicy = ZERO_EXTENSION) -> LatticeFn:
    """Caputo derivative cD^alpha_{a-} f = (-1/q) I^{1-alpha}_{a-} D_{1/q} f."""
    alpha = check_derivative_order(alpha)
    g = d_qinv(f, policy.edge_value())
    return iright(1.0 - alpha, g) * (-1 / hp.arb(f.lattice.q))


def right_edge_value(alpha: float, f: LatticeFn, policy: RightEdgePolicy = ZERO_EXTENSION) -> float:
    """(I^alpha_{a-} f)(a/q) under the policy (the identity at alpha = 0 is not special-cased)."""
    return policy.edge_value()


# -- fractional integration by parts ---------------------------------------
@dataclass
class FracIBP:
    integral: float
    rl: float
    caputo: float


def frac_ibp_residuals(
    alpha: float, f: LatticeFn, g: LatticeFn, policy: RightEdgePolicy = ZERO_EXTENSION
) -> FracIBP:
    """Residuals of the three fractional integration-by-parts identities.

    * int g I^a_{0+} f = int f I^a_{a-} g
    * int f D^a_{0+} g = [f(x/q) I^{1-a}_{0+} g(x)]_0^a + int g cD^a_{a-} f
    * int g cD^a_{0+} f = [(I^{1-a}_{a-} g)(x/q) f(x)]_0^a + int f D^a_{a-} g

    Boundary values at x/q for x = a come from the edge policy (f(a/q) for the
    second identity, (I^{1-a}_{a-} g)(a/q) for the third). At x = 0 they are
    the zero limits.
    """
    r1 = abs(jackson_int_hp(g * ileft(alpha, f)) - jackson_int_hp(f * iright(alpha, g)))

    alpha = check_derivative_order(alpha)
    edge = hp.to_arb(policy.edge_value())
    h = ileft(1.0 - alpha, g)
    h0, f0 = h.zero_limit_hp, f.zero_limit_hp
    if h0 is None or f0 is None:
        raise ParameterError("boundary term at 0 needs zero limits")
    bracket = edge * h.data[0] - f0 * h0
    lhs = jackson_int_hp(f * dleft_rl(alpha, g))
    rhs = bracket + jackson_int_hp(g * caputo_right(alpha, f, policy))
    r2 = abs(lhs - rhs)

    G0 = iright(1.0 - alpha, g).zero_limit_hp
    if G0 is None:
        raise ParameterError("boundary term at 0 needs I^{1-alpha}_{a-} g to have a zero limit")
    bracket = edge * f.data[0] - G0 * f0
    lhs = jackson_int_hp(g * caputo_left(alpha, f))
    rhs = bracket + jackson_int_hp(f * dright_rl(alpha, g, policy))
    r3 = abs(lhs - rhs)
    return FracIBP(float(r1), float(r2), float(r3))


# -- operator norm constants -----------------------------------------------
def kernel_square_integral(q: float, alpha: float) -> float:
    """int_0^1 (q xi; q)_{alpha-1}^2 d_q xi by Jackson summation."""
    ctx = QContext(q)
    # (q^{k+1}; q)_{alpha-1} = (q^{k+1}; q)_inf / (q^{k+alpha}; q)_inf, -> 1 as k grows
    kmax = math.ceil(math.log(1e-18) / math.log(q)) + 2
    k = np.arange(kmax)
    vals = np.asarray(qpoch_inf(q ** (k + 1.0), ctx)) / np.asarray(qpoch_inf(q ** (k + alpha), ctx))
    return float((1.0 - q) * np.sum(q**k * vals**2))


@dataclass
class BoundConstants:
    M_alpha1: float
    M_alpha2: float
    M_tilde: float | None
    K_alpha: float
    c_alpha0: float
    c_alpha: float | None
    gamma_alpha: float | None
    sigma_alpha: float | None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _c_alpha(q: float, alpha: float) -> float:
    if not (0.5 < alpha < 1.0):
        raise ParameterError(f"c_alpha needs 1/2 < alpha < 1, got {alpha}")
    ctx = QContext(q)
    return (1 - q) ** (alpha - 0.5) / (qpoch_inf(q, ctx) * math.sqrt(1 - q ** (2 * alpha - 1)))


def _sigma_alpha(q: float, alpha: float) -> float:
    if not (0.0 < alpha < 0.5):
        raise ParameterError(f"sigma_alpha needs 0 < alpha < 1/2, got {alpha}")
    ctx = QContext(q)
    return math.sqrt((1 - q) / (1 - q ** (1 - 2 * alpha))) / qpoch_inf(q**alpha, ctx)


def _gamma_alpha(q: float, alpha: float) -> float:
    if not (0.25 < alpha < 0.5):
        raise ParameterError(f"gamma_alpha needs 1/4 < alpha < 1/2, got {alpha}")
    ctx = QContext(q)
    return _sigma_alpha(q, alpha) * q_gamma(alpha + 0.5, ctx) / q_gamma(2 * alpha + 0.5, ctx)


def bound_constants(alpha: float, lattice) -> BoundConstants:
    """Constants of the standard operator-norm bounds for the fractional integrals.

    Range-restricted constants (c_alpha, gamma_alpha, sigma_alpha, M_tilde) are
    ``None`` outside their range; request them directly through
    :func:`c_alpha`, :func:`gamma_alpha`, :func:`sigma_alpha` to get an error.
    """
    alpha = float(alpha)
    if not (0.0 < alpha):
        raise ParameterError("bound constants need alpha > 0")
    q, a = lattice.q, lattice.a
    ctx = QContext(q)
    qq = qpoch_inf(q, ctx)
    m1 = a**alpha * (1 - q) ** alpha / ((1 - q**alpha) * qq)
    ksq = math.sqrt(kernel_square_integral(q, alpha))
    m2 = a**alpha / q_gamma(alpha, ctx) * math.sqrt((1 - q) / (1 - q ** (2 * alpha))) * ksq
    mt = a ** (alpha - 0.5) / q_gamma(alpha, ctx) * ksq if alpha > 0.5 else None
    return BoundConstants(
        M_alpha1=m1,
        M_alpha2=m2,
        M_tilde=mt,
        K_alpha=math.sqrt(a) * m2,
        c_alpha0=m1,
        c_alpha=_c_alpha(q, alpha) if 0.5 < alpha < 1 else None,
        gamma_alpha=_gamma_alpha(q, alpha) if 0.25 < alpha < 0.5 else None,
        sigma_alpha=_sigma_alpha(q, alpha) if 0 < alpha < 0.5 else None,
    )


def c_alpha(alpha: float, q: float) -> float:
    return _c_alpha(q, alpha)


def gamma_alpha(alpha: float, q: float) -> float:
    return _gamma_alpha(q, alpha)


def sigma_alpha(alpha: float, q: float) -> float:
    return _sigma_alpha(q, alpha)


def right_l1_constant(alpha: float, lattice) -> float:
    """Constant C with ||I^alpha_{a-} f||_1 <= C ||f||_1."""
    q, a = lattice.q, lattice.a
    qq = qpoch_inf(q, QContext(q))
    if alpha < 1:
        return (1 - q) ** alpha * a**alpha / ((1 - q**alpha) * qq)
    return (1 - q) ** (alpha - 1) * a ** (alpha - 1) / qq


def right_l2_constant(alpha: float, lattice) -> float:
    """Constant C with ||I^alpha_{a-} f||_2 <= C ||f||_2 (alpha != 1/2).

    For alpha < 1/2 the radicand 1 - q^(2 alpha - 1) is negative; its absolute
    value is used.
    """
    q, a = lattice.q, lattice.a
    if abs(alpha - 0.5) < 1e-14:
        raise ParameterError("the L2 bound for the right integral excludes alpha = 1/2")
    qq = qpoch_inf(q, QContext(q))
    if alpha < 0.5:
        return (1 - q) ** (alpha - 0.5) * a**alpha / (math.sqrt(abs(1 - q ** (2 * alpha - 1))) * qq)
    return (1 - q) ** alpha * a**alpha / (qq * math.sqrt((1 - q ** (2 * alpha - 1)) * (1 - q ** (2 * alpha))))
