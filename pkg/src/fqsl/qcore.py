"""Scalar q-special functions: shifted factorials, q-Gamma, q-Beta, 2phi1.

All routines work in double precision. Functions that are evaluated on a
whole lattice at once (``qpoch_real``, ``q_gamma``) accept numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterError, PoleError

_HARD_CAP = 200_000
_POLE_WINDOW = 1e-9


@dataclass(frozen=True)
class QContext:
    """Global numeric configuration shared by every routine."""

    q: float = 0.5
    prod_tail_tol: float = 1e-17
    series_tol: float = 1e-17
    default_lattice_depth: int | None = None

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ParameterError(f"q must lie in (0, 1), got {self.q!r}")
        if self.prod_tail_tol <= 0 or self.series_tol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.default_lattice_depth is not None and self.default_lattice_depth < 1:
            raise ParameterError("default_lattice_depth must be a positive integer")

    def depth(self) -> int:
        """Lattice depth: explicit setting, else smallest N with q**(N+1) < 1e-14."""
        if self.default_lattice_depth is not None:
            return self.default_lattice_depth
        return default_depth(self.q)


def default_depth(q: float, floor: float = 1e-14) -> int:
    return max(1, math.ceil(math.log(floor) / math.log(q)) - 1)


def _ctx(ctx: QContext | None) -> QContext:
    return ctx if ctx is not None else QContext()


def qpoch_n(z, n: int, ctx: QContext | None = None):
    """Finite product (z; q)_n."""
    q = _ctx(ctx).q
    if n < 0:
        raise ParameterError("qpoch_n needs n >= 0; use qpoch_real for other exponents")
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    for j in range(n):
        out = out * (1.0 - z * q**j)
    return out if out.ndim else float(out)


def _n_factors(zmax: float, q: float, tol: float) -> int:
    # first J with |z| q^J / (1-q) < tol
    if zmax == 0.0:
        return 1
    j = math.log(tol * (1.0 - q) / zmax) / math.log(q)
    n = max(1, math.ceil(j) + 1)
    if n > _HARD_CAP:
        raise ConvergenceError(f"infinite product needs {n} factors (cap {_HARD_CAP})")
    return n


def qpoch_inf(z, ctx: QContext | None = None):
    """(z; q)_inf truncated once the remaining factors are within prod_tail_tol of 1."""
    c = _ctx(ctx)
    z = np.asarray(z, dtype=float)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if not np.isfinite(zmax):
        raise ConvergenceError("non-finite argument to qpoch_inf")
    n = _n_factors(zmax, c.q, c.prod_tail_tol)
    powers = c.q ** np.arange(n)
    out = np.prod(1.0 - np.multiply.outer(z, powers), axis=-1)
    return out if out.ndim else float(out)


def qpoch_real(z, nu, ctx: QContext | None = None):
    """(z; q)_nu = (z; q)_inf / (z q^nu; q)_inf for real nu.

    Evaluated as a product of factor ratios sharing one truncation depth, so
    lattice kernels such as (q^(m+1); q)_nu stay positive and cancellation free.
    Nonnegative integer nu reduces to the finite product.
    """
    c = _ctx(ctx)
    q = c.q
    nu_arr = np.asarray(nu, dtype=float)
    if nu_arr.ndim == 0 and float(nu_arr) >= 0 and float(nu_arr).is_integer():
        return qpoch_n(z, int(nu_arr), c)
    z = np.asarray(z, dtype=float)
    z, nu_arr = np.broadcast_arrays(z, nu_arr)
    zq = z * q**nu_arr
    zmax = float(max(np.max(np.abs(z), initial=0.0), np.max(np.abs(zq), initial=0.0)))
    n = _n_factors(zmax, q, c.prod_tail_tol)
    powers = q ** np.arange(n)
    num = 1.0 - np.multiply.outer(z, powers)
    den = 1.0 - np.multiply.outer(zq, powers)
    num_zero = np.any(num == 0.0, axis=-1)
    den_zero = np.any(np.abs(den) < 1e-300, axis=-1)
    bad = den_zero & ~num_zero
    if np.any(bad):
        raise PoleError("(z q^nu; q)_inf vanishes: z q^nu lies in {q^-k}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den_zero[..., None], 1.0, num / np.where(den == 0, 1.0, den))
    out = np.prod(ratio, axis=-1)
    out = np.where(num_zero, 0.0, out)
    return out if out.ndim else float(out)


def q_bracket(beta, ctx: QContext | None = None):
    """[beta]_q = (1 - q^beta) / (1 - q)."""
    q = _ctx(ctx).q
    return (1.0 - np.power(q, beta)) / (1.0 - q)


def _check_gamma_pole(x):
    x = np.asarray(x, dtype=float)
    near = (x <= _POLE_WINDOW) & (np.abs(x - np.round(x)) < _POLE_WINDOW)
    if np.any(near):
        raise PoleError(f"q-Gamma has a pole at nonpositive integers (got {x[near].ravel()[0]})")


def q_gamma(x, ctx: QContext | None = None):
    """Gamma_q(x) = (q; q)_inf (1 - q)^(1 - x) / (q^x; q)_inf."""
    c = _ctx(ctx)
    q = c.q
    _check_gamma_pole(x)
    x = np.asarray(x, dtype=float)
    # (q;q)_inf / (q^x;q)_inf = (q;q)_(x-1), taken as a product of ratios so q near 1 cannot underflow
    val = qpoch_real(q, x - 1.0, c) * (1.0 - q) ** (1.0 - x)
    return val if np.ndim(val) else float(val)


def q_beta(s, t, ctx: QContext | None = None):
    """B_q(s, t) = Gamma_q(s) Gamma_q(t) / Gamma_q(s + t)."""
    return q_gamma(s, ctx) * q_gamma(t, ctx) / q_gamma(np.add(s, t), ctx)


def phi21(a: float, b: float, c: float, z: float, ctx: QContext | None = None) -> float:
    """Basic hypergeometric series 2phi1(a, b; c; q, z).

    Standard convention sum_k (a;q)_k (b;q)_k / ((q;q)_k (c;q)_k) z^k. A
    terminating series (a = q^-n) is summed exactly; otherwise |z| < 1 is
    required and summation stops once terms fall below ``series_tol``.
    """
    cx = _ctx(ctx)
    q = cx.q
    n_term = _terminating_order(a, q)
    if n_term is None:
        n_term = _terminating_order(b, q)
    if n_term is None and abs(z) >= 1.0:
        raise ConvergenceError("non-terminating 2phi1 requires |z| < 1")
    total = 1.0
    term = 1.0
    k = 0
    while True:
        if n_term is not None and k >= n_term:
            break
        den = (1.0 - q ** (k + 1)) * (1.0 - c * q**k)
        if den == 0.0:
            raise PoleError("2phi1 lower parameter c lies in {q^-k}")
        term *= (1.0 - a * q**k) * (1.0 - b * q**k) / den * z
        total += term
        k += 1
        if n_term is None:
            if abs(term) < cx.series_tol * max(1.0, abs(total)) and k > 2:
                break
            if k > _HARD_CAP:
                raise ConvergenceError("2phi1 series did not converge")
    return total


def _terminating_order(a: float, q: float) -> int | None:
    """n if a == q^-n for a nonnegative integer n, else None."""
    if a == 0.0:
        return None
    if a == 1.0:
        return 0
    if a < 0:
        return None
    n = -math.log(a) / math.log(q)
    if n > -1e-12 and abs(n - round(n)) < 1e-9:
        return int(round(n))
    return None
