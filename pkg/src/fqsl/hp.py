"""Extended-precision helpers built on python-flint ``arb`` balls.

Lattice data are carried at ``PREC`` bits. Right-sided derivatives at depth
~1e-14 divide differences of O(1) numbers by x, which turns double rounding
into O(1e-2) errors; 128 bits leave ample headroom. Only ball midpoints are
used downstream; radii are ignored.
"""
from __future__ import annotations

import math
from functools import lru_cache

import flint
import numpy as np

PREC = 128

if flint.ctx.prec < PREC:
    flint.ctx.prec = PREC

arb = flint.arb
ONE = arb(1)
ZERO = arb(0)
_TINY_EXP = -PREC - 16  # log2 threshold for truncating products and series


def to_arb(v) -> "flint.arb":
    if isinstance(v, flint.arb):
        return v
    return arb(float(v)) if not isinstance(v, int) else arb(v)


def vec(values) -> np.ndarray:
    """Object array of arb from floats or arbs."""
    if isinstance(values, np.ndarray) and values.dtype == object:
        return np.array([to_arb(v) for v in values], dtype=object)
    arr = np.asarray(values)
    if arr.dtype == object:
        return np.array([to_arb(v) for v in arr.ravel()], dtype=object)
    arr = np.asarray(values, dtype=float).ravel()
    return np.array([arb(v) for v in arr.tolist()], dtype=object)


def full(n: int, value) -> np.ndarray:
    v = to_arb(value)
    out = np.empty(n, dtype=object)
    out[:] = [v] * n
    return out


def tofloat(v) -> np.ndarray | float:
    if isinstance(v, flint.arb):
        return float(v)
    return np.array([float(x) for x in v], dtype=float)


def hsum(v) -> "flint.arb":
    total = ZERO
    for x in v:
        total = total + x
    return total


def habs(v: np.ndarray) -> np.ndarray:
    return np.array([abs(x) for x in v], dtype=object)


def powers(base, exps) -> np.ndarray:
    b = to_arb(base)
    return np.array([b ** to_arb(e) for e in exps], dtype=object)


def convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First n coefficients of the full convolution of a and b."""
    prod = flint.arb_poly(list(a)) * flint.arb_poly(list(b))
    coeffs = prod.coeffs()
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = coeffs[i] if i < len(coeffs) else ZERO
    return out


def _n_factors(zabs: float, q: float) -> int:
    if zabs == 0.0:
        return 1
    # |z| q^J / (1 - q) < 2^_TINY_EXP
    j = (_TINY_EXP * math.log(2) + math.log(1 - q) - math.log(zabs)) / math.log(q)
    return max(1, math.ceil(j) + 1)


def qpoch_inf(z, q) -> "flint.arb":
    """(z; q)_inf at extended precision."""
    z, qa = to_arb(z), to_arb(q)
    n = _n_factors(abs(float(z)), float(q))
    out = ONE
    zq = z
    for _ in range(n):
        out = out * (1 - zq)
        zq = zq * qa
    return out


def qpoch_n(z, n: int, q) -> "flint.arb":
    z, qa = to_arb(z), to_arb(q)
    out = ONE
    zq = z
    for _ in range(n):
        out = out * (1 - zq)
        zq = zq * qa
    return out


def qpoch_real(z, nu, q) -> "flint.arb":
    """(z; q)_nu = (z; q)_inf / (z q^nu; q)_inf; nonnegative integer nu uses the finite product."""
    nu = float(nu)
    if nu >= 0 and nu.is_integer():
        return qpoch_n(z, int(nu), q)
    z, qa = to_arb(z), to_arb(q)
    return qpoch_inf(z, qa) / qpoch_inf(z * qa ** to_arb(nu), qa)


@lru_cache(maxsize=4096)
def q_gamma(x: float, q: float) -> "flint.arb":
    qa = arb(q)
    return qpoch_inf(qa, qa) * (1 - qa) ** (1 - arb(x)) / qpoch_inf(qa ** arb(x), qa)


@lru_cache(maxsize=256)
def kernel_weights(q: float, alpha: float, n: int) -> tuple:
    """w_k = (q^alpha; q)_k / (q; q)_k, k = 0..n-1, at extended precision."""
    qa = arb(q)
    qal = qa ** arb(alpha)
    out = [ONE]
    qk = ONE  # q^(k-1) running power
    w = ONE
    for k in range(1, n):
        w = w * (1 - qal * qk) / (1 - qk * qa)
        qk = qk * qa
        out.append(w)
    return tuple(out)


def weights_inf(q: float, alpha: float) -> "flint.arb":
    """lim_k w_k = (q^alpha; q)_inf / (q; q)_inf."""
    qa = arb(q)
    return qpoch_inf(qa ** arb(alpha), qa) / qpoch_inf(qa, qa)
