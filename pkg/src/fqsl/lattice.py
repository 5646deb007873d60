"""Truncated geometric lattices and functions sampled on them.

A :class:`Lattice` holds the points ``a q^j`` for ``j = 0..depth`` (the
visible part) followed by ``guard`` extra points. Every :class:`LatticeFn`
stores its values on all ``depth + guard + 1`` points at extended precision
and, below the last one, an explicit power-law tail ``sum_i c_i x**e_i``.
Jackson sums run over the stored points and add the tail in closed form.
Whatever error the tail model carries reaches the visible points damped by
at least ``q**guard``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import hp
from .errors import MissingExtensionError, NonDecayingSummandError, ParameterError
from .qcore import default_depth

_EXP_TOL = 1e-12
_TAIL_PRUNE = 1e-45


@dataclass(frozen=True)
class Lattice:
    """Points a q^j, j = 0..depth + guard, plus the abstract point 0."""

    a: float
    q: float
    depth: int | None = None
    guard: int | None = None

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ParameterError("lattice endpoint a must be positive")
        if not (0.0 < self.q < 1.0):
            raise ParameterError("q must lie in (0, 1)")
        if self.depth is None:
            object.__setattr__(self, "depth", default_depth(self.q))
        if self.guard is None:
            object.__setattr__(self, "guard", default_guard(self.q))
        if int(self.depth) < 1 or int(self.guard) < 0:
            raise ParameterError("depth must be >= 1 and guard >= 0")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "depth", int(self.depth))
        object.__setattr__(self, "guard", int(self.guard))

    @property
    def size(self) -> int:
        """Number of stored points (visible + guard)."""
        return self.depth + self.guard + 1

    @property
    def last(self) -> int:
        return self.depth + self.guard

    @cached_property
    def x_hp(self) -> np.ndarray:
        qa = hp.arb(self.q)
        out = np.empty(self.size, dtype=object)
        v = hp.arb(self.a)
        for j in range(self.size):
            out[j] = v
            v = v * qa
        return out

    @cached_property
    def next_point(self):
        """First point below the stored lattice, at extended precision."""
        return self.x_hp[-1] * hp.arb(self.q)

    @cached_property
    def x(self) -> np.ndarray:
        return hp.tofloat(self.x_hp)

    @property
    def visible(self) -> np.ndarray:
        return self.x[: self.depth + 1]

    @property
    def tail_mass(self) -> float:
        """Jackson mass a q^(depth+1) of the region below the visible points."""
        return self.a * self.q ** (self.depth + 1)

    def index(self, point: float) -> int:
        """Index j of a lattice point a q^j (0 is the point a)."""
        if not point > 0:
            raise ParameterError("lattice points are positive")
        j = math.log(point / self.a) / math.log(self.q)
        jr = round(j)
        if abs(j - jr) > 1e-8 or jr < 0 or jr > self.last:
            raise ParameterError(f"{point!r} is not a point of this lattice")
        return int(jr)


def default_guard(q: float) -> int:
    # q^guard < 1e-12 damps the tail model's error below anything observable
    return max(8, math.ceil(math.log(1e-12) / math.log(q)))


def _norm_tail(terms: Iterable[tuple], xref) -> tuple:
    """Merge equal exponents and drop terms negligible at xref."""
    merged: list[list] = []
    for c, e in terms:
        c = hp.to_arb(c)
        e = float(e)
        if c.is_zero():
            continue
        for item in merged:
            if abs(item[1] - e) < _EXP_TOL:
                item[0] = item[0] + c
                break
        else:
            merged.append([c, e])
    items = [(c, e) for c, e in merged if not c.is_zero()]
    if not items:
        return ()
    sizes = [abs(float(c)) * float(xref) ** e if e >= 0 else math.inf for c, e in items]
    big = max(sizes)
    kept = [(c, e) for (c, e), s in zip(items, sizes) if s > _TAIL_PRUNE * big or s == math.inf]
    return tuple(sorted(kept, key=lambda t: t[1]))


class LatticeFn:
    """Real function on A*_{q,a}: stored values plus a power-law tail near 0.

    ``values`` exposes the visible points as float64; ``data`` holds every
    stored point as extended-precision balls.
    """

    def __init__(self, lattice: Lattice, data, tail: Iterable[tuple] = ()):
        data = hp.vec(data)
        if data.shape != (lattice.size,):
            raise ParameterError(
                f"values must have length {lattice.size} (depth+guard+1), got {data.shape}"
            )
        self.lattice = lattice
        self.data = data
        self.tail = _norm_tail(tail, lattice.next_point)
        self._floats = None

    # -- views -------------------------------------------------------------
    @property
    def all_values(self) -> np.ndarray:
        """Float values at every stored point (visible and guard)."""
        if self._floats is None:
            self._floats = hp.tofloat(self.data)
            self._floats.setflags(write=False)
        return self._floats

    @property
    def values(self) -> np.ndarray:
        """Float values at the visible points a q^j, j = 0..depth."""
        return self.all_values[: self.lattice.depth + 1]

    @property
    def has_zero_limit(self) -> bool:
        return all(e >= -_EXP_TOL for _, e in self.tail)

    @property
    def zero_limit_hp(self):
        if not self.has_zero_limit:
            return None
        total = hp.ZERO
        for c, e in self.tail:
            if abs(e) < _EXP_TOL:
                total = total + c
        return total

    @property
    def zero_limit(self) -> float | None:
        """f(0) as the q-regular limit, or None when f has no limit at 0."""
        z = self.zero_limit_hp
        return None if z is None else float(z)

    def tail_at(self, x):
        x = hp.to_arb(x)
        total = hp.ZERO
        for c, e in self.tail:
            total = total + c * x ** hp.to_arb(e)
        return total

    def next_value(self):
        """Value at the first point below the stored lattice."""
        return self.tail_at(self.lattice.next_point)

    def at(self, point: float) -> float:
        return float(self.data[self.lattice.index(point)])

    def __repr__(self):
        lat = self.lattice
        return (
            f"LatticeFn(a={lat.a}, q={lat.q}, depth={lat.depth}, "
            f"f(a)={float(self.data[0]):.6g}, f(0)={self.zero_limit})"
        )

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "LatticeFn"):
        if other.lattice != self.lattice:
            raise ParameterError("functions live on different lattices")

    def __add__(self, other):
        if isinstance(other, LatticeFn):
            self._check(other)
            return LatticeFn(self.lattice, self.data + other.data, self.tail + other.tail)
        c = hp.to_arb(other)
        return LatticeFn(self.lattice, self.data + c, self.tail + ((c, 0.0),))

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LatticeFn):
            self._check(other)
            tail = [(c1 * c2, e1 + e2) for c1, e1 in self.tail for c2, e2 in other.tail]
            return LatticeFn(self.lattice, self.data * other.data, tail)
        s = hp.to_arb(other)
        return LatticeFn(self.lattice, self.data * s, [(c * s, e) for c, e in self.tail])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LatticeFn):
            return self * other.reciprocal()
        return self * (hp.ONE / hp.to_arb(other))

    def reciprocal(self) -> "LatticeFn":
        if any(v.is_zero() for v in self.data) or not self.tail:
            raise ZeroDivisionError("reciprocal of a function that vanishes on the lattice or near 0")
        c0, e0 = self.tail[0]
        # 1/(c0 x^e0 (1 + r)) = (1 - r + r^2 - r^3) / (c0 x^e0); r = O(x) below the lattice
        rest = [(c / c0, e - e0) for c, e in self.tail[1:]]
        series = [(hp.ONE, 0.0)]
        power = [(hp.ONE, 0.0)]
        for k in range(1, 4):
            power = [(c1 * c2, e1 + e2) for c1, e1 in power for c2, e2 in rest]
            power = list(_norm_tail(power, self.lattice.next_point))
            series += [((-1) ** k * c, e) for c, e in power]
        tail = [(c / c0, e - e0) for c, e in series]
        data = np.array([hp.ONE / v for v in self.data], dtype=object)
        return LatticeFn(self.lattice, data, tail)

    def shift(self) -> "LatticeFn":
        """x -> f(q x)."""
        data = np.append(self.data[1:], self.next_value())
        qa = hp.arb(self.lattice.q)
        tail = [(c * qa ** hp.to_arb(e), e) for c, e in self.tail]
        return LatticeFn(self.lattice, data, tail)

    def abs(self) -> "LatticeFn":
        if self.tail:
            c, e = self.tail[0]
            tail = [(abs(self.next_value()) / self.lattice.next_point ** hp.to_arb(e), e)]
        else:
            tail = []
        return LatticeFn(self.lattice, hp.habs(self.data), tail)

    def restrict(self, start: int) -> "LatticeFn":
        """The same function on the sub-lattice that starts at a q^start."""
        lat = self.lattice
        if not 0 <= start < lat.depth:
            raise ParameterError("restriction start must leave at least one visible point")
        sub = Lattice(lat.a * lat.q**start, lat.q, lat.depth - start, lat.guard)
        return LatticeFn(sub, self.data[start:], self.tail)


# -- construction ----------------------------------------------------------
def constant(lattice: Lattice, value) -> LatticeFn:
    v = hp.to_arb(value)
    return LatticeFn(lattice, hp.full(lattice.size, v), [(v, 0.0)])


def power(lattice: Lattice, mu: float, coef=1.0) -> LatticeFn:
    """coef * x**mu with its exact tail."""
    c = hp.to_arb(coef)
    m = hp.to_arb(mu)
    data = np.array([c * x**m for x in lattice.x_hp], dtype=object)
    return LatticeFn(lattice, data, [(c, mu)])


def power_series(lattice: Lattice, terms: Sequence[tuple]) -> LatticeFn:
    """sum_i c_i x**e_i, sampled with its exact tail."""
    data = hp.full(lattice.size, 0)
    for c, e in terms:
        c, m = hp.to_arb(c), hp.to_arb(e)
        data = data + np.array([c * x**m for x in lattice.x_hp], dtype=object)
    return LatticeFn(lattice, data, terms)


def qpoch_fn(lattice: Lattice, nu: float, shift: float = 1.0, scale=1.0) -> LatticeFn:
    """x -> (scale q^shift x; q)_nu, with the exact tail from the q-binomial series."""
    qa = hp.arb(lattice.q)
    s = qa ** hp.to_arb(shift) * hp.to_arb(scale)
    data = np.array([hp.qpoch_real(s * x, nu, qa) for x in lattice.x_hp], dtype=object)
    # (s x; q)_nu = sum_n (q^-nu; q)_n / (q; q)_n (s q^nu x)^n
    terms = []
    coef = hp.ONE
    z = s * qa ** hp.to_arb(nu)
    xn = float(lattice.next_point)
    qmnu = qa ** hp.to_arb(-nu)
    for n in range(200):
        term = coef * z**n
        if n > 0 and term.is_zero():
            break
        terms.append((term, float(n)))
        if n > 2 and abs(float(term)) * xn**n < 1e-60:
            break
        coef = coef * (1 - qmnu * qa**n) / (1 - qa ** (n + 1))
    return LatticeFn(lattice, data, terms)


def sample(
    f: Callable[[np.ndarray], np.ndarray],
    lattice: Lattice,
    zero_limit: float | None = None,
    tail: Sequence[tuple] | None = None,
) -> LatticeFn:
    """Evaluate the float callable ``f`` at every stored lattice point.

    The tail below the lattice is, in order of preference: ``tail`` when
    given; the constant ``zero_limit`` (or ``f(0)`` when finite); otherwise a
    single power c x^e fitted through the two deepest points, which is how
    functions such as x**-0.5 are admitted without a zero limit. Values are
    double precision; build coefficient functions from :func:`power`,
    :func:`qpoch_fn` and arithmetic when full precision matters.
    """
    x = lattice.x
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(x), dtype=float)
        if vals.shape == ():
            vals = np.full_like(x, float(vals))
    except Exception as exc:
        raise ParameterError(f"function evaluation failed on the lattice: {exc}") from exc
    if vals.shape != x.shape:
        raise ParameterError("function must return one value per lattice point")
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise ParameterError(
            f"non-finite value at lattice index {int(bad[0])} (x={x[bad[0]]:.6g})"
        )
    if tail is not None:
        return LatticeFn(lattice, vals, tail)
    if zero_limit is None:
        try:
            with np.errstate(all="ignore"):
                z = float(np.asarray(f(np.array([0.0])), dtype=float).ravel()[0])
        except Exception:
            z = math.nan
        if math.isfinite(z):
            zero_limit = z
    if zero_limit is not None:
        return LatticeFn(lattice, vals, [(float(zero_limit), 0.0)])
    return LatticeFn(lattice, vals, [fit_power_tail(x, vals)])


def fit_power_tail(x: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    v1, v0 = vals[-1], vals[-2]
    if v1 == 0.0 or v0 == 0.0 or np.sign(v1) != np.sign(v0):
        return (0.0, 0.0)
    e = math.log(v1 / v0) / math.log(x[-1] / x[-2])
    return (float(v1 / x[-1] ** e), float(e))


# -- Jackson calculus ------------------------------------------------------
def d_q(f: LatticeFn) -> LatticeFn:
    """Jackson derivative (f(x) - f(qx)) / ((1 - q) x) at every stored point."""
    lat = f.lattice
    qa = hp.arb(lat.q)
    nxt = np.append(f.data[1:], f.next_value())
    data = (f.data - nxt) / ((1 - qa) * lat.x_hp)
    tail = [
        (c * (1 - qa ** hp.to_arb(e)) / (1 - qa), e - 1.0)
        for c, e in f.tail
        if abs(e) > _EXP_TOL
    ]
    return LatticeFn(lat, data, tail)


def d_qinv(f: LatticeFn, edge_value) -> LatticeFn:
    """D_{1/q} f(x) = (f(x) - f(x/q)) / ((1 - 1/q) x).

    At x = a the value f(a/q) lies off the lattice and must be supplied.
    """
    if edge_value is None:
        raise MissingExtensionError("D_{1/q} at x=a needs an extension value f(a/q)")
    lat = f.lattice
    qa = hp.arb(lat.q)
    prev = np.concatenate((np.array([hp.to_arb(edge_value)], dtype=object), f.data[:-1]))
    data = (f.data - prev) / ((1 - 1 / qa) * lat.x_hp)
    tail = [
        (c * (1 - qa ** hp.to_arb(-e)) / (1 - 1 / qa), e - 1.0)
        for c, e in f.tail
        if abs(e) > _EXP_TOL
    ]
    return LatticeFn(lat, data, tail)


def _tail_integral(f: LatticeFn):
    """Closed-form Jackson integral of the tail over [0, first point below storage]."""
    lat = f.lattice
    qa = hp.arb(lat.q)
    xn = lat.next_point
    total = hp.ZERO
    for c, e in f.tail:
        if e <= -1.0 + _EXP_TOL:
            raise NonDecayingSummandError(f"tail term x^{e:g} is not q-integrable at 0")
        p = hp.to_arb(1.0 + e)
        total = total + c * (1 - qa) * xn**p / (1 - qa**p)
    return total


def jackson_prefix_hp(f: LatticeFn) -> np.ndarray:
    """F[j] = integral from 0 to a q^j of f, for every stored point j."""
    lat = f.lattice
    qa = hp.arb(lat.q)
    terms = (1 - qa) * lat.x_hp * f.data
    out = np.empty(lat.size, dtype=object)
    acc = _tail_integral(f)
    for j in range(lat.last, -1, -1):
        acc = acc + terms[j]
        out[j] = acc
    return out


def jackson_prefix(f: LatticeFn) -> LatticeFn:
    """x -> integral_0^x f as a lattice function."""
    qa = hp.arb(f.lattice.q)
    tail = [(c * (1 - qa) / (1 - qa ** hp.to_arb(1 + e)), e + 1) for c, e in f.tail]
    return LatticeFn(f.lattice, jackson_prefix_hp(f), tail)


def jackson_int_hp(f: LatticeFn, upper: float | None = None):
    lat = f.lattice
    j = 0 if upper is None else lat.index(upper)
    qa = hp.arb(lat.q)
    return (1 - qa) * hp.hsum(lat.x_hp[j:] * f.data[j:]) + _tail_integral(f)


def jackson_int(f: LatticeFn, upper: float | None = None) -> float:
    """Jackson integral of f from 0 to ``upper`` (a lattice point; default a)."""
    return float(jackson_int_hp(f, upper))


def jackson_int_range(f: LatticeFn, lower: float, upper: float | None = None) -> float:
    """Integral over [lower, upper] between lattice points; ``lower = 0`` is allowed."""
    lat = f.lattice
    if lower == 0:
        return jackson_int(f, upper)
    jl = lat.index(lower)
    ju = 0 if upper is None else lat.index(upper)
    if ju > jl:
        raise ParameterError("lower must not exceed upper")
    qa = hp.arb(lat.q)
    return float((1 - qa) * hp.hsum(lat.x_hp[ju:jl] * f.data[ju:jl]))


@dataclass
class Norms:
    sup: float
    l1: float
    l2: float
    inner: float | None = None


def sup_norm(f: LatticeFn) -> float:
    """Sup over every stored point and the zero limit (inf without a zero limit)."""
    if not f.has_zero_limit:
        return math.inf
    return float(max(np.max(np.abs(f.all_values)), abs(f.zero_limit)))


def l1_norm(f: LatticeFn) -> float:
    return jackson_int(f.abs())


def l2_norm(f: LatticeFn) -> float:
    return math.sqrt(max(jackson_int(f * f), 0.0))


def _check_weight(w: LatticeFn):
    if np.any(w.all_values <= 0):
        raise ParameterError("weight must be strictly positive")


def inner(f: LatticeFn, g: LatticeFn, w: LatticeFn | None = None) -> float:
    """<f, g>_w = integral_0^a f g w d_q x (real valued: no conjugation)."""
    h = f * g
    if w is not None:
        _check_weight(w)
        h = h * w
    return jackson_int(h)


def norms_and_inner(f: LatticeFn, g: LatticeFn | None = None, w: LatticeFn | None = None) -> Norms:
    """Sup, L1 and L2 norms of f (weighted by w when given) and <f, g>_w."""
    if w is None:
        l1, l2 = l1_norm(f), l2_norm(f)
    else:
        _check_weight(w)
        l1 = jackson_int(f.abs() * w)
        l2 = math.sqrt(max(jackson_int(f * f * w), 0.0))
    ip = inner(f, g, w) if g is not None else None
    return Norms(sup=sup_norm(f), l1=l1, l2=l2, inner=ip)


def ibp_residual(f: LatticeFn, g: LatticeFn) -> float:
    """Residual of q-integration by parts on [0, a].

    integral f D_q g = [f g]_0^a - integral D_q f(x) g(qx)
    """
    if not (f.has_zero_limit and g.has_zero_limit):
        raise ParameterError("integration by parts needs q-regular f and g")
    lhs = jackson_int_hp(f * d_q(g))
    bracket = f.data[0] * g.data[0] - f.zero_limit_hp * g.zero_limit_hp
    rhs = bracket - jackson_int_hp(d_q(f) * g.shift())
    return abs(float(lhs - rhs))
