"""Regular fractional q-Sturm-Liouville problems.

The operator is

    L y = D^alpha_{a-} p cD^alpha_{0+} y + r y,    L y = lam w y,

with boundary conditions

    c1 y(0) + c2 G_y(0) = 0,    d1 y(a) + d2 G_y(a/q) = 0,

where ``G_y = I^{1-alpha}_{a-}(p cD^alpha_{0+} y)`` is the flux. The value of
G_y at a/q comes from the problem's :class:`RightEdgePolicy`.

Because ``Y_f = (r - lam w) f`` is linear in f, the boundary-value map T of
the integral equation is linear. Its unique fixed point under the
contraction condition is therefore 0; the direction T^k f0 / ||T^k f0||
(the dominant mode of T) is what distinguishes starting points, and
:func:`dominant_mode` computes it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import hp
from .errors import ConvergenceError, ParameterError, SingularDeltaError
from .lattice import (
    Lattice,
    LatticeFn,
    constant,
    d_q,
    jackson_int_hp,
    l2_norm,
    qpoch_fn,
    sup_norm,
)
from .qfrac import (
    ZERO_EXTENSION,
    RightEdgePolicy,
    c_alpha,
    caputo_left,
    check_derivative_order,
    dright_rl,
    gamma_alpha,
    ileft,
    iright,
)

DIVERGENCE_LIMIT = 1e12
DELTA_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SLProblem:
    """A regular problem L y = lam w y on the lattice with separated boundary conditions."""

    lattice: Lattice
    alpha: float
    p: LatticeFn
    r: LatticeFn
    w: LatticeFn
    bc: tuple = (1.0, 0.0, 1.0, 0.0)
    edge: RightEdgePolicy = ZERO_EXTENSION

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_derivative_order(self.alpha))
        bc = tuple(float(c) for c in self.bc)
        if len(bc) != 4 or not all(math.isfinite(c) for c in bc):
            raise ParameterError("bc must be four finite reals (c1, c2, d1, d2)")
        c1, c2, d1, d2 = bc
        if c1 == 0 and c2 == 0:
            raise ParameterError("boundary condition at 0 needs c1^2 + c2^2 != 0")
        if d1 == 0 and d2 == 0:
            raise ParameterError("boundary condition at a needs d1^2 + d2^2 != 0")
        object.__setattr__(self, "bc", bc)
        for name in ("p", "r", "w"):
            if getattr(self, name).lattice != self.lattice:
                raise ParameterError(f"{name} lives on a different lattice")
        if np.any(self.w.all_values <= 0):
            raise ParameterError("w must be strictly positive at every lattice point")
        if np.any(self.p.all_values == 0):
            raise ParameterError("p must not vanish on the lattice")

    @cached_property
    def m_p(self) -> float:
        """inf |p| over the lattice (and its zero limit when it has one)."""
        vals = np.abs(self.p.all_values)
        m = float(vals.min())
        z = self.p.zero_limit
        return min(m, abs(z)) if z is not None else m

    @cached_property
    def psi(self) -> LatticeFn:
        return _psi(self)

    def restrict(self, start: int) -> "SLProblem":
        """The same problem on the sub-lattice with endpoint a q^start."""
        if start == 0:
            return self
        return SLProblem(
            self.p.restrict(start).lattice,
            self.alpha,
            self.p.restrict(start),
            self.r.restrict(start),
            self.w.restrict(start),
            self.bc,
            self.edge,
        )

    def potential(self, lam: float) -> LatticeFn:
        """r - lam w."""
        return self.r - self.w * lam


# -- operator and boundary conditions --------------------------------------
def flux(prob: SLProblem, y: LatticeFn) -> LatticeFn:
    """G_y = I^{1-alpha}_{a-}(p cD^alpha_{0+} y) on the lattice."""
    return iright(1.0 - prob.alpha, prob.p * caputo_left(prob.alpha, y))


def apply_L(prob: SLProblem, y: LatticeFn) -> LatticeFn:
    """D^alpha_{a-}(p cD^alpha_{0+} y) + r y."""
    h = prob.p * caputo_left(prob.alpha, y)
    return dright_rl(prob.alpha, h, prob.edge) + prob.r * y


def bc_residuals(prob: SLProblem, y: LatticeFn) -> tuple[float, float]:
    """(c1 y(0) + c2 G_y(0), d1 y(a) + d2 G_y(a/q)); G_y(a/q) from the edge policy."""
    c1, c2, d1, d2 = prob.bc
    y0 = y.zero_limit_hp
    if y0 is None:
        raise ParameterError("boundary condition at 0 needs y to have a zero limit")
    rho0 = c1 * y0
    if c2 != 0:
        g0 = flux(prob, y).zero_limit_hp
        if g0 is None:
            raise ParameterError("flux has no zero limit")
        rho0 = rho0 + c2 * g0
    rho_a = d1 * y.data[0] + d2 * hp.to_arb(prob.edge.edge_value())
    return float(rho0), float(rho_a)


def _psi(prob: SLProblem) -> LatticeFn:
    lat, al = prob.lattice, prob.alpha
    a = hp.to_arb(lat.a)
    kern = qpoch_fn(lat, al - 1.0, shift=1.0, scale=1 / a)
    kern = kern * (a ** hp.to_arb(al - 1.0) / hp.q_gamma(al, lat.q))
    return ileft(al, kern / prob.p)


def psi(prob: SLProblem) -> LatticeFn:
    """psi = I^alpha_{0+}[a^(alpha-1) (qx/a; q)_(alpha-1) / (Gamma_q(alpha) p)].

    Together with constants it spans the solutions of D^alpha_{a-} p cD^alpha y = 0
    at the points below a.
    """
    return prob.psi


def phi_fn(alpha: float, lattice: Lattice) -> LatticeFn:
    """phi = I^alpha_{0+} I^alpha_{a-} 1 in closed form.

    phi(x) = a^alpha x^alpha / Gamma_q(alpha+1)^2 * 2phi1(q^-alpha, q; q^(alpha+1); q, x q^(alpha+1)/a)
    """
    alpha = check_derivative_order(alpha)
    q = lattice.q
    qa, a, al = hp.arb(q), hp.to_arb(lattice.a), hp.to_arb(alpha)
    pref = a**al / hp.q_gamma(alpha + 1.0, q) ** 2
    qma, qa1 = qa ** (-al), qa ** (al + 1)
    # 2phi1 with b = q: (q;q)_k cancels, leaving (q^-alpha;q)_k / (q^(alpha+1);q)_k z^k
    terms = []
    coef = hp.ONE
    xn = float(lattice.next_point)
    scale = qa1 / a
    for k in range(400):
        c = pref * coef * scale**k
        terms.append((c, alpha + k))
        if k > 2 and abs(float(c)) * max(1.0, lattice.a) ** k < 1e-40 * float(pref):
            break
        coef = coef * (1 - qma * qa**k) / (1 - qa1 * qa**k)
    data = hp.full(lattice.size, 0)
    for c, e in terms:
        ee = hp.to_arb(e)
        data = data + np.array([c * x**ee for x in lattice.x_hp], dtype=object)
    tail = [(c, e) for c, e in terms if abs(float(c)) * xn**e > 1e-60 * float(pref) or e == alpha]
    return LatticeFn(lattice, data, tail)


def delta(prob: SLProblem) -> float:
    """c1 d2 - c2 d1 + c1 d1 psi(a)."""
    c1, c2, d1, d2 = prob.bc
    psi_a = float(prob.psi.data[0])
    return c1 * d2 - c2 * d1 + c1 * d1 * psi_a


def _check_delta(prob: SLProblem) -> float:
    c1, c2, d1, d2 = prob.bc
    psi_a = float(prob.psi.data[0])
    dlt = delta(prob)
    scale = max(abs(c1 * d2), abs(c2 * d1), abs(c1 * d1 * psi_a), 1.0)
    if abs(dlt) <= DELTA_REL_TOL * scale:
        raise SingularDeltaError(f"Delta = {dlt:.3g} is singular (scale {scale:.3g})")
    return dlt


def coeffs_AB(prob: SLProblem) -> tuple[LatticeFn, LatticeFn]:
    """A = (c2/Delta)[d2 + d1 (psi(a) - psi)],  B = (d1/Delta)[c1 psi - c2]."""
    return _coeffs_AB(prob)


def _coeffs_AB(prob: SLProblem):
    cache = prob.__dict__.setdefault("_ab", {})
    if "ab" not in cache:
        dlt = _check_delta(prob)
        c1, c2, d1, d2 = prob.bc
        ps = prob.psi
        psi_a = ps.data[0]
        A = (-ps * d1 + (d2 + d1 * psi_a)) * (c2 / dlt)
        B = (ps * c1 - c2) * (d1 / dlt)
        cache["ab"] = (A, B)
    return cache["ab"]


def _inner_solve(prob: SLProblem, Y: LatticeFn) -> LatticeFn:
    """K = I^alpha_{0+}[(1/p) I^alpha_{a-} Y]."""
    return ileft(prob.alpha, iright(prob.alpha, Y) / prob.p)


def map_T(prob: SLProblem, lam: float, f: LatticeFn) -> LatticeFn:
    """T f = -K + A int_0^a Y_f + B K(a), with Y_f = (r - lam w) f."""
    A, B = _coeffs_AB(prob)
    Y = prob.potential(lam) * f
    K = _inner_solve(prob, Y)
    return -K + A * jackson_int_hp(Y) + B * K.data[0]


def map_T_ivp(prob: SLProblem, lam: float, f: LatticeFn, k0: float = 0.0, k1: float = 0.0) -> LatticeFn:
    """Initial-value map: k0 + (k1 + int_0^a Y_f) psi - K.

    Fixed points solve L y = lam w y with y(0) = k0 and G_y(0) = k1. With
    k0 = k1 = 0 this is the homogeneous map used for uniqueness.
    """
    Y = prob.potential(lam) * f
    K = _inner_solve(prob, Y)
    return prob.psi * (jackson_int_hp(Y) + hp.to_arb(k1)) - K + hp.to_arb(k0)


# -- contraction constants -------------------------------------------------
@dataclass
class LipschitzBound:
    variant: str
    L: float
    threshold: float
    norm: float
    admissible: bool


def _sup_AB(prob: SLProblem) -> tuple[float, float]:
    A, B = _coeffs_AB(prob)
    return sup_norm(A), sup_norm(B)


def lipschitz_bound(prob: SLProblem, lam: float, variant: str = "sup") -> LipschitzBound:
    """Lipschitz constant of T and the admissibility threshold on ||r - lam w||.

    ``sup``: L = ||r - lam w|| (M_phi/m_p + A a + B phi(a)/m_p).
    ``l2_high`` (1/2 < alpha < 1) and ``l2_low`` (1/4 < alpha < 1/2) use the
    L2 norm of r - lam w with c_alpha and gamma_alpha respectively.
    """
    lat, al, mp = prob.lattice, prob.alpha, prob.m_p
    a = lat.a
    if mp <= 0:
        raise ParameterError("contraction bounds need inf |p| > 0")
    Anorm, Bnorm = _sup_AB(prob)
    pot = prob.potential(lam)
    if variant == "sup":
        phi = phi_fn(al, lat)
        m_phi, phi_a = sup_norm(phi), float(phi.data[0])
        nrm = sup_norm(pot)
        denom = m_phi + Bnorm * phi_a + Anorm * a * mp
        L = nrm * (m_phi / mp + Anorm * a + Bnorm * phi_a / mp)
    elif variant in ("l2_high", "l2_low"):
        if variant == "l2_high":
            const = c_alpha(al, lat.q)
        else:
            const = gamma_alpha(al, lat.q)
        nrm = l2_norm(pot)
        grow = a ** (2 * al - 0.5)
        denom = (1 + Bnorm) * grow * const + Anorm * math.sqrt(a) * mp
        L = nrm * ((1 + Bnorm) * grow * const / mp + Anorm * math.sqrt(a))
    else:
        raise ParameterError(f"unknown variant {variant!r}; use sup, l2_high or l2_low")
    threshold = mp / denom if denom > 0 else math.inf
    return LipschitzBound(variant, float(L), float(threshold), float(nrm), bool(L < 1))


def psi_growth_constant(alpha: float, q: float) -> float:
    """C with |psi(x)| <= (C / m_p) a^alpha x^alpha."""
    qa, al = hp.arb(q), hp.to_arb(alpha)
    bracket = (1 - qa**al) / (1 - qa)
    c = qa ** (-al) * bracket / (hp.qpoch_inf(qa ** (al + 1), qa) * hp.q_gamma(alpha + 1.0, q) ** 2)
    return float(c)


def m0_radius(prob: SLProblem, lam: float) -> int:
    """Smallest m0 >= 0 with C ||r - lam w|| a^(2 alpha) q^(m0 alpha) / m_p < 1."""
    al, q, a = prob.alpha, prob.lattice.q, prob.lattice.a
    nrm = sup_norm(prob.potential(lam))
    if nrm == 0:
        return 0
    factor = psi_growth_constant(al, q) * nrm * a ** (2 * al) / prob.m_p
    if factor < 1:
        return 0
    m = math.floor(math.log(factor) / (-al * math.log(q)))
    while factor * q ** (m * al) >= 1:
        m += 1
    while m > 0 and factor * q ** ((m - 1) * al) < 1:
        m -= 1
    return m


# -- solvers ---------------------------------------------------------------
@dataclass
class SolveReport:
    solution: LatticeFn
    iterations: int
    lipschitz: float
    threshold: float
    fixed_point_residual: float
    bc_residuals: tuple
    admissible: bool
    converged: bool
    contraction_ratio: float
    warning: str | None = None
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "lipschitz": self.lipschitz,
            "threshold": self.threshold,
            "admissible": self.admissible,
            "converged": self.converged,
            "contraction_ratio": self.contraction_ratio,
            "fixed_point_residual": self.fixed_point_residual,
            "bc_residuals": list(self.bc_residuals),
            "warning": self.warning,
            "x": self.solution.lattice.visible.tolist(),
            "solution": self.solution.values.tolist(),
        }


def _picard(step, f0: LatticeFn, tol: float, max_iter: int):
    f = f0
    diffs = []
    converged = False
    for it in range(1, max_iter + 1):
        g = step(f)
        d = sup_norm(g - f)
        diffs.append(d)
        f = g
        if not math.isfinite(d) or sup_norm(f) > DIVERGENCE_LIMIT:
            raise ConvergenceError(f"Picard iteration diverged after {it} steps (||f|| > {DIVERGENCE_LIMIT:g})")
        if d < tol:
            converged = True
            break
    ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    return f, it, converged, diffs, (max(ratios) if ratios else 0.0)


def solve_picard(
    prob: SLProblem,
    lam: float,
    f0: LatticeFn | None = None,
    tol: float = 1e-11,
    max_iter: int = 200,
    variant: str = "sup",
    raise_on_failure: bool = True,
) -> SolveReport:
    """Iterate f <- T f until successive iterates differ by less than tol (sup norm).

    A non-admissible lam is still iterated, with a warning: the contraction
    condition is sufficient, not necessary.
    """
    if f0 is None:
        f0 = prob.w if prob.w.has_zero_limit else constant(prob.lattice, 1.0)
    bound = lipschitz_bound(prob, lam, variant)
    msg = None
    if not bound.admissible:
        msg = f"lambda={lam:g} is not admissible (L={bound.L:.4g} >= 1); iterating anyway"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    y, it, converged, diffs, ratio = _picard(lambda f: map_T(prob, lam, f), f0, tol, max_iter)
    res = sup_norm(y - map_T(prob, lam, y))
    report = SolveReport(
        solution=y,
        iterations=it,
        lipschitz=bound.L,
        threshold=bound.threshold,
        fixed_point_residual=res,
        bc_residuals=bc_residuals(prob, y),
        admissible=bound.admissible,
        converged=converged,
        contraction_ratio=ratio,
        warning=msg,
        history=diffs,
    )
    if not converged and raise_on_failure:
        err = ConvergenceError(
            f"Picard iteration did not reach tol={tol:g} in {max_iter} steps "
            f"(last step {diffs[-1]:.3g}, ratio {ratio:.3g})"
        )
        err.report = report
        raise err
    return report


def solve_ivp(
    prob: SLProblem,
    lam: float,
    k0: float,
    k1: float,
    tol: float = 1e-13,
    max_iter: int = 500,
) -> tuple[LatticeFn, int]:
    """Solve L y = lam w y with y(0) = k0, G_y(0) = k1 on the sub-lattice of radius a q^m0.

    Returns the solution (on the restricted lattice) and m0.
    """
    m0 = m0_radius(prob, lam)
    if m0 >= prob.lattice.depth:
        raise ParameterError("m0 exceeds the lattice depth; the problem is too far from contractive")
    sub = prob.restrict(m0)
    f0 = constant(sub.lattice, k0) + sub.psi * k1
    y, _, converged, diffs, _ = _picard(lambda f: map_T_ivp(sub, lam, f, k0, k1), f0, tol, max_iter)
    if not converged:
        raise ConvergenceError(f"initial-value iteration stalled at {diffs[-1]:.3g}")
    return y, m0


def dominant_mode(
    prob: SLProblem, lam: float, f0: LatticeFn, tol: float = 1e-12, max_iter: int = 500
) -> tuple[LatticeFn, float]:
    """Normalized power iteration v <- T v / ||T v||.

    Returns the unit-sup-norm limit direction (sign fixed so that v(a) >= 0)
    and the estimated dominant eigenvalue modulus of T.
    """
    v = f0 * (1.0 / sup_norm(f0))
    growth = 0.0
    for _ in range(max_iter):
        t = map_T(prob, lam, v)
        growth = sup_norm(t)
        if growth == 0:
            return v, 0.0
        nv = t * (1.0 / growth)
        if float(nv.data[0]) < 0:
            nv = -nv
        if sup_norm(nv - v) < tol:
            return nv, growth
        v = nv
    raise ConvergenceError("power iteration for the dominant mode did not settle")


def cosine(f: LatticeFn, g: LatticeFn) -> float:
    """<f, g> / (||f||_2 ||g||_2) with the Jackson inner product."""
    num = jackson_int_hp(f * g)
    den = l2_norm(f) * l2_norm(g)
    return float(num) / den


# -- Wronskian and Green's identity ----------------------------------------
def wronskian(prob: SLProblem, y1: LatticeFn, y2: LatticeFn) -> LatticeFn:
    """W = y1 G_{y2} - y2 G_{y1}."""
    return y1 * flux(prob, y2) - y2 * flux(prob, y1)


def wronskian_dq_residual(prob: SLProblem, y1: LatticeFn, y2: LatticeFn) -> float:
    """sup |D_q W - (D_q y1 G_{y2} - D_q y2 G_{y1})| over the visible points."""
    g1, g2 = flux(prob, y1), flux(prob, y2)
    W = y1 * g2 - y2 * g1
    r = d_q(W) - (d_q(y1) * g2 - d_q(y2) * g1)
    return float(np.max(np.abs(r.values)))


@dataclass
class GreenReport:
    green: float
    self_adjoint: float | None
    bracket: float


def greens_residual(prob: SLProblem, u: LatticeFn, v: LatticeFn, bc_tol: float = 1e-9) -> GreenReport:
    """Residual of int (u L v - v L u) = [v G_u(x/q) - u G_v(x/q)]_0^a.

    G(x/q) at x = a is the edge value, at x = 0 the zero limit. When both u
    and v satisfy the boundary conditions to ``bc_tol``, the symmetry
    residual |<L u, v> - <u, L v>| is reported too.
    """
    gu, gv = flux(prob, u), flux(prob, v)
    Lu, Lv = apply_L(prob, u), apply_L(prob, v)
    lhs = jackson_int_hp(u * Lv - v * Lu)
    e = hp.to_arb(prob.edge.edge_value())
    top = v.data[0] * e - u.data[0] * e
    gu0, gv0 = gu.zero_limit_hp, gv.zero_limit_hp
    if gu0 is None or gv0 is None or not (u.has_zero_limit and v.has_zero_limit):
        raise ParameterError("Green's identity needs q-regular u, v and fluxes")
    bottom = v.zero_limit_hp * gu0 - u.zero_limit_hp * gv0
    bracket = top - bottom
    green = float(abs(lhs - bracket))
    sa = None
    in_space = all(abs(r) <= bc_tol for r in bc_residuals(prob, u) + bc_residuals(prob, v))
    if in_space:
        sa = float(abs(jackson_int_hp(Lu * v) - jackson_int_hp(u * Lv)))
    return GreenReport(green=green, self_adjoint=sa, bracket=float(bracket))


def rayleigh_quotient(prob: SLProblem, y: LatticeFn) -> float:
    """<L y, y> / <y, y>_w."""
    return float(jackson_int_hp(apply_L(prob, y) * y) / jackson_int_hp(y * y * prob.w))
