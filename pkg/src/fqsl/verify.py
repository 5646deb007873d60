"""Identity suites: every operator identity checked as a residual against a tolerance.

Residuals of pointwise identities are ``sup |lhs - rhs| / max(1, sup |rhs|)``
over the visible lattice points, computed at extended precision. Random
functions are rough on the visible points and constant on the guard points
and below, so they are q-regular at 0.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, hp
from . import spectrum as spec
from .lattice import (
    Lattice,
    LatticeFn,
    constant,
    ibp_residual,
    l1_norm,
    l2_norm,
    power,
    qpoch_fn,
    sup_norm,
)
from .qcore import QContext, q_gamma
from .qfrac import (
    ZERO_EXTENSION,
    RightEdgePolicy,
    bound_constants,
    caputo_left,
    caputo_right,
    dleft_rl,
    dright_rl,
    frac_ibp_residuals,
    ileft,
    iright,
    right_l1_constant,
    right_l2_constant,
)
from .qfslp import (
    SLProblem,
    bc_residuals,
    cosine,
    dominant_mode,
    greens_residual,
    lipschitz_bound,
    map_T,
    solve_ivp,
    solve_picard,
    wronskian,
    wronskian_dq_residual,
)

SUITES = ("qfrac", "qfslp", "spectrum")
BOUND_SLACK = 1e-12  # relative rounding allowance for tight inequalities


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    passed: bool
    detail: dict = field(default_factory=dict)


def check(name: str, residual: float, tol: float, **detail) -> Check:
    residual = float(residual)
    return Check(name, residual, tol, bool(residual <= tol), detail)


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self, timestamp: bool = True) -> dict:
        header = {"tool": "fqsl", "version": __version__}
        if timestamp:
            header["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return {
            "header": header,
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=True)


# -- helpers ---------------------------------------------------------------
def random_fn(lattice: Lattice, rng: np.random.Generator, zero_limit: float | None = None) -> LatticeFn:
    """Rough on the visible points, constant from the first guard point down to 0."""
    z = rng.normal() if zero_limit is None else zero_limit
    d = np.full(lattice.size, z)
    d[: lattice.depth + 1] = rng.normal(size=lattice.depth + 1)
    return LatticeFn(lattice, d, [(z, 0.0)])


def random_bound_fn(lattice: Lattice, rng: np.random.Generator, k: int) -> LatticeFn:
    """Cycle through rough, positive, constant and spike functions (near-extremal cases)."""
    kind = k % 4
    n = lattice.size
    if kind == 0:
        return random_fn(lattice, rng)
    if kind == 1:
        d = rng.uniform(0, 1, size=n)
        z = d[-1]
    elif kind == 2:
        d = np.full(n, rng.uniform(0.5, 2.0))
        z = d[0]
    else:
        d = np.zeros(n)
        d[rng.integers(0, min(8, lattice.depth + 1))] = 1.0
        z = 0.0
    return LatticeFn(lattice, d, [(z, 0.0)])


def sup_diff(lhs: LatticeFn, rhs: LatticeFn, start: int = 0) -> float:
    """sup |lhs - rhs| / max(1, sup |rhs|) over visible points j >= start (extended precision)."""
    n = lhs.lattice.depth + 1
    diff = max((abs(a - b) for a, b in zip(lhs.data[start:n], rhs.data[start:n])), default=hp.ZERO)
    scale = max(1.0, float(np.max(np.abs(rhs.values[start:]))))
    return float(diff) / scale


def right_kernel(lattice: Lattice, nu: float) -> LatticeFn:
    """(q x / a; q)_nu."""
    return qpoch_fn(lattice, nu, shift=1.0, scale=1 / hp.to_arb(lattice.a))


# -- qfrac: operator identities --------------------------------------------
def inversion_checks(q: float, alpha: float, n_funcs: int, rng, tol: float = 1e-9, edge_value: float = 0.37) -> list:
    """Every left/right inversion identity over n_funcs random functions.

    The right-sided correction identities are checked both under zero
    extension (correction term zero) and with a nonzero user edge value.
    """
    lat = Lattice(1.0, q)
    zero = ZERO_EXTENSION
    user = RightEdgePolicy("user_value", edge_value)
    gq = lambda x: q_gamma(x, QContext(q))  # noqa: E731
    worst = {k: 0.0 for k in ("cD+ I+ (f + c x^-a) = f", "cD+ I+ f = f", "cD- I- f = f", "cD- I- f = f - edge term", "D+ I+ f = f", "D- I- f = f", "I+ cD+ f = f - f(0)", "I- D- f = f", "I- D- f = f - edge term", "cD+ f = D+ (f - f(0))")}
    k_minus = right_kernel(lat, -alpha) * (lat.a ** -alpha / gq(1 - alpha))
    k_am1 = right_kernel(lat, alpha - 1) * (lat.a ** (alpha - 1) / gq(alpha))
    for _ in range(n_funcs):
        f = random_fn(lat, rng)
        c = rng.normal()
        fs = f + power(lat, -alpha, c)
        If = ileft(alpha, f)
        worst["cD+ I+ (f + c x^-a) = f"] = max(worst["cD+ I+ (f + c x^-a) = f"], sup_diff(caputo_left(alpha, ileft(alpha, fs)), fs - power(lat, -alpha, c)))
        worst["cD+ I+ f = f"] = max(worst["cD+ I+ f = f"], sup_diff(caputo_left(alpha, If), f))
        Rf = iright(alpha, f)
        worst["cD- I- f = f"] = max(worst["cD- I- f = f"], sup_diff(caputo_right(alpha, Rf, zero), f))
        worst["cD- I- f = f - edge term"] = max(worst["cD- I- f = f - edge term"], sup_diff(caputo_right(alpha, Rf, user), f - k_minus * edge_value))
        worst["D+ I+ f = f"] = max(worst["D+ I+ f = f"], sup_diff(dleft_rl(alpha, If), f))
        worst["D- I- f = f"] = max(worst["D- I- f = f"], sup_diff(dright_rl(alpha, Rf, zero), f))
        worst["I+ cD+ f = f - f(0)"] = max(worst["I+ cD+ f = f - f(0)"], sup_diff(ileft(alpha, caputo_left(alpha, f)), f - f.zero_limit))
        worst["I- D- f = f"] = max(worst["I- D- f = f"], sup_diff(iright(alpha, dright_rl(alpha, f, zero)), f))
        worst["I- D- f = f - edge term"] = max(
            worst["I- D- f = f - edge term"], sup_diff(iright(alpha, dright_rl(alpha, f, user)), f - k_am1 * edge_value)
        )
        worst["cD+ f = D+ (f - f(0))"] = max(worst["cD+ f = D+ (f - f(0))"], sup_diff(caputo_left(alpha, f), dleft_rl(alpha, f - f.zero_limit)))
    return [check(f"inversion[{k}] q={q} alpha={alpha}", v, tol) for k, v in worst.items()]


def semigroup_checks(q: float, pairs, n_funcs: int, rng, tol_left=1e-10, tol_right=1e-12) -> list:
    lat = Lattice(1.0, q)
    out = []
    for a, b in pairs:
        wl = wr = 0.0
        for _ in range(n_funcs):
            f = random_fn(lat, rng)
            wl = max(wl, sup_diff(ileft(a, ileft(b, f)), ileft(a + b, f)))
            wr = max(wr, sup_diff(iright(a, iright(b, f)), iright(a + b, f)))
        out.append(check(f"semigroup-left q={q} ({a},{b})", wl, tol_left))
        out.append(check(f"semigroup-right q={q} ({a},{b})", wr, tol_right))
    return out


def ibp_checks(q: float, alpha: float, n_pairs: int, rng, tol: float = 1e-10, edge_value: float = 0.37) -> list:
    """Integration-by-parts residuals; the boundary brackets use both edge policies."""
    lat = Lattice(1.0, q)
    user = RightEdgePolicy("user_value", edge_value)
    worst = {
        "int g I+f = int f I-g": 0.0,
        "rl-left by parts": 0.0,
        "caputo-left by parts": 0.0,
        "rl-left by parts, edge value": 0.0,
        "caputo-left by parts, edge value": 0.0,
        "q-derivative by parts": 0.0,
    }
    for _ in range(n_pairs):
        f, g = random_fn(lat, rng), random_fn(lat, rng)
        r = frac_ibp_residuals(alpha, f, g)
        worst["int g I+f = int f I-g"] = max(worst["int g I+f = int f I-g"], r.integral)
        worst["rl-left by parts"] = max(worst["rl-left by parts"], r.rl)
        worst["caputo-left by parts"] = max(worst["caputo-left by parts"], r.caputo)
        ru = frac_ibp_residuals(alpha, f, g, user)
        worst["rl-left by parts, edge value"] = max(worst["rl-left by parts, edge value"], ru.rl)
        worst["caputo-left by parts, edge value"] = max(worst["caputo-left by parts, edge value"], ru.caputo)
        worst["q-derivative by parts"] = max(worst["q-derivative by parts"], ibp_residual(f, g))
    return [check(f"ibp[{k}] q={q} alpha={alpha}", v, tol) for k, v in worst.items()]


def bound_checks(q: float, alpha: float, n_funcs: int, rng) -> list:
    """Operator-norm inequalities; the residual is the worst ratio lhs / rhs (must be <= 1)."""
    lat = Lattice(1.0, q)
    bc = bound_constants(alpha, lat)
    a = lat.a
    sup_c = a**alpha / q_gamma(alpha + 1, QContext(q))
    r1 = right_l1_constant(alpha, lat)
    r2 = right_l2_constant(alpha, lat) if abs(alpha - 0.5) > 1e-12 else None
    worst: dict = {}

    def upd(key, lhs, rhs):
        worst[key] = max(worst.get(key, 0.0), lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf))

    for k in range(n_funcs):
        f = random_bound_fn(lat, rng, k)
        L, R = ileft(alpha, f), iright(alpha, f)
        s, s1, s2 = sup_norm(f), l1_norm(f), l2_norm(f)
        upd("I+ sup->sup", sup_norm(L), sup_c * s)
        upd("I+ L1->L1", l1_norm(L), bc.M_alpha1 * s1)
        upd("I+ L2->L2", l2_norm(L), bc.M_alpha2 * s2)
        if bc.M_tilde is not None:
            upd("I+ L2->sup", sup_norm(L), bc.M_tilde * s2)
        upd("I+ sup->L2", l2_norm(L), bc.K_alpha * s)
        upd("I- sup->sup", sup_norm(R), bc.c_alpha0 * s)
        upd("I- L1->L1", l1_norm(R), r1 * s1)
        if r2 is not None:
            upd("I- L2->L2", l2_norm(R), r2 * s2)
    return [check(f"bound[{k}] q={q} alpha={alpha}", v, 1.0 + BOUND_SLACK) for k, v in worst.items()]


def qfrac_suite(rng, n_funcs: int = 100, n_bound: int = 1000) -> list:
    out = []
    for q in (0.3, 0.5, 0.7):
        for alpha in (0.3, 0.5, 0.7):
            out += inversion_checks(q, alpha, n_funcs, rng)
    out += semigroup_checks(0.5, [(a, b) for a in (0.3, 0.45, 0.7) for b in (0.3, 0.45, 0.7)], 10, rng)
    for alpha in (0.3, 0.6):
        out += ibp_checks(0.5, alpha, 20, rng)
    for q in (0.3, 0.5, 0.7):
        for alpha in (0.3, 0.5, 0.7):
            out += bound_checks(q, alpha, n_bound, rng)
    return out


# -- qfslp -----------------------------------------------------------------
def demo_problem(alpha: float = 0.6, q: float = 0.5, bc=(1.0, 0.0, 0.0, 1.0)) -> SLProblem:
    """p = 1 + x/2, r = x, w = (qx; q)_0.4 on [0, 1]."""
    lat = Lattice(1.0, q)
    p = constant(lat, 1.0) + power(lat, 1.0, 0.5)
    r = power(lat, 1.0)
    w = qpoch_fn(lat, 0.4)
    return SLProblem(lat, alpha, p, r, w, bc)


def constant_problem(alpha: float, q: float = 0.5, bc=(1.0, 0.0, 1.0, 0.0)) -> SLProblem:
    lat = Lattice(1.0, q)
    one = constant(lat, 1.0)
    return SLProblem(lat, alpha, one, constant(lat, 0.0), one, bc)


def green_checks(rng, n_pairs: int = 10, tol: float = 1e-9) -> list:
    prob = demo_problem()
    worst_g = worst_s = 0.0
    for _ in range(n_pairs):
        u, v = random_fn(prob.lattice, rng), random_fn(prob.lattice, rng)
        worst_g = max(worst_g, greens_residual(prob, u, v).green)
        # c = (1, 0) with d = (0, 1): the boundary-condition space is {y(0) = 0}
        u0, v0 = random_fn(prob.lattice, rng, 0.0), random_fn(prob.lattice, rng, 0.0)
        rep = greens_residual(prob, u0, v0)
        worst_s = max(worst_s, rep.self_adjoint if rep.self_adjoint is not None else math.inf)
    return [check("green-identity", worst_g, tol), check("self-adjointness", worst_s, tol)]


def picard_checks(rng, tol: float = 1e-9) -> list:
    """Contraction solver at 90% of the sup threshold; simplicity via the dominant mode."""
    prob = constant_problem(0.7)
    # with r = 0 and w = 1, ||r - lam w|| = lam, so the threshold on lam is the threshold itself
    lam = 0.9 * lipschitz_bound(prob, 1.0).threshold
    rep = solve_picard(prob, lam)
    f1 = random_fn(prob.lattice, rng) + 3.0
    m1, _ = dominant_mode(prob, lam, prob.w)
    m2, _ = dominant_mode(prob, lam, f1)
    cos_dev = 1.0 - abs(cosine(m1, m2))
    return [
        check("picard-lipschitz<1", rep.lipschitz, 1.0 - 1e-12, lam=lam),
        check("picard-ratio<=L", rep.contraction_ratio, rep.lipschitz),
        check("picard-fixed-point", rep.fixed_point_residual, tol),
        check("picard-bc", max(abs(x) for x in rep.bc_residuals), 1e-8),
        check("picard-simplicity", cos_dev, tol),
    ]


def contraction_checks(rng, n_pairs: int = 20) -> list:
    """Empirical ||Tg - Th|| / ||g - h|| against L at 90% of threshold, in the norm each variant bounds."""
    out = []
    for alpha, variant in ((0.7, "sup"), (0.75, "l2_high"), (0.35, "l2_low")):
        prob = constant_problem(alpha)
        thr = lipschitz_bound(prob, 1.0, variant).threshold
        lam = 0.9 * thr
        b = lipschitz_bound(prob, lam, variant)
        worst = 0.0
        for _ in range(n_pairs):
            g, h = random_fn(prob.lattice, rng), random_fn(prob.lattice, rng)
            norm = sup_norm if variant == "sup" else l2_norm
            worst = max(worst, norm(map_T(prob, lam, g) - map_T(prob, lam, h)) / norm(g - h))
        out.append(check(f"contraction[{variant}] alpha={alpha}", worst, b.L, threshold=thr))
        out.append(check(f"threshold-finite[{variant}]", 0.0 if math.isfinite(thr) and thr > 0 else 1.0, 0.0))
    return out


def wronskian_checks(rng, lam: float = 2.0, tol: float = 1e-9) -> list:
    prob = demo_problem()
    y1, m0 = solve_ivp(prob, lam, 1.0, 0.0)
    y2, _ = solve_ivp(prob, lam, 0.0, 1.0)
    sub = prob.restrict(m0)
    W = wronskian(sub, y1, y2)
    y3 = y1 * 3.0
    Wp = wronskian(sub, y1, y3)
    y4, _ = solve_ivp(prob, lam, 2.0, 0.0)
    W14 = wronskian(sub, y1, y4)
    return [
        check("wronskian-constancy", abs(W.zero_limit - float(W.data[0])), tol, m0=m0),
        check("wronskian-proportional", sup_norm(Wp), 1e-12),
        check("wronskian-dq-identity", wronskian_dq_residual(sub, y1, y2), tol),
        check("independent-pair-W(0)!=0", 0.0 if abs(W.zero_limit) > 1e-6 else 1.0, 0.0, W0=W.zero_limit),
        check("dependent-pair-W(0)=0", abs(W14.zero_limit), 1e-12),
        check("dependent-pair-proportional", sup_norm(y4 - y1 * 2.0), tol),
        check("ivp-initial-data", max(abs(x) for x in (bc_residuals(sub, y1)[0] - 1.0,)), tol),
    ]


def qfslp_suite(rng) -> list:
    return green_checks(rng) + picard_checks(rng) + contraction_checks(rng) + wronskian_checks(rng)


# -- spectrum --------------------------------------------------------------
# (n, alpha_j, beta_j, mu) per identity
JACOBI_GRID = {
    "left-map": [(3, 0.5, 0.4, 0.6), (0, 0.5, 0.4, 0.6), (2, -0.5, 0.3, 0.4)],
    "caputo-map": [(2, 0.3, 0.4, 0.6), (0, 0.3, 0.4, 0.6), (3, 0.0, 0.4, 0.6), (3, -0.6, 0.4, 0.6), (0, -0.6, 0.4, 0.6)],
    "right-map": [(2, 0.8, 0.1, 0.5), (0, 0.8, 0.1, 0.5), (3, 0.5, 0.4, 0.6), (3, 0.6, 0.4, 0.6)],
    "right-deriv-map": [(2, 0.8, 0.1, 0.5), (0, 0.8, 0.1, 0.5), (3, 0.5, 0.4, 0.6), (3, 0.6, 0.4, 0.6)],
}
JACOBI_FNS = {
    "left-map": spec.verify_left_map,
    "caputo-map": spec.verify_caputo_map,
    "right-map": spec.verify_right_map,
    "right-deriv-map": spec.verify_right_deriv_map,
}


def worked_example_checks(lat: Lattice) -> list:
    """Degree-0 cases against the power rule and the right-sided q-Pochhammer rule, built independently."""
    q = lat.q
    g = lambda x: hp.q_gamma(x, q)  # noqa: E731
    out = []
    a, mu = 0.5, 0.6
    lhs, rhs = spec.left_map_sides(0, a, 0.4, mu, lat)
    direct = power(lat, a + mu, g(a + 1) / g(a + mu + 1))
    out.append(check("left-map n=0 = power rule", max(sup_diff(rhs, direct), sup_diff(lhs, direct)), 1e-14))
    b, mu = 0.1, 0.5
    lhs, rhs = spec.right_map_sides(0, 0.8, b, mu, lat)
    direct = qpoch_fn(lat, b + mu) * (g(b + 1) / g(b + mu + 1))
    out.append(check("right-map m=0 = q-Pochhammer rule", max(sup_diff(rhs, direct), sup_diff(lhs, direct)), 1e-14))
    return out


def monotonicity_checks() -> list:
    worst = math.inf
    for q in (0.3, 0.5, 0.7):
        for mu in (0.3, 0.6, 0.9):
            for beta in (0.0, 0.4):
                lams = [spec.eigenvalue_hp(n, mu, beta, q) for n in range(21)]
                worst = min(worst, float(lams[0]), *(float(b - a) for a, b in zip(lams, lams[1:])))
    return [check("eigenvalues positive and increasing (n <= 20)", 0.0 if worst > 0 else 1.0, 0.0, min_gap=worst)]


def spectrum_suite(q: float = 0.5, mu: float = 0.6, beta: float = 0.4, n_max: int = 5, depth: int = 48) -> list:
    lat = Lattice(1.0, q, depth)
    out = []
    rep = spec.verify_eigenpairs(n_max, mu, beta, lat)
    for row in rep.rows:
        out.append(check(f"eigen-equation n={row.n}", row.eq51_residual, spec.EQ_TOL, lam=row.lam))
        out.append(check(f"eigen-bc0 n={row.n}", row.bc0_residual, spec.BC0_TOL))
    # Gram matrix of p_0..p_6 under x^mu (qx;q)_beta
    params = spec.JacobiParams(mu, beta)
    G = spec.gram_matrix(params, lat, 6)
    C = np.array([spec.jacobi_norm(n, params, q) for n in range(7)])
    off = np.abs(G - np.diag(np.diag(G))) / np.sqrt(np.outer(C, C))
    out.append(check("gram p0..p6 off-diagonal", float(off.max()), spec.GRAM_TOL))
    out.append(check("gram p0..p6 diagonal", float(np.max(np.abs(np.diag(G) - C) / C)), spec.GRAM_TOL))
    for name, grid in JACOBI_GRID.items():
        for args in grid:
            out.append(check(f"{name} {args}", JACOBI_FNS[name](*args, lat), 1e-9))
    out.append(check("left-map mu=1e-3 probe", spec.verify_left_map(3, 0.5, 0.4, 1e-3, lat), 1e-6))
    out += worked_example_checks(lat)
    out += monotonicity_checks()
    return out


def run_suite(name: str, seed: int = 0) -> VerificationReport:
    if name not in SUITES + ("all",):
        raise ValueError(f"unknown suite {name!r}")
    rng = np.random.default_rng(seed)
    names = SUITES if name == "all" else (name,)
    checks = []
    for s in names:
        if s == "qfrac":
            checks += qfrac_suite(rng)
        elif s == "qfslp":
            checks += qfslp_suite(rng)
        else:
            checks += spectrum_suite()
    return VerificationReport(name, seed, checks)
