"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line and records it in ``RESULTS``; the
lines are repeated in the pytest terminal summary.
"""
import time

import numpy as np
import pytest

from fqsl.cli import main
from fqsl.lattice import Lattice
from fqsl.spectrum import (
    GRAM_TOL,
    JacobiParams,
    gram_matrix,
    jacobi_norm,
    verify_eigenpairs,
)
from fqsl.verify import (
    JACOBI_FNS,
    JACOBI_GRID,
    bound_checks,
    check,
    contraction_checks,
    green_checks,
    ibp_checks,
    inversion_checks,
    picard_checks,
    semigroup_checks,
    worked_example_checks,
    wronskian_checks,
)

RESULTS = []
GRID = (0.3, 0.5, 0.7)


def record(number, title, checks):
    """Print and record one line for a criterion; checks is a list of verify.Check."""
    failed = [c for c in checks if not c.passed]
    worst = max(checks, key=lambda c: c.residual / c.tol if c.tol > 0 else (0.0 if c.residual <= 0 else np.inf))
    status = "PASS" if not failed else "FAIL"
    line = f"{status} criterion {number:2d} {title}: {len(checks) - len(failed)}/{len(checks)} checks, worst {worst.name} = {worst.residual:.3g} (tol {worst.tol:.3g})"
    print(line)
    RESULTS.append(line)
    assert not failed, [f"{c.name}: {c.residual} > {c.tol}" for c in failed]


def test_criterion_01_eigenpairs():
    t0 = time.perf_counter()
    rep = verify_eigenpairs(5, 0.6, 0.4, Lattice(1.0, 0.5, 48))
    elapsed = time.perf_counter() - t0
    checks = [check(f"eigen-equation n={r.n}", r.eq51_residual, 1e-8) for r in rep.rows]
    checks.append(check("runtime seconds", elapsed, 5.0))
    record(1, "eigenpairs q=0.5 mu=0.6 beta=0.4 n=0..5", checks)


def test_criterion_02_orthogonality():
    params = JacobiParams(0.6, 0.4)
    G = gram_matrix(params, Lattice(1.0, 0.5, 48), 6)
    C = np.array([jacobi_norm(n, params, 0.5) for n in range(7)])
    off = np.abs(G - np.diag(np.diag(G))) / np.sqrt(np.outer(C, C))
    diag = np.abs(np.diag(G) - C) / C
    checks = [check("gram off-diagonal / sqrt(Ci Cj)", float(off.max()), GRAM_TOL)]
    checks.append(check("gram diagonal vs C_n", float(diag.max()), GRAM_TOL))
    record(2, "Gram matrix p0..p6", checks)


def test_criterion_03_inversion_identities():
    rng = np.random.default_rng(3)
    checks = []
    for q in GRID:
        for alpha in GRID:
            checks += inversion_checks(q, alpha, 100, rng, tol=1e-9)
    record(3, "inversion identities, 100 functions per (q, alpha)", checks)


def test_criterion_04_semigroup():
    rng = np.random.default_rng(4)
    pairs = [(a, b) for a in (0.3, 0.45, 0.7) for b in (0.3, 0.45, 0.7)]
    checks = []
    for q in GRID:
        checks += semigroup_checks(q, pairs, 10, rng, tol_left=1e-10, tol_right=1e-12)
    record(4, "semigroup left and right", checks)


def test_criterion_05_integration_by_parts():
    rng = np.random.default_rng(5)
    checks = []
    for q in GRID:
        for alpha in GRID:
            checks += ibp_checks(q, alpha, 20, rng, tol=1e-10)
    checks += green_checks(rng, 20, tol=1e-9)
    record(5, "integration by parts, Green and self-adjointness", checks)


@pytest.mark.parametrize("q", GRID)
def test_criterion_06_bounds(q):
    rng = np.random.default_rng(int(q * 10))
    checks = []
    for alpha in GRID:
        checks += bound_checks(q, alpha, 1000, rng)
    record(6, f"operator bounds q={q}, 1000 functions per bound", checks)


def test_criterion_07_picard():
    record(7, "Picard solver at 90% of threshold", picard_checks(np.random.default_rng(7), tol=1e-9))


def test_criterion_08_l2_variants():
    checks = [c for c in contraction_checks(np.random.default_rng(8)) if "l2" in c.name]
    record(8, "L2 contraction variants alpha=0.75 and 0.35", checks)


def test_criterion_09_wronskian():
    record(9, "Wronskian", wronskian_checks(np.random.default_rng(9), tol=1e-9))


def test_criterion_10_jacobi_mapping_rules():
    lat = Lattice(1.0, 0.5, 48)
    checks = []
    for name, grid in JACOBI_GRID.items():
        for args in grid:
            checks.append(check(f"{name} {args}", JACOBI_FNS[name](*args, lat), 1e-9))
    checks += worked_example_checks(lat)
    record(10, "Jacobi mapping rules and degree-zero cases", checks)


def test_criterion_11_full_verify_run(capsys):
    t0 = time.perf_counter()
    code = main(["verify", "--suite", "all", "--seed", "42"])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    checks = [check("exit code", float(code), 0.0), check("runtime seconds", elapsed, 60.0)]
    record(11, "verify --suite all --seed 42", checks)
