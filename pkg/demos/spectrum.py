"""Little q-Jacobi eigenpairs of the fractional problem on [0, 1].

Run: python demos/spectrum.py
"""
from fqsl import Lattice, verify_eigenpairs

rep = verify_eigenpairs(5, 0.6, 0.4, Lattice(1.0, 0.5, 48))
print(" n   lambda_n            residual    gram off-diag")
for r in rep.rows:
    print(f"{r.n:2d}   {r.lam:<18.12g}  {r.eq51_residual:.2e}    {r.gram_offdiag_max:.2e}")
print("all checks passed:", rep.passed)
