"""Fractional q-integrals and derivatives on the lattice {q^j}.

Run: python demos/operators.py
"""
import numpy as np

from fqsl import Lattice, caputo_left, ileft, iright, q_gamma, QContext
from fqsl.lattice import power

q, alpha = 0.5, 0.4
lat = Lattice(1.0, q)
f = power(lat, 0.5)

# left integral of x^0.5 against the power rule
g = ileft(alpha, f)
gq = lambda x: q_gamma(x, QContext(q))  # noqa: E731
rule = gq(1.5) / gq(1.5 + alpha) * lat.visible ** (0.5 + alpha)
print("power rule error:", np.max(np.abs(g.values - rule)))

# Caputo derivative undoes the integral
print("inversion error:", np.max(np.abs(caputo_left(alpha, g).values - f.values)))

# right integral, first few points
for x, v in zip(lat.visible[:5], iright(alpha, f).values[:5]):
    print(f"x = {x:.5f}   I^a_(1-) sqrt = {v:.12f}")
