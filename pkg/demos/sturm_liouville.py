"""Contraction solver and the dominant mode of the boundary-value map.

Run: python demos/sturm_liouville.py
"""
from fqsl import ProblemSpec, dominant_mode, lipschitz_bound, solve_picard
from fqsl.lattice import constant

with open(__file__.replace("sturm_liouville.py", "problem.json")) as fh:
    spec = ProblemSpec.from_json(fh.read())
prob = spec.to_problem()

for variant in ("sup", "l2_high"):
    b = lipschitz_bound(prob, spec.lam, variant)
    print(f"{variant:8s} L = {b.L:.4f}  threshold on ||r - lam w|| = {b.threshold:.4f}")

rep = solve_picard(prob, spec.lam)
print(f"converged in {rep.iterations} steps, ratio {rep.contraction_ratio:.4f}, residual {rep.fixed_point_residual:.2e}")

# the map is linear, so starting points differ only through the dominant direction
m1, g1 = dominant_mode(prob, spec.lam, prob.w)
m2, g2 = dominant_mode(prob, spec.lam, constant(prob.lattice, 1.0))
print(f"dominant growth {g1:.6f} vs {g2:.6f}")
