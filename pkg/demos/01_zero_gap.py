"""
Critical points and their dual partners
=======================================

Newton finds critical points of the discrete real energy from a few
starts; each one is mapped to its dual point and the reduced dual value is
compared with the primal energy.
"""

import numpy as np

from gldual.dual import applicable_cases, build_dual_point, reduced_Jtilde
from gldual.grid_ops import Grid
from gldual.primal import GLProblem, eval_J, find_critical_point, initial_guess

# unit spacing on 32 interior nodes, a weak constant source
grid = Grid((33.0,), (32,))
p = GLProblem.create(grid, gamma=1.0, alpha=1.0, beta=1.0, f=0.1)
lo, hi = grid.laplacian_extremes
print(f"N = {grid.N}, K = {p.K:.4f}, lambda(-L) in [{lo:.5f}, {hi:.5f}]")

print(f"\n{'start':11s} {'class':17s} {'J(u0)':>14s} {'dual':>14s} {'gap':>9s}  cases")
for start in ("zero", "plus_bump", "minus_bump", "random"):
    cp = find_critical_point(p, initial_guess(p, start, seed=1))
    dp = build_dual_point(p, cp.u0)
    J = eval_J(p, cp.u0)
    if dp.in_Astar:
        dual, v0 = reduced_Jtilde(p, dp.v1s)
        gap = f"{J - dual:9.1e}"
        # the inner maximiser reproduces v0_hat node by node
        assert np.allclose(v0, dp.v0s, atol=1e-10)
    else:
        dual, gap = float("nan"), "   (no A*)"
    cases = ", ".join(c.value for c in applicable_cases(p, cp))
    print(f"{start:11s} {cp.hessian_class.value:17s} {J:14.8f} {dual:14.8f} {gap}  {cases}")

# with f = 0 the origin is always critical and the gap vanishes in closed form
q = GLProblem.create(grid, beta=0.02)
zero = np.zeros(grid.N)
print("\nf = 0, u0 = 0:")
print("  J(0)              =", eval_J(q, zero))
print("  alpha/2 beta^2 |O| =", 0.5 * q.alpha * q.beta**2 * grid.volume)
print("  dual value         =", reduced_Jtilde(q, build_dual_point(q, zero).v1s).value)
