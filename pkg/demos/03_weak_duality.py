"""
Weak duality and the global criterion
=====================================

For v0 in the feasible set C* the inner infimum over v1 bounds the energy
from below at every u.  At a critical point whose dual point lies in A*
and B*, the bound is attained and the point is a global minimiser.
"""

import numpy as np

from gldual.dual import (
    build_dual_point,
    duality_slack,
    global_criterion_sample,
    membership_C,
    weak_duality_sample,
)
from gldual.grid_ops import Grid
from gldual.primal import GLProblem, eval_J, find_critical_point, initial_guess

p = GLProblem.create(Grid((17.0,), (16,)), beta=1.0, f=0.1)

rep = weak_duality_sample(p, n_samples=1000, seed=0)
print(f"1000 random (u, v0): min slack {rep.min_slack:.3e}, violations {rep.violations}")
counts, edges = np.histogram(np.log10(np.maximum(rep.slacks, 1e-16)), bins=8)
for c, lo, hi in zip(counts, edges, edges[1:]):
    print(f"  log10 slack in [{lo:5.1f}, {hi:5.1f}): {'#' * (c // 10)} {c}")

# the three critical points from the usual starts
for start in ("plus_bump", "minus_bump", "zero"):
    cp = find_critical_point(p, initial_guess(p, start))
    dp = build_dual_point(p, cp.u0)
    b1, b2 = membership_C(p, dp.v0s)
    line = f"\n{start:10s} J = {eval_J(p, cp.u0):.6f}, v0_hat in B1: {b1}, in B2: {b2}"
    if b1 and b2:
        tight = duality_slack(p, cp.u0, dp.v0s)
        g = global_criterion_sample(p, cp, n_samples=1000)
        line += f"\n  slack at (u0, v0_hat) {tight:.1e}; min J(u) - J(u0) over 1000 u: {g.min_slack:.2e}"
    print(line)
