"""
Lower bounds for deterministic committees
=========================================

Two instance families where no committee is close to exactly stable.  We
generate them and let brute force find the best achievable c.
"""

import numpy as np

from corestable import (
    feasible_committees,
    find_worst_blocker,
    gen_cyclic,
    gen_ranking_grid,
    min_deterministic_c,
    verify_committee,
)

# cyclic instance: voter i ranks c_i first, then around the cycle
inst = gen_cyclic(10, 0.2)
c, S = min_deterministic_c(inst)
print(f"cyclic m=10: best committee {S} still needs c = {c:.4f}")

# a singleton is all we can afford; the voter just before it defects
report = verify_committee(inst, S, 1.5)
print("worst blocker of", S, "is", report.worst_blocker, "with ratio", round(report.worst_ratio, 4))

# the bound tends to 2 - eps as m grows
for m in (5, 10, 20, 40, 80):
    c, _ = min_deterministic_c(gen_cyclic(m, 0.2), L=1)
    print(f"  m={m:3d}  c={c:.4f}")

# grid instance with K = r - 1: rows and columns of a torus
for r, ell in [(3, 3), (4, 4), (5, 5)]:
    c, S = min_deterministic_c(gen_ranking_grid(r, ell), L=1)
    print(f"grid {r}x{ell}: c = {c:.4f}, e.g. committee {S}")

# per-row tally of worst ratios for every 3-committee on the 4x4 grid
grid = gen_ranking_grid(4, 4)
ratios = np.array([find_worst_blocker(grid, S, L=1)[1] for S in feasible_committees(grid) if len(S) == 3])
print("4x4 grid, size-3 committees: min ratio", ratios.min(), "mean", ratios.mean().round(3))
