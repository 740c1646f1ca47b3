"""Instance families: two lower-bound constructions and seeded random instances."""

from __future__ import annotations

import numpy as np

from corestable.model import AdditiveWeights, Instance, MultiWeights, make_instance
from corestable.preferences import ApprovalModel, BudgetModel, FacilityModel, RankingModel

KINDS = ("approval", "ranking", "budget", "facility")


def gen_cyclic(m: int, epsilon: float) -> Instance:
    """Cyclic instance: voter i ranks c_i > c_{i+1} > ... > c_{i-1}, K = 2 - epsilon/2.

    Unit weights, so only singletons are feasible when K < 2.  The cycle is
    encoded as additive utilities ``m - ((j - i) mod m)``.
    """
    if m < 2:
        raise ValueError("gen_cyclic needs m >= 2")
    if not 0 < epsilon < 2:
        raise ValueError("epsilon must lie in (0, 2)")
    j = np.arange(m)
    U = np.array([m - ((j - i) % m) for i in range(m)], dtype=np.float64)
    return make_instance(m, m, 2 - epsilon / 2, [1.0] * m, BudgetModel(U))


def grid_candidate(i: int, j: int, ell: int) -> int:
    return i * ell + j


def gen_ranking_grid(r: int, ell: int) -> Instance:
    """r x ell grid of candidates and voters, K = r - 1.

    Voter (i, j) ranks candidates by (row distance from i, column distance
    from j), both cyclic, compared lexicographically.
    """
    if r < 2 or ell < 1:
        raise ValueError("gen_ranking_grid needs r >= 2 and ell >= 1")
    m = r * ell
    orders = []
    for i in range(r):
        for j in range(ell):
            key = {
                grid_candidate(a, b, ell): ((a - i) % r, (b - j) % ell)
                for a in range(r)
                for b in range(ell)
            }
            orders.append(tuple(sorted(range(m), key=key.__getitem__)))
    return make_instance(m, m, r - 1, [1.0] * m, RankingModel(tuple(orders)))


def gen_random(
    kind: str,
    m: int,
    n: int,
    K: float,
    density: float = 0.5,
    seed=0,
    resources: int = 1,
) -> Instance:
    """Seeded random instance of the given preference kind.

    Approval and ranking instances get unit weights, budget instances draw
    weights from U[0.5, 1.5] and utilities from U[0, 1], facility instances
    place voters and candidates uniformly in the unit square.  With
    ``resources > 1`` the weights become a multi-constraint spec with one
    U[0.5, 1.5] vector per resource and limits drawn from U[0.75, 1.25] * K.
    """
    if m < 1 or n < 1 or K <= 0:
        raise ValueError("dimensions and K must be positive")
    rng = np.random.default_rng(seed)
    weights = [1.0] * m
    if kind == "approval":
        hits = rng.random((n, m)) < density
        pref = ApprovalModel(tuple(tuple(int(i) for i in np.flatnonzero(row)) for row in hits), m)
    elif kind == "ranking":
        pref = RankingModel(tuple(tuple(int(i) for i in rng.permutation(m)) for _ in range(n)))
    elif kind == "budget":
        weights = [float(x) for x in rng.uniform(0.5, 1.5, m)]
        pref = BudgetModel(rng.uniform(0.0, 1.0, (n, m)))
    elif kind == "facility":
        voters = rng.random((n, 2))
        sites = rng.random((m, 2))
        pref = FacilityModel(np.linalg.norm(voters[:, None, :] - sites[None, :, :], axis=2))
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if resources > 1:
        w = tuple(tuple(float(x) for x in rng.uniform(0.5, 1.5, m)) for _ in range(resources))
        limits = tuple(float(x) for x in rng.uniform(0.75, 1.25, resources) * K)
        spec = MultiWeights(w, limits)
    else:
        spec = AdditiveWeights(tuple(weights))
    return make_instance(m, n, K, spec, pref)
