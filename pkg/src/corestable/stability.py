"""Pairwise scores and exhaustive stability verification.

A committee ``S_a`` c-blocks ``S`` when at least ``c * w(S_a) / K * n``
voters strictly prefer ``S_a``.  Every check here enumerates the blocker
space completely, either all nonempty committees or those with at most
``L`` members, so a "stable" verdict is a certificate within that bound.

The blocking ratio ``V(S, S_a) * K / (w(S_a) * n)`` is the largest c at
which ``S_a`` still blocks; reports carry the worst one found.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corestable.errors import DegenerateBlockerError, InfeasibleCommitteeError, InstanceTooLargeError
from corestable.model import (
    Committee,
    Instance,
    Lottery,
    as_committee,
    check_lottery_feasible,
    committee_weight,
    committees_up_to,
    feasible_committees,
    tol,
)

MAX_ALL_COMMITTEES_M = 25
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class StabilityReport:
    target_c: float
    stable: bool
    worst_ratio: float
    worst_blocker: Committee | None
    L: int | None = None  # None means every committee was enumerated

    def to_dict(self) -> dict:
        return {
            "target_c": self.target_c,
            "stable": self.stable,
            "worst_ratio": self.worst_ratio,
            "worst_blocker": None if self.worst_blocker is None else list(self.worst_blocker),
            "bound": "all" if self.L is None else {"L": self.L},
        }


def _voters(inst, voters):
    if voters is None:
        return None, inst.n
    voters = np.asarray(sorted(set(int(v) for v in voters)), dtype=np.intp)
    return voters, len(voters)


@dataclass(frozen=True)
class BlockerSpace:
    committees: list
    weights: np.ndarray
    scores: np.ndarray  # (len(committees), n), all voters


def blocker_space(inst: Instance, L: int | None = None) -> BlockerSpace:
    """All nonempty committees with at most `L` members, cached per instance."""
    key = ("blockers", L)
    if key not in inst.cache:
        if L is None and inst.m > MAX_ALL_COMMITTEES_M:
            raise InstanceTooLargeError(
                f"enumerating all committees needs m <= {MAX_ALL_COMMITTEES_M}, got m = {inst.m}"
            )
        if L is not None and L < 1:
            raise ValueError("L must be >= 1")
        committees = committees_up_to(inst.m, L)
        inst.cache[key] = BlockerSpace(committees, inst.weights_of(committees), inst.scores(committees))
    return inst.cache[key]


def pairwise_counts(defender_scores: np.ndarray, blocker_scores: np.ndarray) -> np.ndarray:
    """``out[d, a]`` = number of voters scoring blocker a strictly above defender d."""
    D, n = defender_scores.shape
    B = blocker_scores.shape[0]
    out = np.empty((D, B), dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(1, B * n))
    for lo in range(0, D, step):
        F = defender_scores[lo : lo + step]
        out[lo : lo + step] = (blocker_scores[None, :, :] > F[:, None, :]).sum(axis=2)
    return out


def _ratios(V, weights, K, nv):
    """Blocking ratios V*K/(w*nv); zero where V == 0, error on free blockers."""
    V = np.asarray(V, dtype=np.float64)
    degenerate = (weights <= 0) & (V > 0)
    if np.any(degenerate):
        raise DegenerateBlockerError(
            "a zero-weight committee is strictly preferred by some voter; blocking is undefined"
        )
    safe_w = np.where(weights > 0, weights, 1.0)
    return np.where(V > 0, V * K / (safe_w * nv), 0.0)


def _worst(row, committees):
    """Max of `row` with ties broken by the lexicographically smallest committee."""
    top = row.max() if row.size else 0.0
    if top <= 0:
        return None, 0.0
    tied = np.flatnonzero(row >= top - 1e-12 * max(1.0, top))
    best = min(tied, key=lambda i: list(committees[i]))
    return committees[best], float(row[best])


def pairwise_score(inst: Instance, S, S_a, voters=None) -> int:
    """Number of voters (optionally restricted to `voters`) strictly preferring `S_a` to `S`."""
    vs, _ = _voters(inst, voters)
    s = inst.scores([as_committee(S, inst.m), as_committee(S_a, inst.m)], vs)
    return int(np.count_nonzero(s[1] > s[0]))


def blocking_ratio(inst: Instance, S, S_a, voters=None, K: float | None = None) -> float:
    K = inst.K if K is None else K
    _, nv = _voters(inst, voters)
    V = pairwise_score(inst, S, S_a, voters)
    if V == 0:
        return 0.0
    w = committee_weight(inst, S_a)
    if w <= 0:
        raise DegenerateBlockerError(f"zero-weight committee {list(S_a)} is strictly preferred by {V} voters")
    return V * K / (w * nv)


def _blocker_view(inst, L, voters):
    space = blocker_space(inst, L)
    vs, nv = _voters(inst, voters)
    scores = space.scores if vs is None else space.scores[:, vs]
    return space, scores, vs, nv


def find_worst_blocker(inst: Instance, S, L: int | None = None, voters=None, K: float | None = None):
    """Return ``(blocker or None, ratio)`` maximising the blocking ratio against `S`."""
    K = inst.K if K is None else K
    S = as_committee(S, inst.m)
    space, bscores, vs, nv = _blocker_view(inst, L, voters)
    V = pairwise_counts(inst.scores([S], vs), bscores)[0]
    return _worst(_ratios(V, space.weights, K, nv), space.committees)


def _report(c, blocker, ratio, L):
    stable = blocker is None or ratio < c - tol(c)
    return StabilityReport(float(c), bool(stable), float(ratio), blocker, L)


def verify_committee(inst: Instance, S, c: float, L: int | None = None, voters=None, K: float | None = None):
    K = inst.K if K is None else K
    S = as_committee(S, inst.m)
    w = committee_weight(inst, S)
    if w > K + tol(K):
        raise InfeasibleCommitteeError(f"committee {list(S)} has weight {w:g} > K = {K:g}")
    blocker, ratio = find_worst_blocker(inst, S, L, voters, K)
    return _report(c, blocker, ratio, L)


def lottery_score(inst: Instance, lottery: Lottery, S_a, voters=None) -> float:
    """Expected number of voters strictly preferring `S_a` to a draw from `lottery`."""
    vs, _ = _voters(inst, voters)
    S_a = as_committee(S_a, inst.m)
    V = pairwise_counts(inst.scores(lottery.committees, vs), inst.scores([S_a], vs))[:, 0]
    return float(lottery.probs @ V)


def lottery_ratios(inst: Instance, lottery: Lottery, L: int | None = None, voters=None):
    """Blocking ratio of every enumerated blocker against `lottery`."""
    space, bscores, vs, nv = _blocker_view(inst, L, voters)
    V = pairwise_counts(inst.scores(lottery.committees, vs), bscores)
    expected = lottery.probs @ V
    return space, _ratios(expected, space.weights, lottery.K, nv)


def verify_lottery(inst: Instance, lottery: Lottery, c: float, L: int | None = None, voters=None):
    """Exhaustive stability check of `lottery` against blockers of size ≤ L."""
    check_lottery_feasible(inst, lottery)
    space, ratios = lottery_ratios(inst, lottery, L, voters)
    blocker, ratio = _worst(ratios, space.committees)
    return _report(c, blocker, ratio, L)


def min_deterministic_c(inst: Instance, L: int | None = None, voters=None):
    """Smallest worst blocking ratio over all feasible committees.

    Returns ``(ratio, committee)``; ties go to the lexicographically smallest
    committee.  Exhaustive on both sides, so only for small instances.
    """
    if L is None and inst.m > MAX_ALL_COMMITTEES_M:
        raise InstanceTooLargeError(f"exhaustive search needs m <= {MAX_ALL_COMMITTEES_M}")
    space, bscores, vs, nv = _blocker_view(inst, L, voters)
    feasible = feasible_committees(inst)
    V = pairwise_counts(inst.scores(feasible, vs), bscores)
    ratios = _ratios(V, space.weights[None, :], inst.K, nv)
    worst = ratios.max(axis=1) if ratios.shape[1] else np.zeros(len(feasible))
    best = worst.min()
    tied = np.flatnonzero(worst <= best + 1e-12 * max(1.0, best))
    arg = min(tied, key=lambda i: list(feasible[i]))
    return float(worst[arg]), feasible[arg]
