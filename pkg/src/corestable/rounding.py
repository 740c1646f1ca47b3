"""Iterated rounding of stable lotteries into a single committee.

Each round asks a lottery provider for a 2-approximately stable lottery for
the voters still uncovered at a budget that shrinks geometrically, picks a
support committee that sits high enough in most of those voters' rankings,
removes the voters it covers and adds it to the output.  With the default
``alpha = 1/2, beta = 1/4`` the union is 32-approximately stable when the
provider is exactly 2-stable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from corestable.lottery import exact_game, mwu_solve
from corestable.model import Committee, Instance, Lottery, committee_weight, tol
from corestable.stability import blocker_space

LotteryProvider = Callable[[np.ndarray, float], Lottery]


@dataclass(frozen=True)
class RoundingParams:
    alpha: float = 0.5
    beta: float = 0.25
    epsilon: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.beta <= self.alpha < 1:
            raise ValueError("need 0 < beta <= alpha < 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def analysis_bound(alpha: float, beta: float, provider_c: float = 2.0) -> float:
    """Approximation factor proven for Iterated Rounding with a `provider_c`-stable provider.

    ``2 alpha / (beta (1 - alpha) (alpha - beta))`` scaled by ``provider_c / 2``;
    equals 32 at (1/2, 1/4) with a 2-stable provider.
    """
    if beta >= alpha:
        return math.inf
    return provider_c / 2 * 2 * alpha / (beta * (1 - alpha) * (alpha - beta))


@dataclass
class RoundRecord:
    t: int
    voters: int
    K: float
    committee: list
    removed: int
    support: int
    provider_c: float | None = None


@dataclass
class RoundingTrace:
    rounds: list[RoundRecord] = field(default_factory=list)
    alpha: float = 0.5
    beta: float = 0.25
    provider_c: float = 2.0

    @property
    def theoretical_bound(self) -> float:
        return analysis_bound(self.alpha, self.beta, self.provider_c)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r)) + "\n" for r in self.rounds)


def _mass_at_least(lottery, scores_support, score_S):
    """Mass of support committees weakly preferred to S, per voter."""
    weakly_above = scores_support >= score_S[None, :]
    return lottery.probs @ weakly_above


def _mass_at_most(lottery, scores_support, score_S):
    weakly_below = scores_support <= score_S[None, :]
    return lottery.probs @ weakly_below


def good_set_member(inst: Instance, lottery: Lottery, v: int, S, beta: float) -> bool:
    """True when the lottery mass weakly above S, for voter v, is at most 1 - beta."""
    sup = inst.scores(lottery.committees)[:, [v]]
    mass = _mass_at_least(lottery, sup, inst.scores([S])[0, [v]])[0]
    return bool(mass <= 1 - beta + 1e-12)


def bad_set_member(inst: Instance, lottery: Lottery, v: int, S, beta: float) -> bool:
    """True when the lottery mass weakly below S, for voter v, is at most beta."""
    sup = inst.scores(lottery.committees)[:, [v]]
    mass = _mass_at_most(lottery, sup, inst.scores([S])[0, [v]])[0]
    return bool(mass <= beta + 1e-12)


def coverage(inst: Instance, lottery: Lottery, voters, beta: float) -> np.ndarray:
    """``out[k, i]``: support committee k is outside voter ``voters[i]``'s bad set."""
    voters = np.asarray(voters, dtype=np.intp)
    sup = inst.scores(lottery.committees, voters)
    # below[k, l, i]: committee l weakly below committee k for voter i
    below = sup[None, :, :] <= sup[:, None, :]
    mass_below = np.einsum("l,kli->ki", lottery.probs, below)
    return mass_below > beta + 1e-12


def select_representative(inst: Instance, lottery: Lottery, voters, beta: float) -> tuple[Committee, np.ndarray]:
    """Support committee covering at least ceil((1 - beta) |voters|) voters.

    Returns the committee and the boolean coverage mask over `voters`.  Picks
    the highest coverage, then the lexicographically smallest committee.
    """
    voters = np.asarray(voters, dtype=np.intp)
    cov = coverage(inst, lottery, voters, beta)
    counts = cov.sum(axis=1)
    need = math.ceil((1 - beta) * len(voters) - 1e-9)
    top = counts.max()
    if top < need:
        raise AssertionError(
            f"no support committee covers {need} of {len(voters)} voters (best {top}); this is a bug"
        )
    k = min(np.flatnonzero(counts == top), key=lambda i: list(lottery.committees[i]))
    return lottery.committees[k], cov[k]


def _nonempty_fits(inst, K):
    light = inst.weight_matrix[:, : inst.m].max(axis=0).min()
    return light <= K + tol(K)


def iterated_rounding(
    inst: Instance,
    params: RoundingParams | None = None,
    provider: LotteryProvider | None = None,
    check_claims_L: int | None = None,
):
    """Run Iterated Rounding and return ``(T_f, trace)``.

    `provider(voters, K)` must return a lottery over committees of weight at
    most K that is approximately stable for `voters`.  Defaults to
    `MWUProvider` with L = 1 and the params' epsilon.  Rounds where no single
    candidate fits the budget use the point mass on the empty committee.

    With `check_claims_L` set, every round also checks that each covered voter
    only prefers (size ≤ L) committees from her good set, and raises
    AssertionError otherwise.
    """
    params = params or RoundingParams()
    if provider is None:
        provider = MWUProvider(inst, L=1, eps=params.epsilon, seed=params.seed)
    trace = RoundingTrace(alpha=params.alpha, beta=params.beta, provider_c=getattr(provider, "guarantee", 2.0))
    remaining = np.arange(inst.n)
    members: set[int] = set()
    K_t = (1 - params.alpha) * inst.K
    t = 0
    while remaining.size:
        if _nonempty_fits(inst, K_t):
            lottery = provider(remaining, K_t)
        else:
            lottery = Lottery.point_mass((), K_t)
        S_t, covered = select_representative(inst, lottery, remaining, params.beta)
        if check_claims_L is not None:
            _check_claim(inst, lottery, remaining[covered], S_t, params.beta, check_claims_L)
        trace.rounds.append(
            RoundRecord(
                t=t,
                voters=int(remaining.size),
                K=K_t,
                committee=list(S_t),
                removed=int(covered.sum()),
                support=len(lottery.support),
                provider_c=getattr(provider, "last_measured_c", None),
            )
        )
        remaining = remaining[~covered]
        members.update(S_t)
        K_t *= params.alpha
        t += 1
    T_f = tuple(sorted(members))
    assert committee_weight(inst, T_f) <= inst.K + tol(inst.K)
    return T_f, trace


def _check_claim(inst, lottery, covered_voters, S, beta, L):
    """If S is outside v's bad set, anything v strictly prefers to S is in her good set."""
    space = blocker_space(inst, L)
    sup = inst.scores(lottery.committees, covered_voters)
    s = inst.scores([S], covered_voters)[0]
    preferred = space.scores[:, covered_voters] > s[None, :]
    for a, i in zip(*np.nonzero(preferred)):
        mass = lottery.probs @ (sup[:, i] >= space.scores[a, covered_voters[i]])
        if mass > 1 - beta + 1e-12:
            raise AssertionError(
                f"voter {covered_voters[i]} prefers {space.committees[a]} to {S} outside her good set"
            )


class MWUProvider:
    """Lottery provider backed by `mwu_solve`; records the measured c of each call."""

    def __init__(self, inst: Instance, L: int = 1, eps: float = 0.1, seed=0, max_rounds=None):
        self.inst = inst
        self.L = L
        self.eps = eps
        self.rng = np.random.default_rng(seed)
        self.max_rounds = max_rounds
        self.guarantee = 2.0 + eps
        self.last_measured_c = None

    def __call__(self, voters, K):
        result = mwu_solve(self.inst, K, self.L, self.eps, self.rng, self.max_rounds, voters)
        self.last_measured_c = result.measured_c
        return result.lottery


class ExactProvider:
    """Lottery provider backed by `exact_game` at c = 2."""

    guarantee = 2.0

    def __init__(self, inst: Instance, c: float = 2.0, attacker_L: int | None = None):
        self.inst = inst
        self.c = c
        self.attacker_L = attacker_L
        self.guarantee = c
        self.last_measured_c = None

    def __call__(self, voters, K):
        sol = exact_game(self.inst, self.c, K, attacker_L=self.attacker_L, voters=voters)
        if sol.value >= 0:
            raise RuntimeError(f"no {self.c}-stable lottery found (value {sol.value:g})")
        self.last_measured_c = None
        return sol.defender_lottery
