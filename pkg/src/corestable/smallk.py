"""Exactly stable lotteries for unit-weight candidates and K in {1, 2, 3}.

Two sampling defenders answer an attacker's mixed strategy:

* `same_size_defender`: when every attacking committee has the same weight
  K', take the union of floor(K / K') independent draws from the attacker.
  A voter is beaten only if the attacking draw is strictly best among
  t + 1 i.i.d. draws, probability at most 1 / (t + 1).
* `k3_defender`: for K = 3 with a mix of singletons (mass p) and pairs,
  with probability p^2 union two singleton draws, else one singleton and
  one pair.  Per-voter success of the attacker is at most 1/2 - p/6.

`verify_exact_small_k` checks existence of an exactly stable lottery by
solving the stability game at c = 1.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from corestable.errors import TheoremViolationError
from corestable.lottery import GameSolution, _rng, exact_game
from corestable.model import Committee, Instance, as_committee, tol


def _normalized(dist):
    committees = [as_committee(S) for S, _ in dist]
    probs = np.array([float(x) for _, x in dist])
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("distribution must be normalised")
    return committees, probs / probs.sum()


@lru_cache(maxsize=256)
def _table(dist):
    committees, probs = _normalized(dist)
    cdf = list(itertools.accumulate(probs))
    cdf[-1] = 1.0
    return committees, cdf


def sample_from(dist, rng) -> Committee:
    """One draw from a ``((committee, prob), ...)`` distribution."""
    committees, cdf = _table(tuple(dist))
    return committees[min(bisect.bisect_right(cdf, rng.random()), len(cdf) - 1)]


@dataclass(frozen=True)
class SplitAttack:
    """Attacker mix split by committee size: mass `p` on singletons (delta1), the rest on pairs (delta2)."""

    p: float
    delta1: tuple[tuple[Committee, float], ...]
    delta2: tuple[tuple[Committee, float], ...]

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.p > 0:
            _normalized(self.delta1)
        if self.p < 1:
            _normalized(self.delta2)
        if any(len(S) != 1 for S, _ in self.delta1) or any(len(S) != 2 for S, _ in self.delta2):
            raise ValueError("delta1 holds singletons and delta2 holds pairs")

    @classmethod
    def from_mix(cls, mix) -> "SplitAttack":
        ones = [(as_committee(S), x) for S, x in mix if len(S) == 1 and x > 0]
        twos = [(as_committee(S), x) for S, x in mix if len(S) == 2 and x > 0]
        if len(ones) + len(twos) != sum(1 for _, x in mix if x > 0):
            raise ValueError("mix may only contain committees of size 1 and 2")
        p = sum(x for _, x in ones)
        q = sum(x for _, x in twos)
        total = p + q
        return cls(
            p / total,
            tuple((S, x / p) for S, x in ones) if p > 0 else (),
            tuple((S, x / q) for S, x in twos) if q > 0 else (),
        )

    @property
    def expected_weight(self) -> float:
        return self.p + 2 * (1 - self.p)

    def sample(self, rng) -> Committee:
        return sample_from(self.delta1 if rng.random() < self.p else self.delta2, rng)


def same_size_defender(inst: Instance, attacker, K: float | None = None, seed=None) -> Committee:
    """Union of floor(K / K') independent draws from `attacker`, all of whose committees weigh K'."""
    K = inst.K if K is None else K
    attacker = tuple((as_committee(S), float(x)) for S, x in attacker)
    key = ("same_size", attacker, K)
    t = inst.cache.get(key)
    if t is None:
        committees, probs = _normalized(attacker)
        weights = inst.weights_of(committees)[probs > 0]
        K1 = float(weights.max()) if weights.size else 0.0
        if K1 <= 0 or np.any(np.abs(weights - K1) > tol(K1)):
            raise ValueError("same_size_defender needs every attacking committee to have the same positive weight")
        if K1 > K + tol(K):
            raise ValueError("attacking weight exceeds K")
        t = inst.cache[key] = math.floor(K / K1 + 1e-9)
    rng = _rng(seed)
    members = set()
    for _ in range(t):
        members.update(sample_from(attacker, rng))
    return tuple(sorted(members))


def k3_defender(attack: SplitAttack, seed=None) -> Committee:
    """Defender for K = 3 against a genuine mix of singletons and pairs."""
    if not 0.0 < attack.p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1); use same_size_defender otherwise")
    rng = _rng(seed)
    if rng.random() < attack.p**2:
        first, second = sample_from(attack.delta1, rng), sample_from(attack.delta1, rng)
    else:
        first, second = sample_from(attack.delta1, rng), sample_from(attack.delta2, rng)
    return tuple(sorted(set(first) | set(second)))


def attack_success_rates(inst: Instance, attacker_sampler, defender_sampler, trials: int, seed=0) -> np.ndarray:
    """Per-voter Monte-Carlo estimate of Pr[S_a strictly preferred to S_d].

    Both samplers are called as ``sampler(rng)`` and must return committees;
    the attack and defence are drawn independently in every trial.
    """
    rng = np.random.default_rng(seed)
    pairs = [(attacker_sampler(rng), defender_sampler(rng)) for _ in range(trials)]
    distinct = sorted({S for pair in pairs for S in pair})
    index = {S: k for k, S in enumerate(distinct)}
    scores = inst.scores(distinct)
    a = np.array([index[p[0]] for p in pairs])
    d = np.array([index[p[1]] for p in pairs])
    wins = np.zeros(inst.n)
    # group identical (attack, defence) pairs to keep memory flat
    keys, counts = np.unique(a * len(distinct) + d, return_counts=True)
    for key, cnt in zip(keys, counts):
        wins += cnt * (scores[key // len(distinct)] > scores[key % len(distinct)])
    return wins / trials


def verify_exact_small_k(inst: Instance, K: float | None = None) -> GameSolution:
    """Exactly stable lottery for a unit-weight instance with K in {1, 2, 3}.

    Solves the stability game at c = 1 and raises `TheoremViolationError` if
    its value is not below -1e-7, which would contradict guaranteed existence.
    """
    K = inst.K if K is None else K
    if K not in (1, 2, 3):
        raise ValueError("K must be 1, 2 or 3")
    if not inst.is_unit_weight():
        raise ValueError("exact small-K existence only covers unit-weight candidates")
    sol = exact_game(inst, 1.0, K)
    if not sol.value < -1e-7:
        raise TheoremViolationError(f"no exactly stable lottery found at K = {K} (game value {sol.value!r})")
    return sol
