"""Approximately stable lotteries.

Stability of a lottery is a zero-sum game: the defender picks a lottery over
feasible committees, the attacker a committee ``S_a``, and the attacker's
payoff is ``V(S_d, S_a) - c * w(S_a) / K * n``.  A lottery is c-stable
exactly when the defender holds the attacker strictly below zero.

Two solvers are provided.  `mwu_lottery` runs multiplicative weights for the
attacker against the dependent-rounding defender response, returning the
empirical mixture of defender plays, and only returns a lottery that passes
`verify_lottery`.  `exact_game` solves the full matrix game by double
oracle with a linear-programming subgame solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from corestable.errors import (
    ConvergenceError,
    DegenerateAttackerError,
    InstanceTooLargeError,
    InvalidLotteryError,
)
from corestable.model import (
    Committee,
    Instance,
    Lottery,
    as_committee,
    committees_up_to,
    feasible_committees,
    tol,
)
from corestable.stability import _voters, blocker_space, pairwise_counts, verify_lottery

MWU_GUARD = 2_000_000
GAME_GUARD = 5000


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


# -- dependent rounding -----------------------------------------------------


@dataclass(frozen=True)
class FractionalVector:
    """Inclusion values in [0, 1] with item weights and a weight cap."""

    values: tuple[float, ...]
    weights: tuple[float, ...]
    cap: float = math.inf

    def __post_init__(self):
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights must have the same length")
        if any(not (0.0 <= p <= 1.0) for p in self.values):
            raise ValueError("fractional values must lie in [0, 1]")
        if any(not (w >= 0 and math.isfinite(w)) for w in self.weights):
            raise ValueError("item weights must be nonnegative and finite")
        load = math.fsum(p * w for p, w in zip(self.values, self.weights))
        if load > self.cap + tol(self.cap if math.isfinite(self.cap) else 1.0):
            raise ValueError(f"weighted sum {load:g} exceeds the cap {self.cap:g}")


def _snap(x):
    if x < 1e-12:
        return 0.0
    if x > 1.0 - 1e-12:
        return 1.0
    return x


def dependent_round(p: FractionalVector, seed=None) -> np.ndarray:
    """Round `p` so that at most one entry stays fractional.

    Pairs the two lowest-indexed fractional entries and shifts mass between
    them along the direction that keeps ``sum(X_i * w_i)`` fixed, choosing
    the direction with probabilities that keep each ``E[X_i] = p_i``.  Each
    step fixes at least one entry to 0 or 1.  Zero-weight entries do not
    affect the weighted sum and are rounded independently.
    """
    rng = _rng(seed)
    X = [float(v) for v in p.values]
    w = list(p.weights)
    frac = []
    for i, x in enumerate(X):
        if 0.0 < x < 1.0:
            if w[i] == 0:
                X[i] = 1.0 if rng.random() < x else 0.0
            else:
                frac.append(i)
    frac.reverse()  # pop() yields the lowest index
    while len(frac) >= 2:
        i, j = frac.pop(), frac.pop()
        ratio = w[i] / w[j]
        up = min(1.0 - X[i], X[j] / ratio)
        down = min(X[i], (1.0 - X[j]) / ratio)
        if rng.random() * (up + down) < down:
            X[i], X[j] = _snap(X[i] + up), _snap(X[j] - up * ratio)
        else:
            X[i], X[j] = _snap(X[i] - down), _snap(X[j] + down * ratio)
        # survivors go back in index order
        for k in (j, i):
            if 0.0 < X[k] < 1.0:
                frac.append(k)
    return np.array(X)


# -- defender best response -------------------------------------------------


def _prune(mix_committees, mix_probs, weights, K):
    keep = weights <= K / 2 + tol(K)
    probs = mix_probs[keep]
    total = probs.sum()
    if total <= 0:
        return [], np.zeros(0), np.zeros(0)
    return [S for S, k in zip(mix_committees, keep) if k], probs / total, weights[keep]


def _defend(committees, probs, weights, K, rng):
    """Core of `defender_response` on already-pruned arrays."""
    beta = float(probs @ weights) / K
    if beta <= 0:
        raise DegenerateAttackerError("attacker committees all have zero weight")
    p = np.minimum(1.0, probs / (2 * beta))
    X = dependent_round(FractionalVector(tuple(p), tuple(weights), K / 2), rng)
    members = set()
    for S, x in zip(committees, X):
        if x > 0:
            members.update(S)
    return tuple(sorted(members))


def defender_response(inst: Instance, attacker_mix, K: float | None = None, seed=None) -> Committee:
    """Answer an attacker's mixed strategy with one committee of weight ≤ K.

    Committees heavier than K/2 are dropped (they can never 2-block), the
    rest are included with probability ``min(1, alpha_i / (2 beta))`` via
    dependent rounding, where ``beta`` is the attacker's expected weight
    over K.  Returns the union of every committee with ``X_i > 0``.
    """
    K = inst.K if K is None else K
    committees = [as_committee(S, inst.m) for S, _ in attacker_mix]
    probs = np.array([float(x) for _, x in attacker_mix])
    if abs(probs.sum() - 1.0) > 1e-9 or np.any(probs < 0):
        raise InvalidLotteryError("attacker mix must be a probability distribution")
    committees, probs, weights = _prune(committees, probs, inst.weights_of(committees), K)
    if not committees:
        return ()
    return _defend(committees, probs, weights, K, _rng(seed))


# -- multiplicative weights -------------------------------------------------


def _fallback_lottery(inst, K, L, vs, nv):
    """Point mass for the case where no attacker committee weighs ≤ K/2.

    Every lottery is then 2-stable; pick the small feasible committee whose
    largest pairwise loss against other small feasible committees is least.
    """
    small = feasible_committees(inst, K, L)
    scores = inst.scores(small, vs)
    V = pairwise_counts(scores, scores)
    worst = V.max(axis=1)
    best = np.flatnonzero(worst == worst.min())
    S = min((small[i] for i in best), key=list)
    return Lottery.point_mass(S, K)


@dataclass
class MWUResult:
    lottery: Lottery
    measured_c: float
    rounds: int
    attempts: int
    history: list = field(default_factory=list)


def mwu_solve(
    inst: Instance,
    K: float | None = None,
    L: int = 1,
    eps: float = 0.1,
    seed=0,
    max_rounds: int | None = None,
    voters=None,
    retries: int = 3,
) -> MWUResult:
    """Run MWU and return the certified lottery with diagnostics.

    See `mwu_lottery` for the contract.
    """
    K = inst.K if K is None else K
    if L < 1:
        raise ValueError("L must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if inst.m**L > MWU_GUARD:
        raise InstanceTooLargeError(f"m^L = {inst.m ** L} exceeds the MWU guard {MWU_GUARD}")
    rng = _rng(seed)
    vs, nv = _voters(inst, voters)
    c = 2.0 + eps

    space = blocker_space(inst, L)
    keep = (space.weights > 0) & (space.weights <= K / 2 + tol(K))
    attackers = [S for S, k in zip(space.committees, keep) if k]
    if not attackers:
        lot = _fallback_lottery(inst, K, L, vs, nv)
        report = verify_lottery(inst, lot, c, L, voters)
        if not report.stable:
            raise ConvergenceError("fallback lottery failed verification", lot, report.worst_ratio)
        return MWUResult(lot, report.worst_ratio, 0, 0)

    a_scores = space.scores[keep] if vs is None else space.scores[keep][:, vs]
    a_weights = space.weights[keep]
    threshold = c * a_weights / K * nv  # expected V must stay strictly below
    penalty = 2.0 * a_weights / K  # payoff offset, per voter
    eta = eps / 8.0
    if max_rounds is None:
        max_rounds = math.ceil(64 * math.log(max(len(attackers), 2)) / eps**2)

    best = None
    rounds_total = 0
    for attempt in range(retries + 1):
        budget = max_rounds * 2**attempt
        logw = np.zeros(len(attackers))
        counts: dict[Committee, int] = {}
        cum_V = np.zeros(len(attackers))
        cache: dict[Committee, np.ndarray] = {}
        for t in range(1, budget + 1):
            mix = np.exp(logw - logw.max())
            mix /= mix.sum()
            S_d = _defend(attackers, mix, a_weights, K, rng)
            V = cache.get(S_d)
            if V is None:
                d_score = inst.scores([S_d], vs)
                V = (a_scores > d_score).sum(axis=1).astype(np.float64)
                cache[S_d] = V
            counts[S_d] = counts.get(S_d, 0) + 1
            cum_V += V
            logw += eta * (V / nv - penalty)
            # stop as soon as the empirical mixture clears every threshold
            if np.all(cum_V / t < threshold - tol(float(threshold.max()))):
                break
        rounds_total += t
        lot = Lottery.from_pairs(((S, k / t) for S, k in counts.items()), K, normalize=True)
        report = verify_lottery(inst, lot, c, L, voters)
        if best is None or report.worst_ratio < best[1]:
            best = (lot, report.worst_ratio)
        if report.stable:
            return MWUResult(lot, report.worst_ratio, rounds_total, attempt + 1)
    raise ConvergenceError(
        f"MWU did not certify a ({c:g}, {L})-stable lottery after {retries + 1} attempts",
        best[0],
        best[1],
    )


def mwu_lottery(
    inst: Instance,
    K: float | None = None,
    L: int = 1,
    eps: float = 0.1,
    seed=0,
    max_rounds: int | None = None,
    voters=None,
    retries: int = 3,
) -> Lottery:
    """A (2 + eps, L)-approximately stable lottery over committees of weight ≤ K.

    The attacker keeps multiplicative weights over nonempty committees of at
    most L members and weight at most K/2, with per-round payoff
    ``(V(S_d, S_a) - 2 w(S_a)/K n) / n`` and step ``eps / 8``; the defender
    plays one sampled `defender_response` per round.  The result is the
    empirical mixture of defender plays and always passes
    ``verify_lottery(c=2+eps, L)``.  Rounds double on each retry; after
    `retries` failed retries a `ConvergenceError` carries the best lottery.
    """
    return mwu_solve(inst, K, L, eps, seed, max_rounds, voters, retries).lottery


# -- exact matrix game ------------------------------------------------------


@dataclass(frozen=True)
class GameSolution:
    value: float
    attacker_mix: tuple[tuple[Committee, float], ...]
    defender_lottery: Lottery
    iterations: int
    certified: bool
    lower_bound: float = -math.inf

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower_bound": self.lower_bound,
            "attacker_mix": [{"committee": list(S), "prob": x} for S, x in self.attacker_mix],
            "defender_lottery": self.defender_lottery.to_dict(),
            "iterations": self.iterations,
            "certified": self.certified,
        }


def _solve_subgame(M):
    """Defender (rows) minimises, attacker (columns) maximises.  Returns (x, y)."""
    D, A = M.shape
    # variables: x_1..x_D, v ; minimise v s.t. M^T x - v <= 0, sum x = 1
    cost = np.zeros(D + 1)
    cost[-1] = 1.0
    A_ub = np.hstack([M.T, -np.ones((A, 1))])
    A_eq = np.zeros((1, D + 1))
    A_eq[0, :D] = 1.0
    bounds = [(0, None)] * D + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(A), A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"subgame LP failed: {res.message}")
    x = np.clip(res.x[:D], 0, None)
    y = np.clip(-res.ineqlin.marginals, 0, None)
    return x / x.sum(), (y / y.sum() if y.sum() > 0 else np.full(A, 1.0 / A))


def exact_game(
    inst: Instance,
    c: float,
    K: float | None = None,
    defender_L: int | None = None,
    attacker_L: int | None = None,
    voters=None,
    tol_gap: float = 1e-7,
    max_iterations: int = 10_000,
) -> GameSolution:
    """Solve the stability game exactly over enumerated strategy spaces.

    The defender plays feasible committees (weight ≤ K, at most
    `defender_L` members), the attacker nonempty committees with at most
    `attacker_L` members.  For c ≥ 2 attacker committees heavier than K/2
    are dropped.  Double oracle: solve the restricted game by LP, add each
    side's best response over the full space, stop once the defender's
    guaranteed value and the attacker's guaranteed value differ by less than
    `tol_gap`.  ``value`` is the defender's guarantee, i.e. the largest
    attacker payoff against the returned lottery, so ``value < 0`` certifies
    that lottery as c-stable.
    """
    K = inst.K if K is None else K
    vs, nv = _voters(inst, voters)
    defenders = feasible_committees(inst, K, defender_L)
    attackers = committees_up_to(inst.m, attacker_L)
    a_weights = inst.weights_of(attackers)
    if c >= 2:
        keep = a_weights <= K / 2 + tol(K)
        if keep.any():
            attackers = [S for S, k in zip(attackers, keep) if k]
            a_weights = a_weights[keep]
    if len(defenders) > GAME_GUARD or len(attackers) > GAME_GUARD:
        raise InstanceTooLargeError(
            f"{len(defenders)} defender / {len(attackers)} attacker strategies exceed the guard {GAME_GUARD}"
        )
    d_scores = inst.scores(defenders, vs)
    a_scores = inst.scores(attackers, vs)
    offset = c * a_weights / K * nv

    def column(idx):
        return pairwise_counts(d_scores, a_scores[idx]) - offset[idx]

    def row(idx):
        return pairwise_counts(d_scores[idx], a_scores) - offset[None, :]

    rows = {0: row([0])[0]}
    d_set = [0]
    a_set = [int(np.argmax(rows[0]))]
    upper = lower = None
    for it in range(1, max_iterations + 1):
        M = np.array([rows[d][a_set] for d in d_set])
        x, y = _solve_subgame(M)
        full_rows = np.array([rows[d] for d in d_set])
        attack_payoffs = x @ full_rows  # every attacker against the defender mix
        defend_payoffs = column(a_set) @ y  # every defender against the attacker mix
        upper = float(attack_payoffs.max())
        lower = float(defend_payoffs.min())
        if upper - lower < tol_gap:
            break
        a_new = int(np.argmax(attack_payoffs))
        d_new = int(np.argmin(defend_payoffs))
        grew = False
        if a_new not in a_set:
            a_set.append(a_new)
            grew = True
        if d_new not in d_set:
            d_set.append(d_new)
            rows[d_new] = row([d_new])[0]
            grew = True
        if not grew:
            break
    lottery = Lottery.from_pairs(((defenders[d], xd) for d, xd in zip(d_set, x)), K, normalize=True)
    attacker_mix = tuple(
        sorted((attackers[a], float(ya)) for a, ya in zip(a_set, y) if ya > 0)
    )
    # recompute the guarantee on the cleaned-up lottery
    V = pairwise_counts(inst.scores(lottery.committees, vs), a_scores)
    value = float((lottery.probs @ V - offset).max())
    return GameSolution(
        value=value,
        attacker_mix=attacker_mix,
        defender_lottery=lottery,
        iterations=it,
        certified=bool(value - lower < tol_gap),
        lower_bound=lower,
    )
