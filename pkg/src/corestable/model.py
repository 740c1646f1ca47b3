"""Instances, committees, weights and lotteries.

A committee is a sorted tuple of distinct candidate indices.  Weights are
either additive (one value per candidate) or multi-resource; the latter is
reduced on construction to the single subadditive weight

    w(S) = max_j  w_j(S) * K / K_j

so that every downstream routine sees one weight function.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from corestable.errors import (
    InfeasibleCommitteeError,
    InstanceTooLargeError,
    InvalidCommitteeError,
    InvalidInstanceError,
    InvalidLotteryError,
)
from corestable.preferences import PreferenceModel, pad_committees, preference_from_dict

Committee = tuple  # sorted tuple[int, ...]

REL_TOL = 1e-9
PROB_TOL = 1e-9
MAX_ENUMERATION = 2_000_000


def tol(x: float) -> float:
    """Absolute slack for comparisons against a quantity of size `x`."""
    return REL_TOL * max(1.0, abs(x))


def as_committee(members: Iterable[int], m: int | None = None) -> Committee:
    S = tuple(sorted({int(i) for i in members}))
    if m is not None and S and (S[0] < 0 or S[-1] >= m):
        raise InvalidCommitteeError(f"committee {list(S)} has a member outside [0, {m})")
    return S


@dataclass(frozen=True)
class AdditiveWeights:
    s: tuple[float, ...]

    def matrix(self, K: float) -> np.ndarray:
        return np.asarray(self.s, dtype=np.float64).reshape(1, -1)

    def problems(self, m: int) -> list[str]:
        s = np.asarray(self.s, dtype=np.float64)
        if s.shape != (m,):
            return [f"weights: expected {m} candidate weights, got {len(self.s)}"]
        if not np.all(np.isfinite(s)):
            return ["weights: non-finite candidate weight"]
        if np.any(s < 0):
            return ["negative candidate weight"]
        return []

    def to_dict(self) -> dict:
        return {"mode": "additive", "s": [float(x) for x in self.s]}


@dataclass(frozen=True)
class MultiWeights:
    """Q resources: ``w[j][i]`` is candidate i's use of resource j, capped at ``limits[j]``."""

    w: tuple[tuple[float, ...], ...]
    limits: tuple[float, ...]

    def matrix(self, K: float) -> np.ndarray:
        W = np.asarray(self.w, dtype=np.float64)
        lim = np.asarray(self.limits, dtype=np.float64).reshape(-1, 1)
        return W / lim * K

    def problems(self, m: int) -> list[str]:
        if len(self.w) < 1:
            return ["weights: multi-constraint mode needs at least one resource"]
        if len({len(row) for row in self.w}) != 1:
            return ["weights: resource weight vectors have mismatched lengths"]
        if len(self.w[0]) != m:
            return [f"weights: resource vectors must have length {m}"]
        if len(self.limits) != len(self.w):
            return ["weights: need one limit per resource"]
        W = np.asarray(self.w, dtype=np.float64)
        if not np.all(np.isfinite(W)):
            return ["weights: non-finite candidate weight"]
        if np.any(W < 0):
            return ["negative candidate weight"]
        lim = np.asarray(self.limits, dtype=np.float64)
        if not np.all(np.isfinite(lim)) or np.any(lim <= 0):
            return ["weights: resource limits must be positive and finite"]
        return []

    def to_dict(self) -> dict:
        return {
            "mode": "multi",
            "w": [[float(x) for x in row] for row in self.w],
            "limits": [float(x) for x in self.limits],
        }


WeightSpec = Union[AdditiveWeights, MultiWeights]


@dataclass(frozen=True)
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> str | None:
        return self.violations[0] if self.violations else None


@dataclass(frozen=True, eq=False)
class Instance:
    """A committee selection instance.

    Construct through `make_instance` or `instance_from_dict` to get
    validation; the bare constructor trusts its arguments.
    """

    m: int
    n: int
    K: float
    weights: WeightSpec
    preference: PreferenceModel

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """Normalised ``(Q, m + 1)`` weight matrix; the last column pads committees."""
        W = self.weights.matrix(self.K)
        return np.hstack([W, np.zeros((W.shape[0], 1))])

    @cached_property
    def cache(self) -> dict:
        return {}

    def weights_of(self, committees) -> np.ndarray:
        committees = list(committees)
        if not committees:
            return np.zeros(0)
        W = self.weight_matrix
        idx = pad_committees(committees, self.m)
        total = np.zeros((W.shape[0], idx.shape[0]))
        for col in range(idx.shape[1]):
            total += W[:, idx[:, col]]
        return total.max(axis=0)

    def weight(self, S) -> float:
        return committee_weight(self, S)

    def scores(self, committees, voters=None) -> np.ndarray:
        s = self.preference.scores(list(committees))
        return s if voters is None else s[:, voters]

    def is_unit_weight(self) -> bool:
        return isinstance(self.weights, AdditiveWeights) and all(x == 1.0 for x in self.weights.s)

    def to_dict(self) -> dict:
        K = int(self.K) if float(self.K).is_integer() else float(self.K)
        return {
            "m": self.m,
            "n": self.n,
            "K": K,
            "weights": self.weights.to_dict(),
            "preference": self.preference.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def committee_weight(inst: Instance, S) -> float:
    """Weight of committee `S`; 0 for the empty committee."""
    S = tuple(S)
    if S and (min(S) < 0 or max(S) >= inst.m):
        raise InvalidCommitteeError(f"committee {list(S)} has a member outside [0, {inst.m})")
    if not S:
        return 0.0
    return float(inst.weights_of([S])[0])


def validate_instance(inst: Instance) -> ValidationReport:
    out = []
    if not isinstance(inst.m, (int, np.integer)) or inst.m < 1:
        out.append("m must be a positive integer")
    if not isinstance(inst.n, (int, np.integer)) or inst.n < 1:
        out.append("n must be a positive integer")
    if not (isinstance(inst.K, (int, float)) and math.isfinite(inst.K) and inst.K > 0):
        out.append("K must be positive and finite")
    if out:
        return ValidationReport(out)
    out.extend(inst.weights.problems(inst.m))
    out.extend(inst.preference.validate(inst.m, inst.n))
    return ValidationReport(out)


def make_instance(m, n, K, weights, preference, validate=True) -> Instance:
    if not isinstance(weights, (AdditiveWeights, MultiWeights)):
        weights = AdditiveWeights(tuple(float(x) for x in weights))
    inst = Instance(int(m), int(n), float(K), weights, preference)
    if validate:
        report = validate_instance(inst)
        if not report.ok:
            raise InvalidInstanceError(report.violations)
    return inst


def instance_from_dict(data: dict, validate=True) -> Instance:
    try:
        m, n, K = data["m"], data["n"], data["K"]
        wd = data["weights"]
        if wd["mode"] == "additive":
            weights = AdditiveWeights(tuple(float(x) for x in wd["s"]))
        elif wd["mode"] == "multi":
            weights = MultiWeights(
                tuple(tuple(float(x) for x in row) for row in wd["w"]),
                tuple(float(x) for x in wd["limits"]),
            )
        else:
            raise InvalidInstanceError([f"unknown weight mode {wd['mode']!r}"])
        pref = preference_from_dict(data["preference"], int(m))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInstanceError):
            raise
        raise InvalidInstanceError([f"malformed instance: {exc!r}"]) from exc
    return make_instance(m, n, K, weights, pref, validate=validate)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(inst.to_json())
        fh.write("\n")


# -- enumeration ------------------------------------------------------------


def committees_up_to(m: int, L: int | None = None, include_empty=False) -> list[Committee]:
    """Committees of size 1..L (all sizes when L is None), lexicographic within size."""
    top = m if L is None else min(L, m)
    count = sum(math.comb(m, k) for k in range(1, top + 1))
    if count > MAX_ENUMERATION:
        raise InstanceTooLargeError(f"{count} committees exceed the enumeration guard")
    out = [()] if include_empty else []
    for k in range(1, top + 1):
        out.extend(itertools.combinations(range(m), k))
    return out


def feasible_committees(inst: Instance, K: float | None = None, L: int | None = None) -> list[Committee]:
    """All committees (including the empty one) of weight at most K, sizes ≤ L."""
    K = inst.K if K is None else K
    key = ("feasible", K, L)
    if key in inst.cache:
        return inst.cache[key]
    slack = K + tol(K)
    # lower bound on the weight of any k-committee: k lightest per resource
    light = np.cumsum(np.sort(inst.weight_matrix[:, : inst.m], axis=1), axis=1).max(axis=0)
    top = inst.m if L is None else min(L, inst.m)
    out: list[Committee] = [()]
    total = 1
    for k in range(1, top + 1):
        if light[k - 1] > slack:
            break
        total += math.comb(inst.m, k)
        if total > MAX_ENUMERATION:
            raise InstanceTooLargeError(f"more than {MAX_ENUMERATION} candidate committees to enumerate")
        combos = list(itertools.combinations(range(inst.m), k))
        w = inst.weights_of(combos)
        out.extend(c for c, wc in zip(combos, w) if wc <= slack)
    inst.cache[key] = out
    return out


# -- lotteries --------------------------------------------------------------


@dataclass(frozen=True)
class Lottery:
    """A finite-support distribution over committees of weight at most `K`."""

    support: tuple[tuple[Committee, float], ...]
    K: float

    def __post_init__(self):
        seen = set()
        total = 0.0
        for S, x in self.support:
            if S in seen:
                raise InvalidLotteryError(f"committee {list(S)} appears twice in the support")
            seen.add(S)
            if not (x > 0 and math.isfinite(x)):
                raise InvalidLotteryError("support probabilities must be positive")
            total += x
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidLotteryError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_pairs(cls, pairs, K, normalize=False) -> "Lottery":
        """Merge duplicate committees, drop zero mass, and (optionally) renormalise."""
        mass: dict[Committee, float] = {}
        for S, x in pairs:
            S = as_committee(S)
            if x < 0:
                raise InvalidLotteryError("negative probability")
            if x > 0:
                mass[S] = mass.get(S, 0.0) + float(x)
        total = math.fsum(mass.values())
        if normalize:
            if total <= 0:
                raise InvalidLotteryError("lottery has no mass")
            mass = {S: x / total for S, x in mass.items()}
        return cls(tuple(sorted(mass.items())), float(K))

    @classmethod
    def point_mass(cls, S, K) -> "Lottery":
        return cls(((as_committee(S), 1.0),), float(K))

    @classmethod
    def uniform(cls, committees, K) -> "Lottery":
        committees = list(committees)
        return cls.from_pairs(((S, 1.0) for S in committees), K, normalize=True)

    @property
    def committees(self) -> list[Committee]:
        return [S for S, _ in self.support]

    @property
    def probs(self) -> np.ndarray:
        return np.array([x for _, x in self.support])

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "support": [{"committee": list(S), "prob": x} for S, x in self.support],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lottery":
        try:
            pairs = tuple((as_committee(e["committee"]), float(e["prob"])) for e in data["support"])
            return cls(pairs, float(data["K"]))
        except (KeyError, TypeError) as exc:
            raise InvalidLotteryError(f"malformed lottery: {exc!r}") from exc


def check_lottery_feasible(inst: Instance, lottery: Lottery) -> None:
    """Raise unless every support committee is valid and within ``lottery.K``."""
    for S in lottery.committees:
        as_committee(S, inst.m)
    w = inst.weights_of(lottery.committees)
    over = np.flatnonzero(w > lottery.K + tol(lottery.K))
    if over.size:
        S = lottery.committees[over[0]]
        raise InfeasibleCommitteeError(
            f"support committee {list(S)} has weight {w[over[0]]:g} > {lottery.K:g}"
        )
