"""Monotone voter preference models over committees.

Every model reduces a committee to one number per voter, higher being
better.  Two committees are compared by that number alone, so ties are
exact equality of the per-voter score.  Scores are computed in batches so
that enumeration-heavy code (stability checks, game matrices) stays
vectorised.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from corestable.errors import UnsupportedCommitteeError


class Ordering(enum.Enum):
    FIRST_STRICT = "first"
    SECOND_STRICT = "second"
    TIE = "tie"


def pad_committees(committees, fill):
    """Stack committees of mixed size into an int array padded with `fill`."""
    committees = [tuple(S) for S in committees]
    width = max((len(S) for S in committees), default=0)
    out = np.full((len(committees), max(width, 1)), fill, dtype=np.intp)
    for row, S in enumerate(committees):
        out[row, : len(S)] = S
    return out


class PreferenceModel:
    """Base class.  Subclasses implement `scores` and `validate`."""

    kind = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    def scores(self, committees) -> np.ndarray:
        """Per-voter scores, shape ``(len(committees), n)``."""
        raise NotImplementedError

    def score(self, S) -> np.ndarray:
        return self.scores([S])[0]

    def validate(self, m: int, n: int) -> list[str]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ApprovalModel(PreferenceModel):
    """Voter v prefers committees containing more of her approved candidates."""

    sets: tuple[tuple[int, ...], ...]
    m: int
    kind = "approval"

    @property
    def n(self):
        return len(self.sets)

    @property
    def _matrix(self):
        A = self.__dict__.get("_approve")
        if A is None:
            A = np.zeros((self.n, self.m + 1), dtype=np.float64)
            for v, approved in enumerate(self.sets):
                A[v, [i for i in approved if 0 <= i < self.m]] = 1.0
            self.__dict__["_approve"] = A
        return A

    def scores(self, committees):
        idx = pad_committees(committees, self.m)
        # (n, N, width) -> (N, n)
        return self._matrix[:, idx].sum(axis=2).T

    def validate(self, m, n):
        out = []
        if self.m != m:
            out.append(f"approval: model built for {self.m} candidates, instance has {m}")
        if len(self.sets) != n:
            out.append(f"approval: expected {n} voter sets, got {len(self.sets)}")
        for v, A in enumerate(self.sets):
            if any(not (0 <= i < m) for i in A):
                out.append(f"approval: voter {v} approves a candidate outside [0, {m})")
                break
        return out

    def to_dict(self):
        return {"type": "approval", "sets": [sorted(A) for A in self.sets]}


@dataclass(frozen=True, eq=False)
class RankingModel(PreferenceModel):
    """Voter v compares committees by the position of her favourite member.

    ``orders[v]`` lists candidates from most to least preferred.  The empty
    committee ranks strictly below every nonempty one.
    """

    orders: tuple[tuple[int, ...], ...]
    kind = "ranking"

    @property
    def n(self):
        return len(self.orders)

    @property
    def positions(self) -> np.ndarray:
        pos = self.__dict__.get("_positions")
        if pos is None:
            m = len(self.orders[0]) if self.orders else 0
            # padding column m gets position m, worse than any candidate
            pos = np.full((self.n, m + 1), m, dtype=np.float64)
            for v, order in enumerate(self.orders):
                pos[v, list(order)] = np.arange(len(order))
            self.__dict__["_positions"] = pos
        return pos

    def scores(self, committees):
        pos = self.positions
        idx = pad_committees(committees, pos.shape[1] - 1)
        return -pos[:, idx].min(axis=2).T

    def validate(self, m, n):
        out = []
        if len(self.orders) != n:
            out.append(f"ranking: expected {n} orders, got {len(self.orders)}")
        for v, order in enumerate(self.orders):
            if sorted(order) != list(range(m)):
                out.append(f"ranking: order of voter {v} is not a permutation of [0, {m})")
                break
        return out

    def to_dict(self):
        return {"type": "ranking", "orders": [list(o) for o in self.orders]}


@dataclass(frozen=True, eq=False)
class BudgetModel(PreferenceModel):
    """Additive utilities: u_v(S) is the sum of ``utilities[v][i]`` over S."""

    utilities: np.ndarray
    kind = "budget"

    def __post_init__(self):
        object.__setattr__(self, "utilities", np.asarray(self.utilities, dtype=np.float64))

    @property
    def n(self):
        return self.utilities.shape[0]

    @property
    def _padded(self):
        U = self.__dict__.get("_pad")
        if U is None:
            U = np.hstack([self.utilities, np.zeros((self.n, 1))])
            self.__dict__["_pad"] = U
        return U

    def scores(self, committees):
        U = self._padded
        idx = pad_committees(committees, U.shape[1] - 1)
        # accumulate member by member so every batch sums in the same order
        total = np.zeros((idx.shape[0], self.n))
        for col in range(idx.shape[1]):
            total += U[:, idx[:, col]].T
        return total

    def validate(self, m, n):
        U = self.utilities
        out = []
        if U.ndim != 2 or U.shape != (n, m):
            out.append(f"budget: utilities must have shape ({n}, {m}), got {U.shape}")
            return out
        if not np.all(np.isfinite(U)):
            out.append("budget: utilities must be finite")
        elif np.any(U < 0):
            out.append("budget: negative utility")
        return out

    def to_dict(self):
        return {"type": "budget", "utilities": self.utilities.tolist()}


@dataclass(frozen=True, eq=False)
class FacilityModel(PreferenceModel):
    """Voter v prefers committees with a closer nearest facility.

    Distances are taken as given; the triangle inequality is not required.
    """

    distances: np.ndarray
    kind = "facility"

    def __post_init__(self):
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=np.float64))

    @property
    def n(self):
        return self.distances.shape[0]

    @property
    def _padded(self):
        D = self.__dict__.get("_pad")
        if D is None:
            D = np.hstack([self.distances, np.full((self.n, 1), np.inf)])
            self.__dict__["_pad"] = D
        return D

    def scores(self, committees):
        D = self._padded
        idx = pad_committees(committees, D.shape[1] - 1)
        return -D[:, idx].min(axis=2).T

    def validate(self, m, n):
        D = self.distances
        if D.ndim != 2 or D.shape != (n, m):
            return [f"facility: distances must have shape ({n}, {m}), got {D.shape}"]
        if np.any(np.isnan(D)) or np.any(D < 0):
            return ["facility: distances must be nonnegative"]
        return []

    def to_dict(self):
        return {"type": "facility", "distances": self.distances.tolist()}


@dataclass(frozen=True, eq=False)
class OracleModel(PreferenceModel):
    """Explicit score table over a bounded universe of committees.

    ``scores_table[v][k]`` is voter v's score for ``universe[k]``.  Intended
    for small hand-built instances, including deliberately non-monotone ones.
    """

    universe: tuple[tuple[int, ...], ...]
    scores_table: np.ndarray
    kind = "oracle"

    def __post_init__(self):
        universe = tuple(tuple(sorted(set(S))) for S in self.universe)
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "scores_table", np.asarray(self.scores_table, dtype=np.float64))
        object.__setattr__(self, "_index", {S: k for k, S in enumerate(universe)})

    @property
    def n(self):
        return self.scores_table.shape[0]

    def scores(self, committees):
        cols = []
        for S in committees:
            key = tuple(S)
            if key not in self._index:
                raise UnsupportedCommitteeError(f"committee {list(key)} is outside the oracle universe")
            cols.append(self._index[key])
        if not cols:
            return np.zeros((0, self.n))
        return self.scores_table[:, cols].T

    def validate(self, m, n):
        T = self.scores_table
        out = []
        if T.ndim != 2 or T.shape != (n, len(self.universe)):
            out.append(f"oracle: score table must have shape ({n}, {len(self.universe)})")
        if len(self._index) != len(self.universe):
            out.append("oracle: duplicate committee in universe")
        if any(not (0 <= i < m) for S in self.universe for i in S):
            out.append(f"oracle: universe references a candidate outside [0, {m})")
        if T.size and not np.all(np.isfinite(T)):
            out.append("oracle: scores must be finite")
        return out

    def to_dict(self):
        return {
            "type": "oracle",
            "universe": [list(S) for S in self.universe],
            "scores": self.scores_table.tolist(),
        }


_PARSERS = {
    "approval": lambda d, m: ApprovalModel(tuple(tuple(sorted(set(A))) for A in d["sets"]), m),
    "ranking": lambda d, m: RankingModel(tuple(tuple(o) for o in d["orders"])),
    "budget": lambda d, m: BudgetModel(np.asarray(d["utilities"], dtype=np.float64).reshape(len(d["utilities"]), -1)),
    "facility": lambda d, m: FacilityModel(np.asarray(d["distances"], dtype=np.float64).reshape(len(d["distances"]), -1)),
    "oracle": lambda d, m: OracleModel(tuple(tuple(S) for S in d["universe"]), d["scores"]),
}


def preference_from_dict(data: dict, m: int) -> PreferenceModel:
    try:
        parser = _PARSERS[data["type"]]
    except KeyError:
        raise ValueError(f"unknown preference type {data.get('type')!r}") from None
    return parser(data, m)


def compare(model: PreferenceModel, v: int, S1, S2) -> Ordering:
    """How voter `v` orders committees `S1` and `S2`."""
    a, b = model.scores([tuple(S1), tuple(S2)])
    if a[v] > b[v]:
        return Ordering.FIRST_STRICT
    if a[v] < b[v]:
        return Ordering.SECOND_STRICT
    return Ordering.TIE


def strictly_prefers(model: PreferenceModel, v: int, S_new, S_old) -> bool:
    return compare(model, v, S_new, S_old) is Ordering.FIRST_STRICT


def weakly_prefers(model: PreferenceModel, v: int, S1, S2) -> bool:
    return compare(model, v, S1, S2) is not Ordering.SECOND_STRICT


@dataclass(frozen=True)
class PropertyReport:
    ok: bool
    trials: int
    witness: tuple | None = None  # (smaller committee, larger committee, voter)


def check_monotonicity(model: PreferenceModel, inst, trials: int = 1000, seed=0) -> PropertyReport:
    """Random search for S ⊆ S' with some voter strictly preferring S.

    For an `OracleModel` the pairs are drawn from nested pairs inside its
    universe; otherwise S' is a uniformly random subset of the candidates and
    S a random subset of S'.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    m, n = inst.m, inst.n
    if isinstance(model, OracleModel):
        nested = [
            (A, B)
            for A, B in itertools.product(model.universe, repeat=2)
            if A != B and set(A) <= set(B)
        ]
        if not nested:
            return PropertyReport(True, trials)
        picks = [nested[k] for k in rng.integers(len(nested), size=trials)]
    else:
        picks = []
        for _ in range(trials):
            big = np.flatnonzero(rng.random(m) < rng.random())
            small = big[rng.random(len(big)) < rng.random()]
            picks.append((tuple(int(i) for i in small), tuple(int(i) for i in big)))
    small_scores = model.scores([p[0] for p in picks])
    big_scores = model.scores([p[1] for p in picks])
    bad = small_scores > big_scores
    if bad.any():
        row, v = np.argwhere(bad)[0]
        return PropertyReport(False, trials, (picks[row][0], picks[row][1], int(v)))
    return PropertyReport(True, trials)
