import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from corestable.errors import DegenerateAttackerError, InstanceTooLargeError, InvalidLotteryError
from corestable.generators import gen_cyclic, gen_random
from corestable.lottery import (
    FractionalVector,
    defender_response,
    dependent_round,
    exact_game,
    mwu_lottery,
    mwu_solve,
)
from corestable.model import committee_weight, feasible_committees, make_instance
from corestable.preferences import RankingModel
from corestable.stability import pairwise_score, verify_lottery

from conftest import all_subsets, brute_V, cyclic_ranking


# -- dependent rounding -----------------------------------------------------


def test_integral_input_unchanged():
    p = FractionalVector((1.0, 0.0, 1.0), (1.0, 2.0, 3.0))
    assert dependent_round(p, seed=0).tolist() == [1.0, 0.0, 1.0]


def test_single_fractional_survives():
    X = dependent_round(FractionalVector((0.5,), (1.0,), 0.5), seed=0)
    assert X.tolist() == [0.5]


def test_pair_is_anticorrelated():
    outcomes = {tuple(dependent_round(FractionalVector((0.5, 0.5), (1.0, 1.0)), seed=s)) for s in range(200)}
    assert outcomes == {(1.0, 0.0), (0.0, 1.0)}
    ones = sum(dependent_round(FractionalVector((0.5, 0.5), (1.0, 1.0)), seed=s)[0] for s in range(4000))
    assert abs(ones / 4000 - 0.5) < 0.03


def test_fractional_vector_validation():
    with pytest.raises(ValueError):
        FractionalVector((1.2,), (1.0,))
    with pytest.raises(ValueError):
        FractionalVector((0.5, 0.5), (1.0, 1.0), cap=0.9)
    with pytest.raises(ValueError):
        FractionalVector((0.5,), (1.0, 2.0))


@settings(max_examples=80, deadline=None)
@given(
    vals=st.lists(st.floats(0, 1), min_size=1, max_size=8),
    wseed=st.integers(0, 1000),
    seed=st.integers(0, 2**31),
)
def test_rounding_invariants(vals, wseed, seed):
    w = np.random.default_rng(wseed).uniform(0.1, 3.0, len(vals))
    p = FractionalVector(tuple(vals), tuple(w))
    X = dependent_round(p, seed=seed)
    assert abs(float(X @ w) - float(np.dot(vals, w))) <= 1e-9 * max(1.0, float(np.dot(vals, w)))
    assert np.all((X >= 0) & (X <= 1))
    assert int(np.sum((X > 0) & (X < 1))) <= 1
    # entries already integral stay put
    for x, v in zip(X, vals):
        if v in (0.0, 1.0):
            assert x == v


def test_zero_weight_entries_round_independently():
    X = np.array([dependent_round(FractionalVector((0.3, 0.5), (0.0, 1.0)), seed=s) for s in range(5000)])
    assert abs(X[:, 0].mean() - 0.3) < 0.03
    assert np.all(np.isin(X[:, 0], [0.0, 1.0]))
    assert np.all(X[:, 1] == 0.5)


def test_rounding_reproducible():
    p = FractionalVector((0.3, 0.6, 0.1, 0.7), (1.0, 2.0, 1.0, 0.5))
    assert np.array_equal(dependent_round(p, seed=42), dependent_round(p, seed=42))


# -- defender response ------------------------------------------------------


def test_defender_point_mass_singleton():
    inst = gen_random("approval", 4, 3, 2, seed=0)
    assert defender_response(inst, [((2,), 1.0)], seed=0) == (2,)


def test_defender_uniform_two_singletons():
    inst = gen_random("ranking", 4, 5, 4, seed=0)
    S_d = defender_response(inst, [((0,), 0.5), ((1,), 0.5)], seed=3)
    assert S_d == (0, 1)
    assert pairwise_score(inst, S_d, (0,)) == 0
    assert pairwise_score(inst, S_d, (1,)) == 0


def test_defender_prunes_heavy():
    inst = gen_random("approval", 4, 3, 2, seed=0)
    assert defender_response(inst, [((0, 1), 1.0)], seed=0) == ()


def test_defender_bad_mix():
    inst = gen_random("approval", 4, 3, 2, seed=0)
    with pytest.raises(InvalidLotteryError):
        defender_response(inst, [((0,), 0.4)])


def test_defender_zero_weight_attack():
    inst = make_instance(2, 1, 2, [0.0, 1.0], RankingModel(((0, 1),)))
    with pytest.raises(DegenerateAttackerError):
        defender_response(inst, [((0,), 1.0)])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.floats(1.0, 4.0), data=st.data())
def test_defender_within_budget(seed, K, data):
    inst = gen_random("budget", 6, 3, K, seed=seed)
    pool = [S for S in all_subsets(6, include_empty=False) if len(S) <= 3]
    picks = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=5, unique=True))
    raw = np.array(data.draw(st.lists(st.floats(0.1, 1.0), min_size=len(picks), max_size=len(picks))))
    mix = list(zip(picks, raw / raw.sum()))
    S_d = defender_response(inst, mix, seed=seed)
    assert committee_weight(inst, S_d) <= K + 1e-9


# -- MWU --------------------------------------------------------------------


def test_mwu_unanimous_top():
    orders = ((2, 0, 1, 3), (2, 1, 3, 0), (2, 3, 0, 1))
    inst = make_instance(4, 3, 1, [1.0] * 4, RankingModel(orders))
    lot = mwu_lottery(inst, L=1, eps=0.1, seed=0)
    assert lot.committees == [(2,)]
    # any other support committee would be blocked at c = 2 by {2}
    for other in [(0,), (1,), (3,)]:
        assert pairwise_score(inst, other, (2,)) == 3


def test_mwu_cyclic5():
    inst = cyclic_ranking(5, 1)
    lot = mwu_lottery(inst, L=1, eps=0.1, seed=0)
    assert verify_lottery(inst, lot, 2.1, L=1).stable


@pytest.mark.parametrize("kind", ["approval", "ranking", "budget", "facility"])
@pytest.mark.parametrize("seed", range(3))
def test_mwu_certifies(kind, seed):
    inst = gen_random(kind, 7, 6, 3, seed=seed)
    result = mwu_solve(inst, L=2, eps=0.1, seed=seed)
    assert verify_lottery(inst, result.lottery, 2.1, L=2).stable
    assert result.measured_c < 2.1
    assert all(committee_weight(inst, S) <= 3 + 1e-9 for S in result.lottery.committees)


def test_mwu_reproducible():
    inst = gen_random("approval", 8, 8, 4, seed=1)
    a = mwu_lottery(inst, L=2, seed=9)
    b = mwu_lottery(inst, L=2, seed=9)
    assert a == b


def test_mwu_restricted_voters():
    inst = gen_random("ranking", 6, 8, 3, seed=2)
    voters = [0, 2, 5]
    lot = mwu_lottery(inst, L=1, seed=0, voters=voters)
    assert verify_lottery(inst, lot, 2.1, L=1, voters=voters).stable


def test_mwu_guard():
    inst = gen_random("approval", 200, 2, 3, seed=0)
    with pytest.raises(InstanceTooLargeError):
        mwu_lottery(inst, L=3)


# -- exact game -------------------------------------------------------------


def _brute_game_value(inst, c):
    """Full matrix game by a single LP over every defender and attacker committee."""
    defenders = feasible_committees(inst)
    attackers = list(all_subsets(inst.m, include_empty=False))
    M = np.array([
        [brute_V(inst, S, A) - c * committee_weight(inst, A) / inst.K * inst.n for A in attackers]
        for S in defenders
    ])
    D = len(defenders)
    res = linprog(
        np.r_[np.zeros(D), 1.0],
        A_ub=np.hstack([M.T, -np.ones((len(attackers), 1))]),
        b_ub=np.zeros(len(attackers)),
        A_eq=np.r_[np.ones(D), 0.0].reshape(1, -1),
        b_eq=[1.0],
        bounds=[(0, None)] * D + [(None, None)],
        method="highs",
    )
    return res.fun


@pytest.mark.parametrize("c", [0.3, 0.5, 1.0])
def test_exact_game_cyclic3(c):
    inst = cyclic_ranking(3, 1)
    sol = exact_game(inst, c)
    # hand analysis: value 1 - 3c, uniform singletons optimal
    assert sol.value == pytest.approx(1 - 3 * c, abs=1e-7)
    assert sol.value == pytest.approx(_brute_game_value(inst, c), abs=1e-7)
    assert sol.certified


def test_exact_game_cyclic3_not_stable_at_low_c():
    assert exact_game(cyclic_ranking(3, 1), 0.3).value >= 0


@pytest.mark.parametrize("seed", range(6))
def test_exact_game_matches_full_lp(seed):
    inst = gen_random(["approval", "ranking", "budget"][seed % 3], 5, 5, 2, seed=seed)
    for c in (0.8, 2.0):
        sol = exact_game(inst, c)
        assert sol.value == pytest.approx(_brute_game_value(inst, c), abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_exact_game_k1_negative(seed):
    inst = gen_random("ranking", 5, 5, 1, seed=seed)
    sol = exact_game(inst, 1.0)
    assert sol.value < 0
    assert verify_lottery(inst, sol.defender_lottery, 1.0).stable


def test_exact_game_c2_negative():
    for seed in range(5):
        inst = gen_random("budget", 6, 6, 3, seed=seed)
        sol = exact_game(inst, 2.0)
        assert sol.value < 0 and sol.certified
        assert verify_lottery(inst, sol.defender_lottery, 2.0).stable


def test_game_solution_dict():
    sol = exact_game(gen_random("approval", 4, 3, 2, seed=0), 2.0)
    d = sol.to_dict()
    assert set(d) == {"value", "lower_bound", "attacker_mix", "defender_lottery", "iterations", "certified"}
    assert sum(e["prob"] for e in d["attacker_mix"]) == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(0.5, 3.0))
def test_value_monotone_in_attacker_space(seed, c):
    inst = gen_random("ranking", 5, 4, 2, seed=seed)
    small = exact_game(inst, c, attacker_L=1).value
    big = exact_game(inst, c).value
    assert small <= big + 1e-7


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_value_monotone_in_defender_space(seed):
    inst = gen_random("approval", 5, 4, 3, seed=seed)
    small = exact_game(inst, 1.0, defender_L=1).value
    big = exact_game(inst, 1.0).value
    assert big <= small + 1e-7
