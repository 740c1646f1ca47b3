import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corestable.errors import InfeasibleCommitteeError, InvalidCommitteeError, InvalidInstanceError, InvalidLotteryError
from corestable.generators import gen_random
from corestable.model import (
    AdditiveWeights,
    Lottery,
    MultiWeights,
    as_committee,
    check_lottery_feasible,
    committee_weight,
    committees_up_to,
    feasible_committees,
    instance_from_dict,
    load_instance,
    dump_instance,
    make_instance,
    validate_instance,
)
from corestable.preferences import ApprovalModel, BudgetModel

from conftest import all_subsets


def test_unit_weight_sum():
    inst = gen_random("approval", 5, 3, 4, seed=0)
    assert committee_weight(inst, (0, 1, 2)) == 3
    assert committee_weight(inst, ()) == 0


def test_multi_resource_weight_is_max():
    w1 = (4.0, 0.0, 0.0)
    w2 = (3.0, 4.0, 0.0)
    inst = make_instance(3, 1, 10, MultiWeights((w1, w2), (10.0, 10.0)), BudgetModel(np.ones((1, 3))))
    # w_1(S) = 4, w_2(S) = 7 for S = {0, 1}
    assert committee_weight(inst, (0, 1)) == pytest.approx(7)


def test_multi_resource_normalises_limits():
    inst = make_instance(2, 1, 6, MultiWeights(((1.0, 2.0), (3.0, 0.0)), (2.0, 6.0)), BudgetModel(np.ones((1, 2))))
    # resource 1: w/2 * 6, resource 2: w/6 * 6
    assert committee_weight(inst, (0,)) == pytest.approx(max(1 / 2 * 6, 3 / 6 * 6))
    assert committee_weight(inst, (0, 1)) == pytest.approx(max(3 / 2 * 6, 3.0))


def test_committee_out_of_range():
    inst = gen_random("approval", 4, 2, 2, seed=0)
    with pytest.raises(InvalidCommitteeError):
        committee_weight(inst, (4,))
    with pytest.raises(InvalidCommitteeError):
        as_committee([-1, 0], 4)


def test_as_committee_canonical():
    assert as_committee([3, 1, 3, 2]) == (1, 2, 3)


def test_validate_ok():
    inst = gen_random("approval", 4, 3, 2, seed=1)
    assert validate_instance(inst).ok


def test_negative_weight_violation():
    with pytest.raises(InvalidInstanceError) as exc:
        make_instance(2, 1, 1, [1.0, -0.5], ApprovalModel(((0,),), 2))
    assert "negative candidate weight" in exc.value.violations


def test_mismatched_multi_vectors():
    spec = MultiWeights(((1.0, 1.0), (1.0,)), (1.0, 1.0))
    inst = make_instance(2, 1, 1, spec, ApprovalModel(((0,),), 2), validate=False)
    report = validate_instance(inst)
    assert not report.ok
    assert "mismatched" in report.first


@pytest.mark.parametrize("K", [0, -1, float("inf"), float("nan")])
def test_bad_K(K):
    with pytest.raises(InvalidInstanceError):
        make_instance(2, 1, K, [1.0, 1.0], ApprovalModel(((0,),), 2))


def test_dimension_mismatch():
    with pytest.raises(InvalidInstanceError):
        make_instance(3, 2, 1, [1.0] * 3, ApprovalModel(((0,),), 3))


def test_K_below_every_weight_is_allowed():
    inst = make_instance(2, 1, 0.5, [1.0, 1.0], ApprovalModel(((0,),), 2))
    assert feasible_committees(inst) == [()]


def test_committees_up_to_order():
    assert committees_up_to(3) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    assert committees_up_to(3, 1, include_empty=True) == [(), (0,), (1,), (2,)]


@pytest.mark.parametrize("kind", ["budget", "approval"])
@pytest.mark.parametrize("resources", [1, 2])
def test_feasible_committees_matches_brute_force(kind, resources):
    inst = gen_random(kind, 7, 3, 2.5, seed=3, resources=resources)
    expected = sorted(S for S in all_subsets(7) if committee_weight(inst, S) <= inst.K + 1e-9)
    assert sorted(feasible_committees(inst)) == expected


@pytest.mark.parametrize("kind", ["approval", "ranking", "budget", "facility"])
def test_json_round_trip(kind, tmp_path):
    inst = gen_random(kind, 5, 4, 2, seed=7)
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    again = load_instance(path)
    assert again.to_json() == inst.to_json()
    assert np.array_equal(again.scores(committees_up_to(5)), inst.scores(committees_up_to(5)))


def test_multi_round_trip():
    inst = gen_random("budget", 5, 3, 2, seed=2, resources=3)
    again = instance_from_dict(json.loads(inst.to_json()))
    assert isinstance(again.weights, MultiWeights)
    assert np.allclose(again.weight_matrix, inst.weight_matrix)


def test_malformed_instance_json():
    with pytest.raises(InvalidInstanceError):
        instance_from_dict({"m": 2, "n": 1})
    with pytest.raises(InvalidInstanceError):
        instance_from_dict({"m": 1, "n": 1, "K": 1, "weights": {"mode": "weird"}, "preference": {}})


class TestLottery:
    def test_normalisation(self):
        with pytest.raises(InvalidLotteryError):
            Lottery((((0,), 0.5), ((1,), 0.4)), 1.0)
        Lottery((((0,), 0.5), ((1,), 0.5 + 1e-10)), 1.0)

    def test_distinct_support(self):
        with pytest.raises(InvalidLotteryError):
            Lottery((((0,), 0.5), ((0,), 0.5)), 1.0)

    def test_from_pairs_merges(self):
        lot = Lottery.from_pairs([((1, 0), 1), ((0, 1), 1), ((2,), 2)], 3, normalize=True)
        assert lot.support == (((0, 1), 0.5), ((2,), 0.5))

    def test_uniform(self):
        lot = Lottery.uniform([(0,), (1,), (2,), (3,)], 1)
        assert np.allclose(lot.probs, 0.25)

    def test_dict_round_trip(self):
        lot = Lottery.from_pairs([((0, 2), 0.25), ((1,), 0.75)], 2)
        assert Lottery.from_dict(json.loads(json.dumps(lot.to_dict()))) == lot

    def test_feasibility(self):
        inst = gen_random("approval", 4, 2, 1, seed=0)
        check_lottery_feasible(inst, Lottery.point_mass((0,), 1))
        with pytest.raises(InfeasibleCommitteeError):
            check_lottery_feasible(inst, Lottery.point_mass((0, 1), 1))


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    A=st.sets(st.integers(0, 5)),
    B=st.sets(st.integers(0, 5)),
    resources=st.integers(1, 3),
)
def test_weight_subadditive_and_monotone(seed, A, B, resources):
    inst = gen_random("budget", 6, 2, 3, seed=seed, resources=resources)
    wa, wb = committee_weight(inst, A), committee_weight(inst, B)
    wu = committee_weight(inst, A | B)
    assert wu <= wa + wb + 1e-9
    assert wu >= max(wa, wb) - 1e-9
