import itertools

import numpy as np
import pytest

from corestable.model import make_instance
from corestable.preferences import ApprovalModel, RankingModel


def all_subsets(m, include_empty=True):
    lo = 0 if include_empty else 1
    for k in range(lo, m + 1):
        yield from itertools.combinations(range(m), k)


def brute_utility(inst, v, S):
    """Per-voter score straight from the raw model data, no vectorisation."""
    pref = inst.preference
    kind = pref.kind
    if kind == "approval":
        return len(set(S) & set(pref.sets[v]))
    if kind == "ranking":
        order = list(pref.orders[v])
        return -min((order.index(i) for i in S), default=inst.m)
    if kind == "budget":
        return sum(float(pref.utilities[v][i]) for i in S)
    if kind == "facility":
        return -min((float(pref.distances[v][i]) for i in S), default=np.inf)
    raise ValueError(kind)


def brute_V(inst, S, S_a, voters=None):
    voters = range(inst.n) if voters is None else voters
    return sum(brute_utility(inst, v, S_a) > brute_utility(inst, v, S) for v in voters)


def cyclic_ranking(m, K):
    """Voter i ranks c_i > c_{i+1} > ... as a ranking model, unit weights."""
    orders = tuple(tuple((i + k) % m for k in range(m)) for i in range(m))
    return make_instance(m, m, K, [1.0] * m, RankingModel(orders))


@pytest.fixture
def approval3():
    # A = ({0}, {1}, {0, 1}) over m = 2
    return make_instance(2, 3, 2, [1.0, 1.0], ApprovalModel(((0,), (1,), (0, 1)), 2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
