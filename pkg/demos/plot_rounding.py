"""
From lotteries to one committee
===============================

Iterated Rounding shrinks the budget each round and keeps a committee that
most remaining voters do not rank near the bottom of the lottery.
"""

import numpy as np

from corestable import RoundingParams, gen_random, iterated_rounding, verify_committee

inst = gen_random("budget", 10, 12, 4, seed=3)
T, trace = iterated_rounding(inst, RoundingParams(alpha=0.5, beta=0.25, epsilon=0.1, seed=0))

for rec in trace.rounds:
    print(f"round {rec.t}: {rec.voters} voters, budget {rec.K:.3f}, picked {rec.committee}, covered {rec.removed}")

report = verify_committee(inst, T, trace.theoretical_bound)
print("final committee", T, "weight", round(inst.weight(T), 3), "of", inst.K)
print("worst blocking ratio", round(report.worst_ratio, 4), "vs proven", trace.theoretical_bound)

# the ratio in practice, over a few seeds
ratios = []
for seed in range(20):
    inst = gen_random("approval", 9, 10, 3, seed=seed)
    T, _ = iterated_rounding(inst)
    ratios.append(verify_committee(inst, T, 32).worst_ratio)
print("20 approval instances: worst", max(ratios), "median", np.median(ratios))
