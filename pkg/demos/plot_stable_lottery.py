"""
Stable lotteries
================

Randomising over committees beats any deterministic choice.  Multiplicative
weights gives a (2 + eps)-stable lottery; the exact game shows the best c.
"""

from corestable import exact_game, gen_random, mwu_solve, verify_lottery

inst = gen_random("ranking", 8, 8, 3, seed=1)

result = mwu_solve(inst, L=2, eps=0.1, seed=0)
print("MWU lottery after", result.rounds, "rounds, measured c =", round(result.measured_c, 4))
for S, x in result.lottery.support:
    print(f"  {S}: {x:.3f}")

# game value at c=2 and c=1; negative means the returned lottery is c-stable
for c in (2.0, 1.0):
    sol = exact_game(inst, c)
    print(f"c={c}: game value {sol.value:.4f}, support size {len(sol.defender_lottery.support)}")
    print("  verified:", verify_lottery(inst, sol.defender_lottery, c).stable)

# scan for the smallest c the exact game can certify
lo, hi = 0.0, 2.0
for _ in range(30):
    mid = (lo + hi) / 2
    if exact_game(inst, mid).value < 0:
        hi = mid
    else:
        lo = mid
print("smallest certifiable c ~", round(hi, 4))
