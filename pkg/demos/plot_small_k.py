"""
Exact stability for small budgets
=================================

With unit weights and K <= 3 an exactly stable lottery exists.  The sampling
defenders below keep every voter's chance of defecting low.
"""

from corestable import (
    SplitAttack,
    attack_success_rates,
    gen_random,
    k3_defender,
    same_size_defender,
    verify_exact_small_k,
)
from corestable.smallk import sample_from

inst = gen_random("ranking", 6, 6, 3, seed=2)

attacker = (((0,), 0.2), ((1,), 0.3), ((2,), 0.5))
rates = attack_success_rates(
    inst, lambda rng: sample_from(attacker, rng), lambda rng: same_size_defender(inst, attacker, seed=rng), 20_000
)
print("same-size defender, per-voter attack success:", rates.round(3), "bound 0.25")

for p in (0.25, 0.5, 0.75):
    attack = SplitAttack(p, (((0,), 0.5), ((3,), 0.5)), (((1, 2), 1.0),))
    rates = attack_success_rates(inst, attack.sample, lambda rng: k3_defender(attack, rng), 20_000)
    print(f"k3 defender p={p}: max success {rates.max():.3f}, bound {0.5 - p / 6:.3f}")

for K in (1, 2, 3):
    sol = verify_exact_small_k(gen_random("approval", 6, 6, K, seed=K))
    print(f"K={K}: exact game value {sol.value:.4f}")
