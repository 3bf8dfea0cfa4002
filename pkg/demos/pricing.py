"""
Pricing a data request
======================

How the publisher picks a fee and how a malicious executor responds to it.
"""

import numpy as np

from oraclegame import incentive

# The publisher states how much it cares about data quality with a weight u
# in [0, 1]. The library maps u to the internal quality weight and then to
# the fee that maximises the publisher's payoff, given that the executor
# best-responds.
K = 10.0
for u in (0.0, 0.25, 0.5, 0.75, 1.0):
    P, delta, pay = incentive.equilibrium(u, K, n=5)
    print(f"u={u:.2f}  alpha_eff={incentive.alpha_effective(u, K):.4f}  "
          f"P*={P:.4f}  delta*={delta:.4f}  U1={pay.leader:.4f}  U2={pay.follower:.4f}")

# Paying the full improper profit K buys honesty; paying nothing invites the
# largest deviation the executor can get away with.
print(incentive.follower_best_response(K, K), incentive.follower_best_response(K, 0.0))

# The executor's payoff as a function of its deviation, at the recommended fee.
P = incentive.recommend_fee(0.5, K)
deltas = np.linspace(0, 2, 9)
u2 = incentive.follower_payoff(incentive.GameParams(K=K, n=5, P=P, delta=deltas))
for d, v in zip(deltas, u2):
    print(f"delta={d:.2f}  U2={v:.4f}")
