"""
Parameter sweeps and payoffs
============================

The harness runs both selection modes on matched seeds. These are small
versions of what the ``sweep`` and ``payoffs`` commands write to CSV.
"""

from oraclegame.harness import RunConfig, payoff_experiment, sweep

cfg = RunConfig(seed=7, tasks=100)

for row in sweep(cfg, "lambda", [0.1, 0.3, 0.5], seeds=4):
    print(f"lambda={row['value']:.1f} {row['mode']:10s} "
          f"variance {row['reveal_variance']:.4f} +- {row['reveal_variance_se']:.4f}  "
          f"malicious/task {row['malicious_selected']:.2f}")

# Publisher strategy x executor strategy, realised payoffs per cell.
for row in payoff_experiment(cfg, trials=50, seeds=4):
    print(f"{row['publisher_strategy']:11s} {row['malicious_strategy']:9s} "
          f"U1 {row['mean_u1']:.3f}  U2 {row['mean_u2']:.3f}")
