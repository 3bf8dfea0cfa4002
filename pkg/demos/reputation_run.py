"""
A run with malicious nodes
==========================

Fifty nodes, twenty of them malicious, two hundred tasks. Compare how the
committee looks under reputation-weighted selection and under plain VRF.
"""

import numpy as np

from oraclegame.harness import RunConfig, Simulation

for mode in ("reputation", "baseline"):
    sim = Simulation(RunConfig(seed=1, selection_mode=mode, snapshot_every=50))
    rows = sim.run()
    mal = np.array([r.malicious_selected for r in rows])
    var = np.array([r.reveal_variance for r in rows])
    print(f"{mode:10s} malicious/task {mal.mean():.3f}  first 50 {mal[:50].mean():.3f}  "
          f"last 50 {mal[-50:].mean():.3f}  reveal variance {np.nanmean(var):.4f}")

    # Reputation after the run, by role. Baseline mode still records it.
    reps = sim.table.entries
    for name, ids in (("honest", sim.honest_ids), ("malicious", sim.malicious_ids)):
        vals = np.array([reps[i] for i in ids])
        print(f"  {name:9s} min {vals.min():.3f}  mean {vals.mean():.3f}  max {vals.max():.3f}")
