"""
Committee selection with a VRF
==============================

Every node evaluates a VRF on the task's randomness; it joins the committee
when the output falls under its optional range.
"""

import numpy as np

from oraclegame import crypto
from oraclegame.reputation import ReputationTable, all_ranges, baseline_range

keys = [crypto.keygen(i) for i in range(50)]
seed = b"task-randomness"

# Outputs are uniform on [0, 1) and come with a proof anyone can check.
out = crypto.vrf_evaluate(seed, keys[0])
print(out.value, crypto.vrf_verify(out.value, out.proof, seed, keys[0].public_key))

# The RFC 9381 backend produces a standard ECVRF proof for the same key.
ec = crypto.vrf_evaluate(seed, keys[0], "ecvrf")
print(len(ec.proof), crypto.vrf_verify(ec.value, ec.proof, seed, keys[0].public_key, "ecvrf"))

# With uniform reputation every range is M/N, the same as the baseline.
table = ReputationTable.uniform(range(50), expected_committee=5)
print(set(all_ranges(table, 5).values()), baseline_range(50, 5))

# Reputation shifts selection weight: a node at a tenth of everyone else's
# reputation gets about a tenth of the range.
table.entries[0] = 0.1
ranges = all_ranges(table, 5)
print(ranges[0], ranges[1])

values = np.array([crypto.vrf_value(seed, k) for k in keys])
committee = [i for i, v in enumerate(values) if v <= ranges[i]]
print("committee:", committee)
