"""
Commit, reveal and filter
=========================

One task driven by hand, phase by phase, including a node that tries to copy
another node's answer.
"""

import numpy as np

from oraclegame import crypto
from oraclegame.agents import NodeIdentity
from oraclegame.errors import SubmissionRejected
from oraclegame.protocol import (
    accept_commit, accept_reveal, audit_transcript, close_commits,
    filter_and_aggregate, new_state, open_task, settle, transcript_lines, try_select,
)
from oraclegame.reputation import ReputationTable

nodes = [NodeIdentity(i, crypto.keygen(100 + i)) for i in range(4)]
keys = {n.id: n.public_key for n in nodes}
task = open_task(1, ["exchange-a"], u=0.5, K=10.0, prior_randomness=b"genesis")
state = new_state(task, {n.id: 1.0 for n in nodes}, keys)
print("fee", task.P)

# Each node seals sha256(price || pk). Node 3 has not fetched anything and
# commits to a guess, hoping to reveal someone else's price later.
prices = {0: 100.02, 1: 99.97, 2: 100.01, 3: 100.50}
for n in nodes:
    stub = try_select(n, task, threshold=1.0)
    accept_commit(state, stub.sealed(prices[n.id], n.public_key))
close_commits(state)

for n in nodes[:3]:
    accept_reveal(state, n.id, prices[n.id], n.public_key)
try:
    accept_reveal(state, 3, 100.02, nodes[0].public_key)
except SubmissionRejected as exc:
    print("copier rejected:", exc.verdict)

# Each reveal survives with probability exp(-|X - mean|); survivors split
# P/n and the rest of the escrow goes back to the publisher.
result = filter_and_aggregate(state, np.random.default_rng(0))
outcome, table = settle(state, result, ReputationTable.uniform(keys, 2))
print("aggregate", outcome.aggregate, "payouts", outcome.payouts, "refund", outcome.refund)
print("reputation", table.entries)

lines = transcript_lines(state)
print(len(lines), "transcript lines, audit problems:", audit_transcript(lines, keys))
