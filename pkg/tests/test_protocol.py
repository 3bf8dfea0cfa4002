import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oraclegame import crypto
from oraclegame.agents import NodeIdentity
from oraclegame.errors import InputError, StateError, SubmissionRejected
from oraclegame.protocol import (
    Phase,
    ProtocolEngine,
    Submission,
    accept_commit,
    accept_reveal,
    audit_transcript,
    close_commits,
    filter_and_aggregate,
    filter_reveals,
    new_state,
    next_randomness,
    open_task,
    settle,
    transcript_lines,
    try_select,
)
from oraclegame.reputation import ReputationTable


@pytest.fixture(scope="module")
def nodes():
    return [NodeIdentity(i, crypto.keygen(500 + i)) for i in range(6)]


def make_state(nodes, thresholds=None, fee=5.0):
    task = open_task(1, ["src0"], 0.5, 10.0, b"genesis", fee=fee)
    th = thresholds or {n.id: 1.0 for n in nodes}
    return new_state(task, th, {n.id: n.public_key for n in nodes})


def commit_all(state, nodes, prices):
    for n in nodes:
        stub = try_select(n, state.request, threshold=state.thresholds[n.id])
        accept_commit(state, stub.sealed(prices[n.id], n.public_key))


# --- open_task / randomness ---------------------------------------------------------


def test_open_task_recommended_fee():
    t = open_task(1, ["a"], 0.5, 10.0, b"prev")
    assert t.P == pytest.approx(3.4375, abs=1e-9)


def test_open_task_zero_fee_endpoint():
    assert open_task(1, ["a"], 0.0, 10.0, b"prev").P == pytest.approx(0, abs=1e-12)


def test_open_task_errors():
    with pytest.raises(InputError):
        open_task(1, ["a"], 0.5, 0.0, b"prev")
    with pytest.raises(InputError):
        open_task(1, [], 0.5, 10.0, b"prev")


def test_engine_assigns_distinct_q(nodes):
    eng = ProtocolEngine(nodes, 2)
    a = eng.open(["a"], 0.5, 10.0)
    b = eng.open(["a"], 0.5, 10.0)
    assert a.request.Q != b.request.Q
    assert a.request.R != b.request.R


def test_next_randomness():
    assert next_randomness(b"p", 3) == next_randomness(b"p", 3)
    assert next_randomness(b"p", 3) != next_randomness(b"p", 4)
    r, seen = b"g", set()
    for q in range(200):
        r = next_randomness(r, q)
        seen.add(r)
    assert len(seen) == 200


# --- selection ------------------------------------------------------------------------


def test_threshold_one_always_selects(nodes):
    for q in range(50):
        t = open_task(q, ["a"], 0.5, 10.0, b"x")
        assert try_select(nodes[0], t, threshold=1.0) is not None


def test_threshold_zero_never_selects(nodes):
    for q in range(50):
        t = open_task(q, ["a"], 0.5, 10.0, b"x")
        assert try_select(nodes[0], t, threshold=0.0) is None


def test_try_select_uses_reputation_range(nodes):
    table = ReputationTable.uniform([n.id for n in nodes], len(nodes))  # range = 1
    t = open_task(1, ["a"], 0.5, 10.0, b"x")
    assert try_select(nodes[1], t, table) is not None


def test_committee_size_statistics():
    N, M, tasks = 50, 5, 2000
    keys = [crypto.keygen(10_000 + i) for i in range(N)]
    r = b"committee"
    sizes = []
    for q in range(tasks):
        r = next_randomness(r, q)
        sizes.append(sum(crypto.vrf_value(r, k) <= M / N for k in keys))
    sizes = np.array(sizes)
    se = math.sqrt(N * 0.1 * 0.9) / math.sqrt(tasks)
    assert abs(sizes.mean() - M) <= 3 * se


# --- commit ----------------------------------------------------------------------------


def test_valid_commit_accepted(nodes):
    st_ = make_state(nodes)
    commit_all(st_, nodes[:1], {nodes[0].id: 100.0})
    assert nodes[0].id in st_.submissions


def test_forged_vrf_value_rejected(nodes):
    st_ = make_state(nodes, {n.id: 0.5 for n in nodes})
    n = nodes[0]
    real = crypto.vrf_evaluate(st_.request.R, n.key)
    other = crypto.vrf_evaluate(b"some other seed", n.key)
    forged = Submission(n.id, 0.4999, other.proof, crypto.commit(100.0, n.public_key))
    with pytest.raises(SubmissionRejected) as exc:
        accept_commit(st_, forged)
    assert exc.value.verdict == "not selected"
    assert real.value != 0.4999


def test_commit_above_threshold_rejected(nodes):
    n = nodes[0]
    st_ = make_state(nodes, {m.id: 0.0 for m in nodes})
    out = crypto.vrf_evaluate(st_.request.R, n.key)
    with pytest.raises(SubmissionRejected):
        accept_commit(st_, Submission(n.id, out.value, out.proof, crypto.commit(1.0, n.public_key)))


def test_duplicate_commit_rejected(nodes):
    st_ = make_state(nodes)
    commit_all(st_, nodes[:1], {nodes[0].id: 100.0})
    stub = try_select(nodes[0], st_.request, threshold=1.0)
    with pytest.raises(SubmissionRejected) as exc:
        accept_commit(st_, stub.sealed(101.0, nodes[0].public_key))
    assert exc.value.verdict == "duplicate"


def test_commit_after_close(nodes):
    st_ = make_state(nodes)
    close_commits(st_)
    stub = try_select(nodes[0], st_.request, threshold=1.0)
    with pytest.raises(StateError):
        accept_commit(st_, stub.sealed(1.0, nodes[0].public_key))


# --- reveal ----------------------------------------------------------------------------


def test_matching_reveal_accepted(nodes):
    st_ = make_state(nodes)
    commit_all(st_, nodes[:2], {0: 100.0, 1: 101.0})
    close_commits(st_)
    accept_reveal(st_, 0, 100.0, nodes[0].public_key)
    assert st_.revealed == {0: 100.0}


def test_altered_price_rejected(nodes):
    st_ = make_state(nodes)
    commit_all(st_, nodes[:1], {0: 100.0})
    close_commits(st_)
    with pytest.raises(SubmissionRejected) as exc:
        accept_reveal(st_, 0, 100.5, nodes[0].public_key)
    assert exc.value.verdict == "digest mismatch"


def test_reveal_without_commit_rejected(nodes):
    st_ = make_state(nodes)
    close_commits(st_)
    with pytest.raises(SubmissionRejected) as exc:
        accept_reveal(st_, 3, 100.0, nodes[3].public_key)
    assert exc.value.verdict == "no commit"


def test_reveal_before_commit_phase_closes(nodes):
    st_ = make_state(nodes)
    commit_all(st_, nodes[:1], {0: 100.0})
    with pytest.raises(StateError):
        accept_reveal(st_, 0, 100.0, nodes[0].public_key)


def test_freeloader_cannot_copy_reveal(nodes):
    """Node 1 copies node 0's price: its own digest binds its own key, so
    reusing node 0's (price, pk) or committing blindly both fail."""
    st_ = make_state(nodes)
    leader, copier = nodes[0], nodes[1]
    commit_all(st_, [leader], {0: 100.0})
    stub = try_select(copier, st_.request, threshold=1.0)
    accept_commit(st_, stub.sealed(99.0, copier.public_key))  # guessed value
    close_commits(st_)
    accept_reveal(st_, 0, 100.0, leader.public_key)
    with pytest.raises(SubmissionRejected):
        accept_reveal(st_, 1, 100.0, leader.public_key)
    with pytest.raises(SubmissionRejected):
        accept_reveal(st_, 1, 100.0, copier.public_key)


# --- filtering ---------------------------------------------------------------------------


def test_identical_reveals_all_survive():
    res = filter_reveals({i: 100.0 for i in range(5)}, np.random.default_rng(0))
    assert res.survivors == list(range(5))
    assert res.aggregate == 100.0


def test_outlier_survival_probability():
    reveals = {0: 100.0, 1: 100.0, 2: 100.0, 3: 100.0, 4: 110.0}
    res = filter_reveals(reveals, np.random.default_rng(0))
    assert res.mean == 102.0
    assert res.survival_prob[4] == pytest.approx(math.exp(-8))
    assert res.survival_prob[0] == pytest.approx(math.exp(-2))


def test_single_reveal_survives():
    res = filter_reveals({7: 123.4}, np.random.default_rng(0))
    assert res.survivors == [7] and res.aggregate == 123.4


def test_filter_needs_reveals():
    with pytest.raises(InputError):
        filter_reveals({}, np.random.default_rng(0))


def test_outlier_empirical_survival_rate():
    reveals = {0: 100.0, 1: 100.0, 2: 100.0, 3: 100.0, 4: 101.25}
    # mean 100.25, outlier distance exactly 1
    hits = sum(
        4 in filter_reveals(reveals, np.random.default_rng([99, q])).survivors
        for q in range(10_000)
    )
    assert abs(hits / 10_000 - math.exp(-1)) <= 0.02


# --- settlement --------------------------------------------------------------------------


def run_manual(nodes, prices, fee, rng_seed=0):
    st_ = make_state(nodes, fee=fee)
    commit_all(st_, [n for n in nodes if n.id in prices], prices)
    close_commits(st_)
    for i, p in prices.items():
        accept_reveal(st_, i, p, nodes[i].public_key)
    res = filter_and_aggregate(st_, np.random.default_rng(rng_seed))
    table = ReputationTable.uniform([n.id for n in nodes], 2)
    return st_, res, settle(st_, res, table)


def test_even_split_no_filtering(nodes):
    _, _, (out, _) = run_manual(nodes, {i: 100.0 for i in range(5)}, 5.0)
    assert out.payouts == {i: 1.0 for i in range(5)}
    assert out.refund == 0.0


def test_filtered_shares_refunded(nodes):
    st_ = make_state(nodes, fee=5.0)
    prices = {i: 100.0 for i in range(5)}
    commit_all(st_, nodes[:5], prices)
    close_commits(st_)
    for i, p in prices.items():
        accept_reveal(st_, i, p, nodes[i].public_key)
    res = filter_and_aggregate(st_, np.random.default_rng(0))
    res.survivors, res.filtered_out = [0, 1, 2], [3, 4]
    out, _ = settle(st_, res, ReputationTable.uniform(range(6), 2))
    assert out.payouts == {0: 1.0, 1: 1.0, 2: 1.0}
    assert out.refund == pytest.approx(2.0)


def test_no_reveals_full_refund(nodes):
    st_ = make_state(nodes, fee=5.0)
    close_commits(st_)
    res = filter_and_aggregate(st_, np.random.default_rng(0))
    assert res is None
    table = ReputationTable.uniform(range(6), 2)
    out, new = settle(st_, res, table)
    assert out.refund == 5.0 and out.payouts == {} and out.voided
    assert new is table


def test_reputation_updated_for_all_revealers(nodes):
    _, res, (out, table) = run_manual(nodes, {0: 100.0, 1: 100.0, 2: 103.0}, 3.0)
    if out.voided:
        pytest.skip("all filtered with this draw")
    assert table[2] == pytest.approx(math.exp(-2))
    assert table[5] == 1.0


def test_settle_wrong_phase(nodes):
    st_ = make_state(nodes)
    with pytest.raises(StateError):
        settle(st_, None, ReputationTable.uniform(range(6), 2))


@settings(max_examples=150, deadline=None)
@given(
    prices=st.lists(st.floats(90, 110), min_size=0, max_size=6),
    fee=st.floats(0, 1000),
    seed=st.integers(0, 2**32 - 1),
)
def test_escrow_conservation_property(nodes, prices, fee, seed):
    st_ = make_state(nodes, fee=fee)
    px = dict(enumerate(prices))
    commit_all(st_, nodes[: len(prices)], px)
    close_commits(st_)
    for i, p in px.items():
        accept_reveal(st_, i, p, nodes[i].public_key)
    res = filter_and_aggregate(st_, np.random.default_rng(seed))
    out, _ = settle(st_, res, ReputationTable.uniform(range(6), 2))
    assert abs(out.refund + sum(out.payouts.values()) - fee) <= 1e-9
    assert (out.aggregate is not None) == bool(out.payouts)


# --- engine and transcripts ----------------------------------------------------------------


def test_engine_task_and_audit(nodes):
    eng = ProtocolEngine(nodes, 3, run_seed=4)
    out, state = eng.run_task(["a"], 0.5, 10.0, lambda n, t: 100.0 + n.id * 0.01)
    assert state.phase is Phase.SETTLED
    lines = transcript_lines(state)
    assert lines[0].startswith('{"D"')
    assert audit_transcript(lines, eng.public_keys) == []
    assert eng.escrowed == pytest.approx(eng.paid + eng.refunded)


def test_audit_flags_tampered_transcript(nodes):
    eng = ProtocolEngine(nodes, len(nodes), run_seed=4)  # everyone selected
    _, state = eng.run_task(["a"], 0.5, 10.0, lambda n, t: 100.0)
    lines = [l.replace('"price": 100.0', '"price": 100.5') for l in transcript_lines(state)]
    assert audit_transcript(lines, eng.public_keys)


def test_engine_bad_reveal_forfeits(nodes):
    eng = ProtocolEngine(nodes, len(nodes), run_seed=1)
    out, state = eng.run_task(
        ["a"], 1.0, 10.0, lambda n, t: 100.0, reveal=lambda n, p: (p + (n.id == 0), n.public_key)
    )
    assert 0 not in out.revealers
    assert (0, "reveal", "digest mismatch") in state.rejections
    assert abs(out.refund + sum(out.payouts.values()) - 10.0) <= 1e-9


def test_engine_rejects_bad_modes(nodes):
    with pytest.raises(InputError):
        ProtocolEngine(nodes, 2, selection_mode="stake")
    with pytest.raises(InputError):
        ProtocolEngine(nodes, 7)


def test_engine_ecvrf_backend(nodes):
    eng = ProtocolEngine(nodes[:3], 3, backend="ecvrf")
    out, state = eng.run_task(["a"], 0.5, 10.0, lambda n, t: 100.0)
    assert out.selected == {0, 1, 2}
    assert audit_transcript(transcript_lines(state), eng.public_keys) == []


def test_anonymity_before_commits(nodes):
    """Until commits arrive the task state holds only public data: thresholds
    and keys, nothing that depends on secret keys."""
    eng = ProtocolEngine(nodes, 2)
    st_ = eng.open(["a"], 0.5, 10.0)
    assert st_.submissions == {}
    assert [e["event"] for e in st_.events] == ["request"]
