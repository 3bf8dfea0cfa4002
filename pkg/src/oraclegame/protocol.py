"""Task lifecycle emulating the on-chain contracts.

One task moves through ``COMMIT -> REVEAL -> FILTERED -> SETTLED``:

1. :func:`open_task` records the request (Q, D, P, K) and round randomness R.
2. Every node privately runs :func:`try_select`; selected nodes seal a price
   with :func:`crypto.commit` and send the stub to :func:`accept_commit`.
3. :func:`close_commits` ends the commit phase; :func:`accept_reveal` checks
   each revealed (price, pk) against its digest.
4. :func:`filter_and_aggregate` drops each reveal with probability
   ``1 - exp(-|X_i - mean|)`` and averages the survivors.
5. :func:`settle` pays survivors P/n, refunds the rest and updates reputation.

:class:`ProtocolEngine` strings the steps together across tasks and owns the
reputation table between them.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from . import crypto
from .errors import InputError, RegistrationError, StateError, SubmissionRejected
from .incentive import recommend_fee
from .reputation import ReputationTable, all_ranges, baseline_range, optional_range, reputation_update

SELECTION_MODES = ("reputation", "baseline")
GENESIS_RANDOMNESS = crypto.digest(b"oraclegame/genesis")


class Phase(str, Enum):
    COMMIT = "commit"
    REVEAL = "reveal"
    FILTERED = "filtered"
    SETTLED = "settled"


@dataclass(frozen=True)
class TaskRequest:
    Q: int
    D: tuple[str, ...]
    P: float
    K: float
    R: bytes
    u: float | None = None


@dataclass(frozen=True)
class Submission:
    node: int
    vrf_value: float
    vrf_proof: bytes
    commit_digest: bytes = b""
    revealed_price: float | None = None
    revealed_pk: bytes | None = None

    def sealed(self, price: float, public_key: bytes) -> Submission:
        return replace(self, commit_digest=crypto.commit(price, public_key))


@dataclass
class FilterResult:
    mean: float
    reveals: dict[int, float]
    survival_prob: dict[int, float]
    survivors: list[int]
    filtered_out: list[int]
    aggregate: float | None


@dataclass
class RoundOutcome:
    selected: set[int]
    filtered_out: set[int]
    aggregate: float | None
    payouts: dict[int, float]
    refund: float
    malicious_selected_count: int = 0
    reveal_variance: float = math.nan
    survivor_variance: float = math.nan
    revealers: list[int] = field(default_factory=list)
    reveals: dict[int, float] = field(default_factory=dict)
    mean: float | None = None
    voided: bool = False


@dataclass
class TaskState:
    """Mutable per-task contract state."""

    request: TaskRequest
    thresholds: dict[int, float]
    public_keys: dict[int, bytes]
    backend: str = crypto.DEFAULT_BACKEND
    phase: Phase = Phase.COMMIT
    submissions: dict[int, Submission] = field(default_factory=dict)
    rejections: list[tuple[int, str, str]] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    @property
    def revealed(self) -> dict[int, float]:
        return {
            n: s.revealed_price
            for n, s in sorted(self.submissions.items())
            if s.revealed_price is not None
        }


def next_randomness(prev: bytes, Q: int) -> bytes:
    return crypto.digest(prev + int(Q).to_bytes(8, "big"))


def open_task(
    Q: int,
    D: Sequence[str],
    u: float,
    K: float,
    prior_randomness: bytes,
    fee: float | None = None,
) -> TaskRequest:
    """Build the request event; the fee defaults to the recommended one."""
    if K <= 0:
        raise InputError(f"K must be positive, got {K}")
    if not D:
        raise InputError("D must name at least one data source")
    P = recommend_fee(u, K) if fee is None else float(fee)
    if P < 0 or not math.isfinite(P):
        raise InputError(f"fee must be finite and non-negative, got {P}")
    return TaskRequest(Q=Q, D=tuple(D), P=P, K=float(K), R=next_randomness(prior_randomness, Q), u=u)


def try_select(
    node,
    task: TaskRequest,
    table: ReputationTable | None = None,
    *,
    threshold: float | None = None,
    backend: str = crypto.DEFAULT_BACKEND,
) -> Submission | None:
    """Node-local lottery: a stub with the VRF proof iff R_i <= threshold.

    ``threshold`` overrides the reputation-derived range (baseline mode).
    """
    if threshold is None:
        if table is None:
            raise InputError("need a reputation table or an explicit threshold")
        threshold = optional_range(table, node.id)
    if crypto.vrf_value(task.R, node.key, backend) > threshold:
        return None
    out = crypto.vrf_evaluate(task.R, node.key, backend)
    return Submission(node=node.id, vrf_value=out.value, vrf_proof=out.proof)


def new_state(
    task: TaskRequest,
    thresholds: Mapping[int, float],
    public_keys: Mapping[int, bytes],
    backend: str = crypto.DEFAULT_BACKEND,
) -> TaskState:
    state = TaskState(task, dict(thresholds), dict(public_keys), backend)
    state.events.append(
        {
            "event": "request",
            "Q": task.Q,
            "D": list(task.D),
            "P": task.P,
            "K": task.K,
            "R": task.R.hex(),
            "u": task.u,
            "backend": backend,
        }
    )
    return state


def _reject(state: TaskState, node: int, stage: str, verdict: str):
    state.rejections.append((node, stage, verdict))
    state.events.append({"event": stage, "node": node, "verdict": verdict})
    raise SubmissionRejected(verdict, node)


def accept_commit(state: TaskState, submission: Submission) -> TaskState:
    if state.phase is not Phase.COMMIT:
        raise StateError(f"commit phase is closed (phase={state.phase.value})")
    node = submission.node
    pk = state.public_keys.get(node)
    if pk is None:
        raise RegistrationError(f"node {node} is not registered")
    if node in state.submissions:
        _reject(state, node, "commit", "duplicate")
    if len(submission.commit_digest) != 32:
        _reject(state, node, "commit", "malformed digest")
    ok = crypto.vrf_verify(
        submission.vrf_value, submission.vrf_proof, state.request.R, pk, state.backend
    )
    if not ok or submission.vrf_value > state.thresholds.get(node, 0.0):
        _reject(state, node, "commit", "not selected")
    state.submissions[node] = replace(submission, revealed_price=None, revealed_pk=None)
    state.events.append(
        {
            "event": "commit",
            "node": node,
            "verdict": "accepted",
            "digest": submission.commit_digest.hex(),
            "vrf_value": submission.vrf_value,
            "vrf_proof": submission.vrf_proof.hex(),
        }
    )
    return state


def close_commits(state: TaskState) -> TaskState:
    if state.phase is not Phase.COMMIT:
        raise StateError("commit phase already closed")
    state.phase = Phase.REVEAL
    return state


def accept_reveal(state: TaskState, node: int, price: float, pk: bytes) -> TaskState:
    if state.phase is not Phase.REVEAL:
        raise StateError(f"reveal phase is not open (phase={state.phase.value})")
    sub = state.submissions.get(node)
    if sub is None:
        _reject(state, node, "reveal", "no commit")
    if sub.revealed_price is not None:
        _reject(state, node, "reveal", "duplicate")
    try:
        matches = crypto.commit(price, pk) == sub.commit_digest
    except InputError:
        matches = False
    if not matches:
        _reject(state, node, "reveal", "digest mismatch")
    state.submissions[node] = replace(sub, revealed_price=float(price), revealed_pk=bytes(pk))
    state.events.append(
        {"event": "reveal", "node": node, "verdict": "accepted", "price": float(price), "pk": pk.hex()}
    )
    return state


def filter_reveals(reveals: Mapping[int, float], rng: np.random.Generator) -> FilterResult:
    """Probabilistic outlier screen over ``reveals`` (at least one)."""
    if not reveals:
        raise InputError("need at least one reveal to filter")
    nodes = sorted(reveals)
    prices = np.array([reveals[n] for n in nodes], dtype=float)
    mean = float(prices.mean())
    probs = np.exp(-np.abs(prices - mean))
    keep = rng.random(len(nodes)) < probs
    survivors = [n for n, k in zip(nodes, keep) if k]
    filtered = [n for n, k in zip(nodes, keep) if not k]
    aggregate = float(prices[keep].mean()) if keep.any() else None
    return FilterResult(
        mean=mean,
        reveals={n: float(reveals[n]) for n in nodes},
        survival_prob={n: float(p) for n, p in zip(nodes, probs)},
        survivors=survivors,
        filtered_out=filtered,
        aggregate=aggregate,
    )


def filter_and_aggregate(state: TaskState, rng: np.random.Generator) -> FilterResult | None:
    """Close the reveal phase and screen the reveals; ``None`` if nobody revealed."""
    if state.phase is not Phase.REVEAL:
        raise StateError("filtering needs the reveal phase")
    state.phase = Phase.FILTERED
    reveals = state.revealed
    if not reveals:
        state.events.append({"event": "filter", "voided": True})
        return None
    result = filter_reveals(reveals, rng)
    state.events.append(
        {
            "event": "filter",
            "mean": result.mean,
            "survivors": result.survivors,
            "filtered_out": result.filtered_out,
            "aggregate": result.aggregate,
        }
    )
    return result


def settle(
    state: TaskState,
    result: FilterResult | None,
    table: ReputationTable,
    malicious: Iterable[int] = (),
    update_reputation: bool = True,
    update_filtered: bool = True,
) -> tuple[RoundOutcome, ReputationTable]:
    """Pay survivors P/n, refund every other share, update reputation.

    Every revealer is scored against the mean of all reveals; with
    ``update_filtered=False`` only survivors are rescored. A task with no
    reveals or no survivors is voided: the full fee is refunded and
    reputation is left alone.
    """
    if state.phase is not Phase.FILTERED:
        raise StateError("settle needs a filtered task")
    P = state.request.P
    selected = set(state.submissions)
    malicious = set(malicious)
    n_mal = len(selected & malicious)
    if result is None or result.aggregate is None:
        outcome = RoundOutcome(
            selected=selected,
            filtered_out=set(result.filtered_out) if result else set(),
            aggregate=None,
            payouts={},
            refund=P,
            malicious_selected_count=n_mal,
            reveal_variance=_variance(result.reveals.values()) if result else math.nan,
            revealers=sorted(result.reveals) if result else [],
            reveals=dict(result.reveals) if result else {},
            mean=result.mean if result else None,
            voided=True,
        )
        new_table = table
    else:
        n = len(result.reveals)
        share = P / n
        payouts = {node: share for node in result.survivors}
        refund = share * (n - len(result.survivors))
        outcome = RoundOutcome(
            selected=selected,
            filtered_out=set(result.filtered_out),
            aggregate=result.aggregate,
            payouts=payouts,
            refund=refund,
            malicious_selected_count=n_mal,
            reveal_variance=_variance(result.reveals.values()),
            survivor_variance=_variance(result.reveals[s] for s in result.survivors),
            revealers=sorted(result.reveals),
            reveals=dict(result.reveals),
            mean=result.mean,
        )
        scored = result.reveals if update_filtered else {s: result.reveals[s] for s in result.survivors}
        new_table = reputation_update(table, scored, result.mean) if update_reputation else table
    state.phase = Phase.SETTLED
    state.events.append(
        {
            "event": "outcome",
            "aggregate": outcome.aggregate,
            "payouts": {str(k): v for k, v in sorted(outcome.payouts.items())},
            "refund": outcome.refund,
            "voided": outcome.voided,
        }
    )
    return outcome, new_table


def _variance(values: Iterable[float]) -> float:
    arr = np.fromiter(values, dtype=float)
    return float(arr.var()) if arr.size else math.nan


def transcript_lines(state: TaskState) -> list[str]:
    """One JSON object per protocol event, in order."""
    return [json.dumps(e, sort_keys=True) for e in state.events]


def audit_transcript(lines: Iterable[str], public_keys: Mapping[int, bytes]) -> list[str]:
    """Re-check a transcript; returns a list of problems (empty if clean).

    Verifies every accepted commit's VRF proof, every accepted reveal's digest
    and escrow conservation of the outcome.
    """
    problems: list[str] = []
    request = None
    digests: dict[int, bytes] = {}
    for raw in lines:
        e = json.loads(raw)
        kind = e["event"]
        if kind == "request":
            request = e
        elif kind == "commit" and e.get("verdict") == "accepted":
            node = e["node"]
            ok = crypto.vrf_verify(
                e["vrf_value"],
                bytes.fromhex(e["vrf_proof"]),
                bytes.fromhex(request["R"]),
                public_keys[node],
                request.get("backend", crypto.DEFAULT_BACKEND),
            )
            if not ok:
                problems.append(f"commit from node {node} has an invalid VRF proof")
            digests[node] = bytes.fromhex(e["digest"])
        elif kind == "reveal" and e.get("verdict") == "accepted":
            node = e["node"]
            if crypto.commit(e["price"], bytes.fromhex(e["pk"])) != digests.get(node):
                problems.append(f"reveal from node {node} does not match its commit")
        elif kind == "outcome":
            total = sum(e["payouts"].values()) + e["refund"]
            if abs(total - request["P"]) > 1e-9:
                problems.append(f"escrow not conserved: {total} != {request['P']}")
    return problems


class ProtocolEngine:
    """Runs tasks back to back over a fixed node population.

    ``submit`` callbacks receive ``(node, task)`` and return the price the
    node commits; the engine treats it as opaque.
    """

    def __init__(
        self,
        nodes: Sequence,
        expected_committee: int,
        *,
        run_seed: int = 0,
        selection_mode: str = "reputation",
        backend: str = crypto.DEFAULT_BACKEND,
        randomness: bytes = GENESIS_RANDOMNESS,
        update_filtered: bool = True,
    ):
        if selection_mode not in SELECTION_MODES:
            raise InputError(f"unknown selection mode {selection_mode!r}")
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise InputError("node ids must be unique")
        self.nodes = {n.id: n for n in nodes}
        self.M = int(expected_committee)
        baseline_range(len(nodes), self.M)  # validates 0 < M <= N
        self.run_seed = int(run_seed)
        self.selection_mode = selection_mode
        self.backend = backend
        self.randomness = randomness
        self.update_filtered = update_filtered
        self.table = ReputationTable.uniform(ids, self.M)
        self.public_keys = {n.id: n.public_key for n in nodes}
        self.malicious = {n.id for n in nodes if getattr(n, "role", "honest") == "malicious"}
        self.next_q = 1
        self.escrowed = 0.0
        self.refunded = 0.0
        self.paid = 0.0
        self.last_state: TaskState | None = None

    def thresholds(self) -> dict[int, float]:
        if self.selection_mode == "baseline":
            g = baseline_range(len(self.nodes), self.M)
            return {i: g for i in self.nodes}
        return all_ranges(self.table, self.M)

    def open(self, D: Sequence[str], u: float, K: float, fee: float | None = None) -> TaskState:
        task = open_task(self.next_q, D, u, K, self.randomness, fee)
        self.next_q += 1
        self.randomness = task.R
        self.escrowed += task.P
        return new_state(task, self.thresholds(), self.public_keys, self.backend)

    def filter_rng(self, Q: int) -> np.random.Generator:
        return np.random.default_rng([self.run_seed, Q])

    def run_task(
        self,
        D: Sequence[str],
        u: float,
        K: float,
        submit: Callable,
        fee: float | None = None,
        reveal: Callable | None = None,
    ) -> tuple[RoundOutcome, TaskState]:
        """Execute one full task.

        ``reveal(node, price)`` may return a different ``(price, pk)`` pair to
        model misbehaving reveals; by default nodes reveal what they sealed.
        """
        state = self.open(D, u, K, fee)
        task = state.request
        prices: dict[int, float] = {}
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            stub = try_select(
                node, task, threshold=state.thresholds[node_id], backend=self.backend
            )
            if stub is None:
                continue
            price = float(submit(node, task))
            prices[node_id] = price
            try:
                accept_commit(state, stub.sealed(price, node.public_key))
            except SubmissionRejected:
                pass
        close_commits(state)
        for node_id in sorted(state.submissions):
            node = self.nodes[node_id]
            price, pk = prices[node_id], node.public_key
            if reveal is not None:
                price, pk = reveal(node, price)
            try:
                accept_reveal(state, node_id, price, pk)
            except SubmissionRejected:
                pass
        result = filter_and_aggregate(state, self.filter_rng(task.Q))
        outcome, self.table = settle(
            state, result, self.table, self.malicious, update_filtered=self.update_filtered
        )
        self.paid += sum(outcome.payouts.values())
        self.refunded += outcome.refund
        self.last_state = state
        return outcome, state


def outcome_record(outcome: RoundOutcome) -> dict:
    d = asdict(outcome)
    d["selected"] = sorted(outcome.selected)
    d["filtered_out"] = sorted(outcome.filtered_out)
    d["payouts"] = {str(k): v for k, v in sorted(outcome.payouts.items())}
    d["reveals"] = {str(k): v for k, v in sorted(outcome.reveals.items())}
    return d
