"""Experiment runner: single runs, mode comparisons, sweeps and payoff tests."""

from __future__ import annotations

import hashlib
import math
from collections import deque
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .. import agents, crypto, incentive
from ..agents import MaliciousStrategy, NodeIdentity, PriceSource
from ..errors import ConfigError
from ..protocol import ProtocolEngine, RoundOutcome
from .config import RunConfig

MA_WINDOW = 10

AXES = {"u": "u", "lambda": "lam", "lam": "lam", "M": "M", "K": "K"}


def derive_seed(*parts) -> int:
    """64-bit seed from an arbitrary tuple of ints/strings."""
    h = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


def seed_fanout(master: int, cell: int, count: int) -> list[int]:
    return [derive_seed("fanout", master, cell, k) for k in range(count)]


@dataclass
class MetricsRow:
    task: int
    Q: int
    fee: float
    committee_size: int
    reveals: int
    malicious_selected: int
    malicious_selected_ma10: float
    honest_selected: int
    filtered: int
    survivors: int
    reveal_variance: float
    survivor_variance: float
    aggregate: float | None
    aggregate_error: float | None
    refund: float
    paid_honest: float
    paid_malicious: float
    u1_realized: float
    u2_realized_malicious: float
    mean_rep_honest: float
    mean_rep_malicious: float
    snapshot: str


METRICS_COLUMNS = [f.name for f in fields(MetricsRow)]


def build_population(cfg: RunConfig) -> list[NodeIdentity]:
    rng = np.random.default_rng(derive_seed("roles", cfg.seed))
    bad = set(rng.permutation(cfg.N)[: cfg.n_malicious].tolist())
    nodes = []
    rank = 0
    for i in range(cfg.N):
        key = crypto.keygen(derive_seed("key", cfg.seed, i))
        if i in bad:
            if cfg.attack_sign == "positive":
                sign = 1
            elif cfg.attack_sign == "negative":
                sign = -1
            else:
                sign = 1 if rank % 2 == 0 else -1
            rank += 1
            nodes.append(NodeIdentity(i, key, "malicious", attack_sign=sign))
        else:
            nodes.append(NodeIdentity(i, key, "honest"))
    return nodes


class Simulation:
    """A seeded run; iterate :meth:`rows` to drive it task by task."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.nodes = build_population(cfg)
        self.engine = ProtocolEngine(
            self.nodes,
            cfg.M,
            run_seed=cfg.seed,
            selection_mode=cfg.selection_mode,
            backend=cfg.vrf_backend,
            randomness=crypto.digest(b"genesis" + cfg.seed.to_bytes(8, "big")),
            update_filtered=cfg.update_filtered,
        )
        self.sources = [
            PriceSource(f"src{j}", cfg.true_price, cfg.noise_sigma) for j in range(cfg.n_sources)
        ]
        self.strategy = MaliciousStrategy(
            cfg.malicious_strategy, cfg.malicious_delta, cfg.malicious_delta_max
        )
        self.alpha_eff = incentive.alpha_effective(cfg.u, cfg.K)
        # Separate streams keep draws aligned across selection modes.
        self._noise = np.random.default_rng(derive_seed("noise", cfg.seed))
        self._pick = np.random.default_rng(derive_seed("source", cfg.seed))
        self._attack = np.random.default_rng(derive_seed("attack", cfg.seed))
        self._publisher = np.random.default_rng(derive_seed("publisher", cfg.seed))
        self.honest_ids = [n.id for n in self.nodes if not n.is_malicious]
        self.malicious_ids = [n.id for n in self.nodes if n.is_malicious]
        self.snapshots: dict[int, list[tuple[int, float]]] = {}
        self.outcomes: list[RoundOutcome] = []

    @property
    def table(self):
        return self.engine.table

    def rows(self) -> Iterator[MetricsRow]:
        cfg = self.cfg
        window: deque[int] = deque(maxlen=MA_WINDOW)
        D = [s.source_id for s in self.sources]
        for t in range(cfg.tasks):
            fee = agents.publisher_action(cfg.u, cfg.K, cfg.publisher_strategy, self._publisher)
            z = self._noise.standard_normal(cfg.N)
            picks = self._pick.integers(0, len(self.sources), cfg.N)
            random_dev = self._attack.uniform(0.0, cfg.malicious_delta_max, cfg.N)
            deviation: dict[int, float] = {}

            def submit(node: NodeIdentity, task) -> float:
                src = self.sources[picks[node.id]]
                sample = src.true_price + src.noise_sigma * z[node.id]
                if not node.is_malicious:
                    return agents.honest_action(node, task, sample)
                if self.strategy.kind == "random":
                    dev = float(random_dev[node.id])
                else:
                    dev = agents.malicious_deviation(task, self.strategy)
                deviation[node.id] = dev
                return sample + node.attack_sign * dev

            outcome, state = self.engine.run_task(D, cfg.u, cfg.K, submit, fee=fee)
            self.outcomes.append(outcome)
            yield self._row(t, outcome, state.request, deviation, window)

    def run(self) -> list[MetricsRow]:
        return list(self.rows())

    def _row(self, t, outcome: RoundOutcome, task, deviation, window) -> MetricsRow:
        cfg = self.cfg
        mal = set(self.malicious_ids)
        window.append(outcome.malicious_selected_count)
        n = len(outcome.revealers)
        agg_err = None if outcome.aggregate is None else abs(outcome.aggregate - cfg.true_price)
        paid = sum(outcome.payouts.values())
        if outcome.aggregate is None:
            u1 = 0.0
        else:
            a = self.alpha_eff
            u1 = a * math.exp(-agg_err) - (1 - a) * paid
        u2s = [
            (task.P / n + task.K * deviation[i] / n) if i in outcome.payouts else 0.0
            for i in outcome.revealers
            if i in mal
        ]
        reps = self.engine.table.entries
        snap = ""
        if cfg.snapshot_every and (t + 1) % cfg.snapshot_every == 0:
            self.snapshots[t] = self.engine.table.to_records()
            snap = str(t)
        return MetricsRow(
            task=t,
            Q=task.Q,
            fee=task.P,
            committee_size=len(outcome.selected),
            reveals=n,
            malicious_selected=outcome.malicious_selected_count,
            malicious_selected_ma10=float(np.mean(window)),
            honest_selected=len(outcome.selected) - outcome.malicious_selected_count,
            filtered=len(outcome.filtered_out),
            survivors=len(outcome.payouts),
            reveal_variance=outcome.reveal_variance,
            survivor_variance=outcome.survivor_variance,
            aggregate=outcome.aggregate,
            aggregate_error=agg_err,
            refund=outcome.refund,
            paid_honest=sum(v for k, v in outcome.payouts.items() if k not in mal),
            paid_malicious=sum(v for k, v in outcome.payouts.items() if k in mal),
            u1_realized=u1,
            u2_realized_malicious=float(np.mean(u2s)) if u2s else math.nan,
            mean_rep_honest=_mean(reps[i] for i in self.honest_ids),
            mean_rep_malicious=_mean(reps[i] for i in self.malicious_ids),
            snapshot=snap,
        )


def _mean(values) -> float:
    arr = np.fromiter(values, dtype=float)
    return float(arr.mean()) if arr.size else math.nan


def run(config: RunConfig) -> Iterator[MetricsRow]:
    """Stream one MetricsRow per task. Fully determined by ``config``."""
    return Simulation(config).rows()


@dataclass
class RunSummary:
    seed: int
    selection_mode: str
    mean_reveal_variance: float
    mean_survivor_variance: float
    aggregate_variance: float
    mean_malicious_selected: float
    mean_committee: float
    mean_u1: float
    mean_u2: float
    min_honest_rep: float
    max_malicious_rep: float

    @property
    def separated(self) -> bool:
        return self.min_honest_rep > self.max_malicious_rep


def summarize(cfg: RunConfig) -> RunSummary:
    sim = Simulation(cfg)
    rows = sim.run()
    reps = sim.table.entries
    aggs = [r.aggregate for r in rows if r.aggregate is not None]
    return RunSummary(
        seed=cfg.seed,
        selection_mode=cfg.selection_mode,
        mean_reveal_variance=_nanmean(r.reveal_variance for r in rows),
        mean_survivor_variance=_nanmean(r.survivor_variance for r in rows),
        aggregate_variance=float(np.var(aggs)) if aggs else math.nan,
        mean_malicious_selected=_nanmean(r.malicious_selected for r in rows),
        mean_committee=_nanmean(r.committee_size for r in rows),
        mean_u1=_nanmean(r.u1_realized for r in rows),
        mean_u2=_nanmean(r.u2_realized_malicious for r in rows),
        min_honest_rep=min((reps[i] for i in sim.honest_ids), default=math.inf),
        max_malicious_rep=max((reps[i] for i in sim.malicious_ids), default=-math.inf),
    )


def _nanmean(values) -> float:
    arr = np.fromiter(values, dtype=float)
    arr = arr[~np.isnan(arr)]
    return float(arr.mean()) if arr.size else math.nan


def summarize_many(configs: Sequence[RunConfig], workers: int = 1) -> list[RunSummary]:
    if workers <= 1 or len(configs) <= 1:
        return [summarize(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(summarize, configs))


def compare_modes(
    config: RunConfig, seeds: int | Sequence[int] = 1, workers: int = 1
) -> tuple[list[RunSummary], list[RunSummary]]:
    """Paired runs of both selection modes over the same seeds."""
    seed_list = [config.seed] if seeds == 1 else (
        seed_fanout(config.seed, 0, seeds) if isinstance(seeds, int) else list(seeds)
    )
    cfgs = [config.with_(seed=s, selection_mode=m) for m in ("reputation", "baseline") for s in seed_list]
    out = summarize_many(cfgs, workers)
    k = len(seed_list)
    return out[:k], out[k:]


def compare_consistency(
    config: RunConfig, seeds: int | Sequence[int] = 1, workers: int = 1
) -> tuple[float, float]:
    """Mean per-task reveal variance (reputation mode, baseline mode)."""
    rep, base = compare_modes(config, seeds, workers)
    return (
        float(np.mean([r.mean_reveal_variance for r in rep])),
        float(np.mean([r.mean_reveal_variance for r in base])),
    )


def sweep(
    config: RunConfig,
    axis: str,
    values: Sequence,
    seeds: int = 10,
    workers: int = 1,
) -> list[dict]:
    """One aggregated row per (axis value, selection mode)."""
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {sorted(set(AXES))}")
    field_name = AXES[axis]
    cells = []
    for idx, v in enumerate(values):
        v = int(v) if field_name == "M" else float(v)
        base_cfg = config.with_(**{field_name: v})
        cells.append((idx, v, base_cfg, seed_fanout(config.seed, idx, seeds)))
    jobs = [
        c.with_(seed=s, selection_mode=m)
        for _, _, c, seed_list in cells
        for m in ("reputation", "baseline")
        for s in seed_list
    ]
    results = iter(summarize_many(jobs, workers))
    table = []
    for idx, v, c, seed_list in cells:
        for m in ("reputation", "baseline"):
            runs = [next(results) for _ in seed_list]
            var = np.array([r.mean_reveal_variance for r in runs])
            table.append(
                {
                    "axis": axis,
                    "value": v,
                    "alpha_eff": incentive.alpha_effective(c.u, c.K),
                    "mode": m,
                    "seeds": len(seed_list),
                    "reveal_variance": float(var.mean()),
                    "reveal_variance_se": float(var.std(ddof=1) / math.sqrt(len(var)))
                    if len(var) > 1
                    else math.nan,
                    "survivor_variance": float(np.nanmean([r.mean_survivor_variance for r in runs])),
                    "aggregate_variance": float(np.nanmean([r.aggregate_variance for r in runs])),
                    "malicious_selected": float(np.mean([r.mean_malicious_selected for r in runs])),
                    "committee_size": float(np.mean([r.mean_committee for r in runs])),
                }
            )
    return table


PAYOFF_CELLS = [
    ("recommended", "rational"),
    ("recommended", "random"),
    ("random", "rational"),
    ("random", "random"),
]


def payoff_experiment(
    config: RunConfig, trials: int = 50, seeds: int = 10, workers: int = 1
) -> list[dict]:
    """Mean realised U1 / U2 under each publisher x executor strategy cell.

    Every cell runs ``trials`` tasks on the same seeds, so cells differ only in
    the strategies played.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    seed_list = seed_fanout(config.seed, 0, seeds)
    jobs = [
        config.with_(seed=s, tasks=trials, publisher_strategy=p, malicious_strategy=e)
        for p, e in PAYOFF_CELLS
        for s in seed_list
    ]
    results = iter(summarize_many(jobs, workers))
    table = []
    for p, e in PAYOFF_CELLS:
        runs = [next(results) for _ in seed_list]
        table.append(
            {
                "publisher_strategy": p,
                "malicious_strategy": e,
                "trials": trials,
                "seeds": len(seed_list),
                "mean_u1": float(np.mean([r.mean_u1 for r in runs])),
                "mean_u2": float(np.nanmean([r.mean_u2 for r in runs])),
                "u1_per_seed": [r.mean_u1 for r in runs],
                "u2_per_seed": [r.mean_u2 for r in runs],
            }
        )
    return table
