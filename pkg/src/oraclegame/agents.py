"""Behaviour models: price sources, honest and malicious executors, publishers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import incentive
from .crypto import KeyPair
from .errors import InputError

Role = Literal["honest", "malicious"]

MALICIOUS_STRATEGIES = ("rational", "random", "fixed")
PUBLISHER_STRATEGIES = ("recommended", "random")


@dataclass(frozen=True)
class NodeIdentity:
    id: int
    key: KeyPair
    role: Role = "honest"
    stake: float = 0.0
    attack_sign: int = 1

    @property
    def public_key(self) -> bytes:
        return self.key.public_key

    @property
    def is_malicious(self) -> bool:
        return self.role == "malicious"


@dataclass(frozen=True)
class PriceSource:
    source_id: str
    true_price: float = 100.0
    noise_sigma: float = 0.1


@dataclass(frozen=True)
class MaliciousStrategy:
    """``rational`` best-responds to (K, P); ``random`` adds U[0, delta_max];
    ``fixed`` adds ``delta``."""

    kind: str = "rational"
    delta: float = 0.0
    delta_max: float = 2.0

    def __post_init__(self):
        if self.kind not in MALICIOUS_STRATEGIES:
            raise InputError(f"unknown malicious strategy {self.kind!r}")
        if self.delta < 0 or self.delta_max < 0:
            raise InputError("strategy offsets must be non-negative")


def sample_price(source: PriceSource, rng: np.random.Generator) -> float:
    if source.noise_sigma == 0:
        return float(source.true_price)
    return float(source.true_price + rng.normal(0.0, source.noise_sigma))


def honest_action(node: NodeIdentity, task, source_sample: float) -> float:
    return source_sample


def malicious_deviation(
    task, strategy: MaliciousStrategy, rng: np.random.Generator | None = None
) -> float:
    """Unsigned deviation a malicious node adds to its sample for ``task``."""
    if strategy.kind == "rational":
        return incentive.follower_best_response(task.K, min(task.P, task.K))
    if strategy.kind == "fixed":
        return strategy.delta
    if rng is None:
        raise InputError("random strategy needs an rng")
    return float(rng.uniform(0.0, strategy.delta_max))


def malicious_action(
    node: NodeIdentity,
    task,
    source_sample: float,
    strategy: MaliciousStrategy | str = "rational",
    rng: np.random.Generator | None = None,
) -> float:
    if isinstance(strategy, str):
        strategy = MaliciousStrategy(strategy)
    return source_sample + node.attack_sign * malicious_deviation(task, strategy, rng)


def publisher_action(
    u: float, K: float, strategy: str = "recommended", rng: np.random.Generator | None = None
) -> float:
    if strategy == "recommended":
        return incentive.recommend_fee(u, K)
    if strategy == "random":
        if rng is None:
            raise InputError("random publisher strategy needs an rng")
        return float(rng.uniform(0.0, K))
    raise InputError(f"unknown publisher strategy {strategy!r}")
