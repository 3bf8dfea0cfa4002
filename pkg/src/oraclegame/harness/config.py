from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..agents import MALICIOUS_STRATEGIES, PUBLISHER_STRATEGIES
from ..crypto import VRF_BACKENDS
from ..errors import ConfigError
from ..protocol import SELECTION_MODES

ATTACK_SIGNS = ("positive", "negative", "alternating")


@dataclass(frozen=True)
class RunConfig:
    """One simulated run. Defaults: N=50, lambda=0.4, M=5, K=10, quality
    weight 0.5, and a stationary price feed."""

    seed: int = 0
    N: int = 50
    lam: float = 0.4
    M: int = 5
    K: float = 10.0
    u: float = 0.5
    tasks: int = 200
    selection_mode: str = "reputation"
    publisher_strategy: str = "recommended"
    malicious_strategy: str = "rational"
    malicious_delta: float = 1.0
    malicious_delta_max: float = 2.0
    attack_sign: str = "positive"
    true_price: float = 100.0
    noise_sigma: float = 0.1
    n_sources: int = 3
    vrf_backend: str = "simulation"
    update_filtered: bool = True
    snapshot_every: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def bad(msg):
            raise ConfigError(msg)

        if not 0 <= self.seed < 2**64:
            bad(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.N < 1:
            bad("N must be positive")
        if not 0.0 <= self.lam <= 1.0:
            bad(f"lam must lie in [0, 1], got {self.lam}")
        if not 0 < self.M <= self.N:
            bad(f"need 0 < M <= N, got M={self.M}, N={self.N}")
        if self.K <= 0:
            bad("K must be positive")
        if not 0.0 <= self.u <= 1.0:
            bad(f"u must lie in [0, 1], got {self.u}")
        if self.tasks < 1:
            bad("tasks must be at least 1")
        if self.selection_mode not in SELECTION_MODES:
            bad(f"selection_mode must be one of {SELECTION_MODES}")
        if self.publisher_strategy not in PUBLISHER_STRATEGIES:
            bad(f"publisher_strategy must be one of {PUBLISHER_STRATEGIES}")
        if self.malicious_strategy not in MALICIOUS_STRATEGIES:
            bad(f"malicious_strategy must be one of {MALICIOUS_STRATEGIES}")
        if self.malicious_delta < 0 or self.malicious_delta_max < 0:
            bad("malicious offsets must be non-negative")
        if self.attack_sign not in ATTACK_SIGNS:
            bad(f"attack_sign must be one of {ATTACK_SIGNS}")
        if self.true_price <= 0 or self.noise_sigma < 0:
            bad("need true_price > 0 and noise_sigma >= 0")
        if self.n_sources < 1:
            bad("n_sources must be positive")
        if self.vrf_backend not in VRF_BACKENDS:
            bad(f"vrf_backend must be one of {VRF_BACKENDS}")
        if self.snapshot_every < 0:
            bad("snapshot_every must be non-negative")

    @property
    def n_malicious(self) -> int:
        return int(round(self.lam * self.N))

    def with_(self, **changes) -> RunConfig:
        try:
            return replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)
