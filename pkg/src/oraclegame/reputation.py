"""Per-node reputation and the selection thresholds derived from it."""

from __future__ import annotations

import csv
import io
import math
import sys
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import InputError, RegistrationError, StateError

INITIAL_REPUTATION = 1.0
# exp(-d) underflows to 0.0 once d > ~745; reputation must stay positive.
MIN_REPUTATION = sys.float_info.min


@dataclass
class ReputationTable:
    """Node id -> reputation in (0, 1], plus the expected committee size M."""

    entries: dict[int, float] = field(default_factory=dict)
    expected_committee: int = 5

    @classmethod
    def uniform(cls, node_ids: Iterable[int], expected_committee: int) -> ReputationTable:
        return cls({i: INITIAL_REPUTATION for i in node_ids}, expected_committee)

    def __contains__(self, node: int) -> bool:
        return node in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, node: int) -> float:
        try:
            return self.entries[node]
        except KeyError:
            raise RegistrationError(f"node {node} is not registered") from None

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def copy(self) -> ReputationTable:
        return ReputationTable(dict(self.entries), self.expected_committee)

    def to_records(self) -> list[tuple[int, float]]:
        return sorted(self.entries.items())

    @classmethod
    def from_records(
        cls, records: Iterable[tuple[int, float]], expected_committee: int = 5
    ) -> ReputationTable:
        return cls({int(k): float(v) for k, v in records}, expected_committee)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "reputation"])
        for node, c in self.to_records():
            w.writerow([node, repr(c)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, expected_committee: int = 5) -> ReputationTable:
        rows = csv.DictReader(io.StringIO(text))
        return cls.from_records(((r["node"], r["reputation"]) for r in rows), expected_committee)


def reputation_update(
    table: ReputationTable, reveals: Mapping[int, float] | Iterable[tuple[int, float]], mean: float
) -> ReputationTable:
    """Replace each revealer's reputation with exp(-|X_i - mean|).

    Returns a new table; nodes that did not reveal keep their value.
    """
    items = list(reveals.items() if isinstance(reveals, Mapping) else reveals)
    if not items:
        raise InputError("reveals must be non-empty")
    for node, _ in items:
        if node not in table:
            raise RegistrationError(f"node {node} is not registered")
    out = table.copy()
    for node, price in items:
        out.entries[node] = max(math.exp(-abs(price - mean)), MIN_REPUTATION)
    return out


def optional_range(table: ReputationTable, node: int, M: int | None = None) -> float:
    """Selection threshold C_i * M / sum(C), clamped to [0, 1]."""
    if M is None:
        M = table.expected_committee
    if M <= 0:
        raise InputError(f"M must be positive, got {M}")
    if len(table) == 0:
        raise StateError("reputation table is empty")
    c = table[node]
    total = table.total()
    if total <= 0:
        raise StateError("sum of reputations must be positive")
    return min(1.0, max(0.0, c * M / total))


def all_ranges(table: ReputationTable, M: int | None = None) -> dict[int, float]:
    """optional_range for every registered node, with one pass over the table."""
    if M is None:
        M = table.expected_committee
    if M <= 0:
        raise InputError(f"M must be positive, got {M}")
    if len(table) == 0:
        raise StateError("reputation table is empty")
    total = table.total()
    if total <= 0:
        raise StateError("sum of reputations must be positive")
    return {i: min(1.0, max(0.0, c * M / total)) for i, c in table.entries.items()}


def baseline_range(N: int, M: int) -> float:
    """Reputation-free threshold M / N (pure VRF selection)."""
    if N <= 0 or M <= 0:
        raise InputError("N and M must be positive")
    if M > N:
        raise InputError(f"M={M} exceeds N={N}")
    return M / N
