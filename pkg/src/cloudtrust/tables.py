"""Per-entity trust state.

Each entity keeps two tables: a direct-trust table holding its own
interaction histories (with a point-in-time cache of the computed
trust), and a recommended-list table registering which peers are known
for each service together with the last recommendation value computed
for them.  Both tables serialize into one JSON snapshot per entity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .calculus import DecayParams, InteractionRecord, ReputationFactor, direct_trust

__all__ = [
    "TableError",
    "SnapshotError",
    "DirectEntry",
    "DirectTrustTable",
    "RecommendedEntry",
    "RecommendedListTable",
    "EntityStore",
]


class TableError(ValueError):
    """Misuse of a trust table: self-entries or a clock going backwards."""


class SnapshotError(ValueError):
    """A snapshot document could not be parsed or failed validation."""


# Cache key for a computed direct trust: everything the value depends on
# besides the history itself.
_CacheKey = tuple[float, int, float, float]


@dataclass
class DirectEntry:
    """Interaction history for one (trustee, service) key."""

    history: list[InteractionRecord] = field(default_factory=list)
    _cache: Optional[tuple[_CacheKey, float]] = None

    @property
    def last_time(self) -> float:
        return self.history[-1].time

    @property
    def n_total(self) -> int:
        return len(self.history)

    @property
    def n_positive(self) -> int:
        return sum(1 for record in self.history if record.positive)

    @property
    def n_negative(self) -> int:
        return self.n_total - self.n_positive

    @property
    def mean_score(self) -> float:
        return math.fsum(record.score for record in self.history) / len(self.history)

    @property
    def cached_td(self) -> Optional[float]:
        return self._cache[1] if self._cache else None

    @property
    def cached_at(self) -> Optional[float]:
        return self._cache[0][0] if self._cache else None


class DirectTrustTable:
    """Interaction histories one entity keeps about its trustees,
    keyed by (trustee, service)."""

    def __init__(self, owner: str, history_cap: Optional[int] = None):
        if history_cap is not None and history_cap < 1:
            raise ValueError(f"history_cap must be >= 1, got {history_cap!r}")
        self.owner = owner
        self.history_cap = history_cap
        self._entries: dict[tuple[str, str], DirectEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectTrustTable):
            return NotImplemented
        return self.owner == other.owner and {
            key: entry.history for key, entry in self._entries.items()
        } == {key: entry.history for key, entry in other._entries.items()}

    def keys(self) -> list[tuple[str, str]]:
        return sorted(self._entries)

    def entry(self, trustee: str, service: str) -> Optional[DirectEntry]:
        return self._entries.get((trustee, service))

    def record_interaction(self, trustee: str, service: str, record: InteractionRecord) -> None:
        """Append one interaction; rejects self-trust and out-of-order times."""
        if trustee == self.owner:
            raise TableError(
                f"{self.owner!r} cannot record an interaction with itself; self-trust is implicit"
            )
        entry = self._entries.get((trustee, service))
        if entry is None:
            entry = DirectEntry()
            self._entries[(trustee, service)] = entry
        elif record.time < entry.last_time:
            raise TableError(
                f"interaction at t={record.time!r} predates last recorded "
                f"t={entry.last_time!r} for ({trustee!r}, {service!r})"
            )
        entry.history.append(record)
        if self.history_cap is not None and len(entry.history) > self.history_cap:
            del entry.history[: len(entry.history) - self.history_cap]
        entry._cache = None

    def lookup_direct(
        self,
        trustee: str,
        service: str,
        t_now: float,
        params: DecayParams,
        rf: Optional[ReputationFactor] = None,
    ) -> Optional[float]:
        """Direct trust recomputed over the stored history at `t_now`,
        or None when there is no history for the key."""
        entry = self._entries.get((trustee, service))
        if entry is None:
            return None
        key: _CacheKey = (t_now, params.k, params.tau, rf.bonus if rf else 0.0)
        if entry._cache is not None and entry._cache[0] == key:
            return entry._cache[1]
        td = direct_trust(entry.history, t_now, params, rf)
        entry._cache = (key, td)
        return td

    def counts(self, trustee: str, service: str) -> tuple[int, int]:
        """(n_positive, n_total) for the key; (0, 0) when absent."""
        entry = self._entries.get((trustee, service))
        if entry is None:
            return (0, 0)
        return (entry.n_positive, entry.n_total)


@dataclass
class RecommendedEntry:
    """One peer registered for a service, with the last recommendation
    value computed for it (None until one exists)."""

    peer: str
    td: Optional[float]
    updated_at: float


class RecommendedListTable:
    """Per-service registry of peers known to offer or rate a service."""

    def __init__(self, owner: str):
        self.owner = owner
        self._entries: dict[str, dict[str, RecommendedEntry]] = {}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RecommendedListTable):
            return NotImplemented
        return self.owner == other.owner and self._entries == other._entries

    def services(self) -> list[str]:
        return sorted(self._entries)

    def peers(self, service: str) -> list[str]:
        return sorted(self._entries.get(service, {}))

    def lookup(self, service: str, peer: str) -> Optional[RecommendedEntry]:
        return self._entries.get(service, {}).get(peer)

    def update(self, service: str, peer: str, td: Optional[float], t_now: float) -> None:
        """Upsert the entry for (service, peer); rejects self-entries."""
        if peer == self.owner:
            raise TableError(f"{self.owner!r} cannot appear in its own recommended list")
        if td is not None and not (0.0 <= td <= 1.0):
            raise ValueError(f"recommended trust must be in [0, 1], got {td!r}")
        self._entries.setdefault(service, {})[peer] = RecommendedEntry(peer, td, t_now)

    def register(self, service: str, peer: str, t_now: float = 0.0) -> None:
        """Add a peer for a service if absent, leaving any existing entry
        (and its cached value) untouched."""
        if peer == self.owner:
            raise TableError(f"{self.owner!r} cannot appear in its own recommended list")
        bucket = self._entries.setdefault(service, {})
        if peer not in bucket:
            bucket[peer] = RecommendedEntry(peer, None, t_now)

    def entries(self) -> Iterator[tuple[str, RecommendedEntry]]:
        for service in sorted(self._entries):
            for peer in sorted(self._entries[service]):
                yield service, self._entries[service][peer]


@dataclass
class EntityStore:
    """Both tables one entity maintains, snapshotted as a single unit."""

    owner: str
    direct: DirectTrustTable
    recommended: RecommendedListTable

    @classmethod
    def new(cls, owner: str, history_cap: Optional[int] = None) -> "EntityStore":
        return cls(owner, DirectTrustTable(owner, history_cap), RecommendedListTable(owner))

    def to_json(self) -> str:
        """Serialize to the snapshot document (sorted, diff-friendly)."""
        direct = []
        for trustee, service in self.direct.keys():
            entry = self.direct.entry(trustee, service)
            direct.append(
                {
                    "trustee": trustee,
                    "service": service,
                    "history": [
                        {"t": r.time, "score": r.score, "positive": r.positive}
                        for r in entry.history
                    ],
                }
            )
        recommended = [
            {
                "service": service,
                "peer": entry.peer,
                "td": entry.td,
                "updated_at": entry.updated_at,
            }
            for service, entry in self.recommended.entries()
        ]
        document = {"owner": self.owner, "direct": direct, "recommended": recommended}
        return json.dumps(document, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EntityStore":
        """Restore a store from a snapshot document.

        Histories are replayed through `record_interaction`, so the
        monotone-clock and no-self-trust invariants are re-checked.
        """
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"snapshot is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise SnapshotError("snapshot root must be a JSON object")
        try:
            owner = _expect(document, "owner", str, "snapshot")
            store = cls.new(owner)
            for i, item in enumerate(_expect(document, "direct", list, "snapshot")):
                where = f"direct[{i}]"
                if not isinstance(item, dict):
                    raise SnapshotError(f"{where} must be an object")
                trustee = _expect(item, "trustee", str, where)
                service = _expect(item, "service", str, where)
                history = _expect(item, "history", list, where)
                if not history:
                    raise SnapshotError(f"{where}.history must not be empty")
                for j, raw in enumerate(history):
                    at = f"{where}.history[{j}]"
                    if not isinstance(raw, dict):
                        raise SnapshotError(f"{at} must be an object")
                    record = InteractionRecord(
                        time=_expect(raw, "t", (int, float), at),
                        score=_expect(raw, "score", (int, float), at),
                        positive=_expect(raw, "positive", bool, at),
                    )
                    store.direct.record_interaction(trustee, service, record)
            for i, item in enumerate(_expect(document, "recommended", list, "snapshot")):
                where = f"recommended[{i}]"
                if not isinstance(item, dict):
                    raise SnapshotError(f"{where} must be an object")
                td = item.get("td")
                if td is not None and not isinstance(td, (int, float)):
                    raise SnapshotError(f"{where}.td must be a number or null")
                store.recommended.update(
                    _expect(item, "service", str, where),
                    _expect(item, "peer", str, where),
                    td,
                    _expect(item, "updated_at", (int, float), where),
                )
        except SnapshotError:
            raise
        except ValueError as exc:
            raise SnapshotError(f"snapshot failed validation: {exc}") from exc
        return store


def _expect(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise SnapshotError(f"{where} is missing key {key!r}")
    value = obj[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise SnapshotError(f"{where}.{key} must be a boolean, got {value!r}")
    elif not isinstance(value, kind) or isinstance(value, bool):
        raise SnapshotError(f"{where}.{key} has the wrong type: {value!r}")
    return value
