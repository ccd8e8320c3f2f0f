"""Deterministic tick-based simulation of a file-sharing access protocol.

Per scheduled request the requester resolves trust in the provider:
its own direct-trust table first, then recommendation chains over the
network's direct tables, and failing both the ignorance value 0.  The
resolved degree is classified and access is granted only when the
level meets the service's requirement.  A granted access samples the
provider's true SLA profile with the run's seeded generator, scores it,
records the interaction, and refreshes the recommended list.

Every run is a pure function of its config: same seed, same trace.
"""
from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .calculus import (
    DecayParams,
    Grade,
    InteractionRecord,
    ReputationFactor,
    SL_METRIC_FIELDS,
    SlaMetrics,
    TrustLevel,
    classify_level,
    resolve_trust_degree,
    satisfaction_level,
    validate_bonus_map,
    DEFAULT_GRADE_BONUS,
    DEFAULT_SL_WEIGHTS,
)
from .graph import (
    DEFAULT_MAX_CHAIN_LEN,
    MAX_CHAIN_LEN,
    MIN_CHAIN_LEN,
    EdgeStats,
    TrustGraph,
    evaluate_recommendation,
)
from .tables import EntityStore

__all__ = [
    "ConfigError",
    "SlaProfile",
    "EntitySpec",
    "ServiceSpec",
    "Request",
    "RandomSchedule",
    "ScenarioConfig",
    "TraceRecord",
    "SimulationResult",
    "TRACE_HEADER",
    "PATH_DIRECT",
    "PATH_RECOMMENDED",
    "PATH_IGNORANCE",
    "gate_access",
    "sample_sla",
    "snapshot_graph",
    "run",
]

PATH_DIRECT = "direct"
PATH_RECOMMENDED = "recommended"
PATH_IGNORANCE = "ignorance"

DECISION_GRANTED = "granted"
DECISION_DENIED = "denied"

TRACE_HEADER = "tick,requester,provider,service,path,td,level,decision,score"

DEFAULT_SLA_CONCENTRATION = 25.0
DEFAULT_POSITIVE_THRESHOLD = 0.5


class ConfigError(ValueError):
    """A scenario config failed to parse or validate."""


@dataclass(frozen=True)
class SlaProfile:
    """True per-metric quality of a provider, each in [0, 1].

    Samples are beta-distributed around each quality; `concentration`
    steers how tight the draws are (higher = less noise).  Qualities of
    exactly 0 or 1 are point masses.
    """

    availability: float
    processing_capacity: float
    recovery_time: float
    connectivity: float
    peak_load_performance: float
    concentration: float = DEFAULT_SLA_CONCENTRATION

    def __post_init__(self) -> None:
        for name in SL_METRIC_FIELDS:
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"profile {name} must be in [0, 1], got {value!r}")
        if not (math.isfinite(self.concentration) and self.concentration > 0):
            raise ValueError(f"concentration must be positive, got {self.concentration!r}")

    @classmethod
    def uniform(cls, quality: float, concentration: float = DEFAULT_SLA_CONCENTRATION) -> "SlaProfile":
        return cls(quality, quality, quality, quality, quality, concentration)

    def qualities(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in SL_METRIC_FIELDS)


@dataclass(frozen=True)
class EntitySpec:
    id: str
    grade: Grade
    profile: SlaProfile


@dataclass(frozen=True)
class ServiceSpec:
    id: str
    required_level: TrustLevel
    providers: Optional[tuple[str, ...]] = None  # None: every other entity provides it


@dataclass(frozen=True)
class Request:
    tick: int
    requester: str
    service: str
    provider: Optional[str] = None  # None: pick the best-ranked candidate


@dataclass(frozen=True)
class RandomSchedule:
    """Arrival model: a fixed number of uniformly drawn requests per tick.

    `provider_choice` picks how the provider is chosen: "ranked" runs
    the usual best-candidate selection, "random" draws one uniformly so
    fuzz runs exercise every resolution path.
    """

    ticks: int
    requests_per_tick: int = 1
    provider_choice: str = "ranked"


@dataclass
class ScenarioConfig:
    seed: int
    entities: list[EntitySpec]
    services: list[ServiceSpec]
    schedule: Optional[list[Request]] = None
    random_schedule: Optional[RandomSchedule] = None
    decay: DecayParams = field(default_factory=DecayParams)
    grade_bonus: dict[Grade, float] = field(default_factory=lambda: dict(DEFAULT_GRADE_BONUS))
    sl_weights: tuple[float, ...] = DEFAULT_SL_WEIGHTS
    max_chain_length: int = DEFAULT_MAX_CHAIN_LEN
    positive_threshold: float = DEFAULT_POSITIVE_THRESHOLD
    history_cap: Optional[int] = None
    graph_snapshots: bool = False

    def entity_ids(self) -> list[str]:
        return [entity.id for entity in self.entities]

    def service_ids(self) -> list[str]:
        return [service.id for service in self.services]

    def candidates(self, requester: str, service: ServiceSpec) -> list[str]:
        pool = service.providers if service.providers is not None else self.entity_ids()
        return sorted(p for p in pool if p != requester)

    def validate(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        ids = self.entity_ids()
        if len(ids) != len(set(ids)):
            raise ConfigError("entity ids must be unique")
        if len(ids) < 2:
            raise ConfigError("a scenario needs at least two entities")
        service_ids = self.service_ids()
        if len(service_ids) != len(set(service_ids)):
            raise ConfigError("service ids must be unique")
        if not service_ids:
            raise ConfigError("a scenario needs at least one service")
        known = set(ids)
        services = {service.id: service for service in self.services}
        for service in self.services:
            if service.providers is not None:
                unknown = set(service.providers) - known
                if unknown:
                    raise ConfigError(
                        f"service {service.id!r} lists unknown providers: {sorted(unknown)}"
                    )
                if not service.providers:
                    raise ConfigError(f"service {service.id!r} has an empty provider list")
        if (self.schedule is None) == (self.random_schedule is None):
            raise ConfigError("exactly one of schedule / random_schedule is required")
        if self.schedule is not None:
            for req in self.schedule:
                if isinstance(req.tick, bool) or not isinstance(req.tick, int) or req.tick < 0:
                    raise ConfigError(f"request tick must be a non-negative integer, got {req.tick!r}")
                if req.requester not in known:
                    raise ConfigError(f"unknown requester {req.requester!r} in schedule")
                if req.service not in services:
                    raise ConfigError(f"unknown service {req.service!r} in schedule")
                spec = services[req.service]
                if req.provider is not None:
                    if req.provider == req.requester:
                        raise ConfigError(
                            f"request at tick {req.tick} targets its own requester {req.requester!r}"
                        )
                    if req.provider not in self.candidates(req.requester, spec):
                        raise ConfigError(
                            f"provider {req.provider!r} does not offer service {req.service!r}"
                        )
                elif not self.candidates(req.requester, spec):
                    raise ConfigError(
                        f"no candidate provider for requester {req.requester!r} "
                        f"on service {req.service!r}"
                    )
        else:
            rs = self.random_schedule
            if rs.ticks < 1 or rs.requests_per_tick < 1:
                raise ConfigError("random_schedule needs ticks >= 1 and requests_per_tick >= 1")
            if rs.provider_choice not in ("ranked", "random"):
                raise ConfigError(
                    f"provider_choice must be 'ranked' or 'random', got {rs.provider_choice!r}"
                )
            for entity in ids:
                for service in self.services:
                    if not self.candidates(entity, service):
                        raise ConfigError(
                            f"no candidate provider for requester {entity!r} "
                            f"on service {service.id!r}; random schedules need full coverage"
                        )
        try:
            validate_bonus_map(self.grade_bonus)
        except ValueError as exc:
            raise ConfigError(f"bad rf_bonus: {exc}") from exc
        if not (MIN_CHAIN_LEN <= self.max_chain_length <= MAX_CHAIN_LEN):
            raise ConfigError(
                f"max_chain_length must be within [{MIN_CHAIN_LEN}, {MAX_CHAIN_LEN}]"
            )
        if not (0.0 <= self.positive_threshold <= 1.0):
            raise ConfigError("positive_threshold must be in [0, 1]")
        if self.history_cap is not None and self.history_cap < 1:
            raise ConfigError("history_cap must be >= 1 when set")
        try:
            satisfaction_level(SlaMetrics(1, 1, 1, 1, 1), self.sl_weights)
        except ValueError as exc:
            raise ConfigError(f"bad sl_weights: {exc}") from exc

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        try:
            entities = [_parse_entity(raw) for raw in _need(data, "entities", list)]
            services = [_parse_service(raw) for raw in _need(data, "services", list)]
            schedule = None
            if "schedule" in data:
                schedule = [_parse_request(raw) for raw in _need(data, "schedule", list)]
            random_schedule = None
            if "random_schedule" in data:
                raw = _need(data, "random_schedule", dict)
                random_schedule = RandomSchedule(
                    ticks=raw.get("ticks", 0),
                    requests_per_tick=raw.get("requests_per_tick", 1),
                    provider_choice=raw.get("provider_choice", "ranked"),
                )
            decay_raw = data.get("decay", {})
            if not isinstance(decay_raw, dict):
                raise ConfigError("decay must be an object with keys k / tau")
            decay = DecayParams(k=decay_raw.get("k", 1), tau=decay_raw.get("tau", 1.0))
            bonus_raw = data.get("rf_bonus")
            if bonus_raw is None:
                grade_bonus = dict(DEFAULT_GRADE_BONUS)
            else:
                if not isinstance(bonus_raw, dict):
                    raise ConfigError("rf_bonus must map High/Medium/Low to numbers")
                try:
                    grade_bonus = {Grade(name): float(v) for name, v in bonus_raw.items()}
                except ValueError as exc:
                    raise ConfigError(f"bad rf_bonus: {exc}") from exc
            weights = data.get("sl_weights", DEFAULT_SL_WEIGHTS)
            if isinstance(weights, dict):
                try:
                    weights = tuple(float(weights[name]) for name in SL_METRIC_FIELDS)
                except KeyError as exc:
                    raise ConfigError(f"sl_weights is missing {exc.args[0]!r}") from exc
            elif isinstance(weights, list):
                weights = tuple(float(w) for w in weights)
            config = cls(
                seed=_need(data, "seed", int),
                entities=entities,
                services=services,
                schedule=schedule,
                random_schedule=random_schedule,
                decay=decay,
                grade_bonus=grade_bonus,
                sl_weights=weights,
                max_chain_length=data.get("max_chain_length", DEFAULT_MAX_CHAIN_LEN),
                positive_threshold=data.get("positive_threshold", DEFAULT_POSITIVE_THRESHOLD),
                history_cap=data.get("history_cap"),
                graph_snapshots=bool(data.get("graph_snapshots", False)),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config failed validation: {exc}") from exc
        config.validate()
        return config

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(handle.read())


def _need(data: dict, key: str, kind):
    if key not in data:
        raise ConfigError(f"config is missing {key!r}")
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"config key {key!r} has the wrong type: {value!r}")
    return value


def _parse_entity(raw: dict) -> EntitySpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"entity entries must be objects, got {raw!r}")
    entity_id = _need(raw, "id", str)
    try:
        grade = Grade(_need(raw, "grade", str))
    except ValueError:
        raise ConfigError(
            f"entity {entity_id!r} has unknown grade {raw.get('grade')!r}; "
            f"expected High/Medium/Low"
        ) from None
    sla = raw.get("sla", 1.0)
    concentration = raw.get("sla_concentration", DEFAULT_SLA_CONCENTRATION)
    if isinstance(sla, (int, float)) and not isinstance(sla, bool):
        profile = SlaProfile.uniform(float(sla), concentration)
    elif isinstance(sla, dict):
        try:
            profile = SlaProfile(
                **{name: float(sla[name]) for name in SL_METRIC_FIELDS},
                concentration=float(sla.get("concentration", concentration)),
            )
        except KeyError as exc:
            raise ConfigError(
                f"entity {entity_id!r} sla is missing {exc.args[0]!r}"
            ) from exc
    else:
        raise ConfigError(f"entity {entity_id!r} sla must be a number or per-metric object")
    return EntitySpec(id=entity_id, grade=grade, profile=profile)


def _parse_service(raw: dict) -> ServiceSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"service entries must be objects, got {raw!r}")
    service_id = _need(raw, "id", str)
    level = TrustLevel.from_roman(_need(raw, "required_level", str))
    providers = raw.get("providers")
    if providers is not None:
        if not isinstance(providers, list) or not all(isinstance(p, str) for p in providers):
            raise ConfigError(f"service {service_id!r} providers must be a list of ids")
        providers = tuple(providers)
    return ServiceSpec(id=service_id, required_level=level, providers=providers)


def _parse_request(raw: dict) -> Request:
    if not isinstance(raw, dict):
        raise ConfigError(f"schedule entries must be objects, got {raw!r}")
    return Request(
        tick=_need(raw, "tick", int),
        requester=_need(raw, "requester", str),
        service=_need(raw, "service", str),
        provider=raw.get("provider"),
    )


@dataclass(frozen=True)
class TraceRecord:
    """One protocol round: resolution, gating decision, and outcome."""

    tick: int
    requester: str
    provider: str
    service: str
    path: str
    td: float
    level: TrustLevel
    decision: str
    sla: Optional[SlaMetrics]
    score: Optional[float]

    @property
    def granted(self) -> bool:
        return self.decision == DECISION_GRANTED

    def csv_row(self) -> list[str]:
        return [
            str(self.tick),
            self.requester,
            self.provider,
            self.service,
            self.path,
            f"{self.td:.4f}",
            self.level.roman,
            self.decision,
            "" if self.score is None else f"{self.score:.4f}",
        ]


@dataclass
class SimulationResult:
    config: ScenarioConfig
    trace: list[TraceRecord]
    stores: dict[str, EntityStore]
    graph_snapshots: dict[tuple[int, int], TrustGraph] = field(default_factory=dict)

    def trace_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRACE_HEADER.split(","))
        for record in self.trace:
            writer.writerow(record.csv_row())
        return buffer.getvalue()


def gate_access(td: float, required: TrustLevel) -> bool:
    """Grant iff the degree's level meets the service's required level."""
    return classify_level(td) >= required


def sample_sla(profile: SlaProfile, rng: random.Random) -> SlaMetrics:
    """Draw one SLA observation around the profile's true qualities."""
    values = []
    for quality in profile.qualities():
        if quality <= 0.0:
            values.append(0.0)
        elif quality >= 1.0:
            values.append(1.0)
        else:
            alpha = quality * profile.concentration
            beta = (1.0 - quality) * profile.concentration
            values.append(min(1.0, max(0.0, rng.betavariate(alpha, beta))))
    return SlaMetrics(*values)


def snapshot_graph(
    stores: Mapping[str, EntityStore],
    rf_by_entity: Mapping[str, ReputationFactor],
    decay: DecayParams,
    t_now: float,
    service: Optional[str] = None,
) -> TrustGraph:
    """Materialize the trust graph induced by every entity's direct
    table, with per-edge trust evaluated at `t_now`.

    `service` restricts the edges; None snapshots all services.
    """
    graph = TrustGraph()
    for owner in stores:
        graph.add_node(owner)
    for owner, store in stores.items():
        for trustee, edge_service in store.direct.keys():
            if service is not None and edge_service != service:
                continue
            entry = store.direct.entry(trustee, edge_service)
            td = store.direct.lookup_direct(
                trustee, edge_service, t_now, decay, rf_by_entity[trustee]
            )
            graph.add_edge(
                owner,
                trustee,
                edge_service,
                EdgeStats(
                    n_positive=entry.n_positive,
                    n_total=entry.n_total,
                    sl=entry.mean_score,
                    direct_trust=td,
                ),
            )
    return graph


def _expand_schedule(config: ScenarioConfig, rng: random.Random) -> list[Request]:
    if config.schedule is not None:
        return sorted(config.schedule, key=lambda r: r.tick)
    requests = []
    entity_ids = sorted(config.entity_ids())
    services = {service.id: service for service in config.services}
    service_ids = sorted(services)
    randomize_provider = config.random_schedule.provider_choice == "random"
    for tick in range(config.random_schedule.ticks):
        for _ in range(config.random_schedule.requests_per_tick):
            requester = rng.choice(entity_ids)
            service = rng.choice(service_ids)
            provider = None
            if randomize_provider:
                provider = rng.choice(config.candidates(requester, services[service]))
            requests.append(
                Request(tick=tick, requester=requester, service=service, provider=provider)
            )
    return requests


class _Simulator:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self.stores = {
            entity.id: EntityStore.new(entity.id, config.history_cap)
            for entity in config.entities
        }
        self.profiles = {entity.id: entity.profile for entity in config.entities}
        self.rf = {
            entity.id: ReputationFactor(entity.grade, config.grade_bonus[entity.grade])
            for entity in config.entities
        }
        self.services = {service.id: service for service in config.services}
        self._seed_recommended_lists()

    def _seed_recommended_lists(self) -> None:
        # Bootstrap: every entity learns who offers each service from the
        # config registry, with no trust value attached yet.
        for service in self.config.services:
            for entity in self.config.entity_ids():
                for provider in self.config.candidates(entity, service):
                    self.stores[entity].recommended.register(service.id, provider)

    def select_provider(self, requester: str, service: ServiceSpec, tick: int) -> str:
        """Pick the candidate the requester trusts most, using its own
        tables only; ties fall back to lexicographic id order."""
        store = self.stores[requester]

        def estimate(candidate: str) -> float:
            td = store.direct.lookup_direct(
                candidate, service.id, tick, self.config.decay, self.rf[candidate]
            )
            if td is not None:
                return td
            entry = store.recommended.lookup(service.id, candidate)
            if entry is not None and entry.td is not None:
                return entry.td
            return 0.0

        candidates = self.config.candidates(requester, service)
        return min(candidates, key=lambda c: (-estimate(c), c))

    def resolve(self, requester: str, provider: str, service: str, tick: int) -> tuple[str, float]:
        """Run the lookup protocol; returns (resolution path, trust degree)."""
        store = self.stores[requester]
        _, n_total = store.direct.counts(provider, service)
        direct = store.direct.lookup_direct(
            provider, service, tick, self.config.decay, self.rf[provider]
        )
        if direct is not None:
            return PATH_DIRECT, resolve_trust_degree(n_total, 0, direct, None)
        # No direct history: every peer holding direct entries for the
        # service answers the recommendation request, which amounts to
        # evaluating chains over the network-wide graph.  The result is
        # cached in the recommended list but recomputed on every miss,
        # so stale values are never served.
        graph = snapshot_graph(self.stores, self.rf, self.config.decay, tick, service)
        outcome = evaluate_recommendation(
            graph, requester, provider, service, self.config.max_chain_length
        )
        if outcome is not None:
            recommended, chain_count = outcome
            td = resolve_trust_degree(0, chain_count, None, recommended)
            store.recommended.update(service, provider, td, tick)
            return PATH_RECOMMENDED, td
        return PATH_IGNORANCE, resolve_trust_degree(0, 0, None, None)

    def run(self) -> SimulationResult:
        result = SimulationResult(self.config, [], self.stores)
        requests = _expand_schedule(self.config, self.rng)
        index_in_tick = 0
        last_tick: Optional[int] = None
        for request in requests:
            if request.tick != last_tick:
                index_in_tick = 0
                last_tick = request.tick
            else:
                index_in_tick += 1
            service = self.services[request.service]
            provider = request.provider or self.select_provider(
                request.requester, service, request.tick
            )
            if self.config.graph_snapshots:
                result.graph_snapshots[(request.tick, index_in_tick)] = snapshot_graph(
                    self.stores, self.rf, self.config.decay, request.tick
                )
            path, td = self.resolve(
                request.requester, provider, request.service, request.tick
            )
            level = classify_level(td)
            granted = gate_access(td, service.required_level)
            sla = None
            score = None
            if granted:
                sla = sample_sla(self.profiles[provider], self.rng)
                score = satisfaction_level(sla, self.config.sl_weights)
                record = InteractionRecord(
                    time=request.tick,
                    score=score,
                    positive=score >= self.config.positive_threshold,
                )
                store = self.stores[request.requester]
                store.direct.record_interaction(provider, request.service, record)
                store.recommended.register(request.service, provider, request.tick)
            result.trace.append(
                TraceRecord(
                    tick=request.tick,
                    requester=request.requester,
                    provider=provider,
                    service=request.service,
                    path=path,
                    td=td,
                    level=level,
                    decision=DECISION_GRANTED if granted else DECISION_DENIED,
                    sla=sla,
                    score=score,
                )
            )
        return result


def run(config: ScenarioConfig) -> SimulationResult:
    """Execute a scenario; deterministic for a given config."""
    config.validate()
    return _Simulator(config).run()
