"""Domain types, resource normalization, and scenario configuration.

Everything downstream (policies, simulator, metrics, CLI) consumes the value
objects defined here. All exported types are immutable after construction and
safe to share across threads; mutation happens only inside the simulation
engine's private state.

Scenario configs are plain JSON documents whose top-level keys mirror the
``ScenarioConfig`` field names. ``load_scenario`` and ``serialize_scenario``
round-trip exactly.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any

_MASK64 = (1 << 64) - 1

# Default fusion weights: equal emphasis on idleness, queue headroom,
# bandwidth, and latency. Overridable per scenario.
DEFAULT_ALPHA = 0.25
DEFAULT_BETA = 0.25
DEFAULT_DELTA = 0.25
DEFAULT_EPSILON_W = 0.25

DEFAULT_SMOOTHING_ETA = 0.7
DEFAULT_PENALTY_GAMMA_BASE = 0.5
DEFAULT_SCORE_FLOOR = 1e-6
DEFAULT_MONITOR_INTERVAL_MS = 50.0
DEFAULT_QUEUE_CAPACITY = 40

# Stream labels fed to mix_seed() so each random stream is decorrelated from
# the others while remaining a pure function of the scenario seed.
STREAM_ARRIVALS = 0xA001
STREAM_TASK_ATTRS = 0xA002
STREAM_NODE_PROFILE = 0xA003


class ConfigError(ValueError):
    """A scenario document was rejected. ``field_path`` names the bad entry."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path
        self.message = message


class Scenario(str, Enum):
    """Network/load regime. S1 = nominal, S2 = moderate, S3 = stressed."""

    S1 = "s1"
    S2 = "s2"
    S3 = "s3"


class PolicyName(str, Enum):
    DYNAMIC = "dynamic"
    RR = "rr"
    SRA = "sra"
    CLOUD_ONLY = "cloud-only"


# Extra one-way network latency injected by each regime, milliseconds.
SCENARIO_EXTRA_LATENCY_MS = {Scenario.S1: 0.0, Scenario.S2: 100.0, Scenario.S3: 500.0}

# Arrival rate as a fraction of aggregate edge service capacity.
SCENARIO_UTILIZATION = {Scenario.S1: 0.5, Scenario.S2: 0.8, Scenario.S3: 1.1}


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(base: int, *parts: int) -> int:
    """Derive a decorrelated 64-bit seed from ``base`` and integer labels.

    Used both for internal stream splitting and for per-cell seeds in grid
    runs: each label is folded in through a splitmix64 round, so nearby
    (seed, label) pairs map to unrelated streams.
    """
    x = base & _MASK64
    for p in parts:
        x = _splitmix64(x ^ (p & _MASK64))
    return x


def clamp01(x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@dataclass(frozen=True)
class RawNodeSample:
    """One monitor reading for one node, as the scheduler sees it.

    ``link_latency`` is the effective one-way latency in milliseconds
    (hardware base plus any regime surcharge or anomaly in effect when the
    sample was taken). ``timestamp`` is the sample time in ms.
    """

    cpu_idle_fraction: float
    queue_length: int
    available_bandwidth: float  # Mbit/s
    link_latency: float  # ms
    memory_used: float  # MB
    timestamp: float  # ms

    def __post_init__(self):
        if not 0.0 <= self.cpu_idle_fraction <= 1.0:
            raise ValueError(f"cpu_idle_fraction out of [0, 1]: {self.cpu_idle_fraction}")
        if self.queue_length < 0:
            raise ValueError(f"queue_length negative: {self.queue_length}")
        if self.available_bandwidth < 0 or self.link_latency < 0 or self.memory_used < 0:
            raise ValueError("bandwidth, latency and memory_used must be non-negative")


@dataclass(frozen=True)
class ResourceStateVector:
    """Normalized per-node state. Every component lies in [0, 1] and higher
    always means more favorable for placement."""

    u: float  # CPU idleness
    q: float  # queue headroom
    b: float  # relative bandwidth
    l: float  # latency favorability

    def __post_init__(self):
        for name in ("u", "q", "b", "l"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {v}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u, self.q, self.b, self.l)


@dataclass(frozen=True)
class SchedulingWeights:
    """Fusion weights for the four normalized resource components."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    delta: float = DEFAULT_DELTA
    epsilon_w: float = DEFAULT_EPSILON_W

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.delta, self.epsilon_w)
        if any(v < 0 for v in vals):
            raise ValueError(f"weights must be non-negative: {vals}")
        if not any(v > 0 for v in vals):
            raise ValueError("at least one weight must be positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.delta, self.epsilon_w)


@dataclass(frozen=True)
class NodeDescriptor:
    """Static capabilities of one edge node.

    ``background_load`` is the fraction of CPU consumed by duties other than
    detection; it shows up in monitor samples as reduced idleness (and hence
    in static-snapshot allocation) but does not slow detection service, whose
    deliverable rate is already ``compute_rate``.
    """

    node_id: int
    compute_rate: float  # detection tasks per second
    memory_capacity: float  # MB
    base_link_latency: float  # ms, hardware one-way latency to the cloud
    link_bandwidth: float  # Mbit/s
    queue_capacity: int
    background_load: float = 0.0

    def __post_init__(self):
        if self.node_id < 0:
            raise ValueError(f"node_id negative: {self.node_id}")
        if self.compute_rate <= 0:
            raise ValueError(f"compute_rate must be positive: {self.compute_rate}")
        if self.memory_capacity <= 0:
            raise ValueError(f"memory_capacity must be positive: {self.memory_capacity}")
        if self.base_link_latency < 0:
            raise ValueError(f"base_link_latency negative: {self.base_link_latency}")
        if self.link_bandwidth <= 0:
            raise ValueError(f"link_bandwidth must be positive: {self.link_bandwidth}")
        if self.queue_capacity < 1:
            raise ValueError(f"queue_capacity must be >= 1: {self.queue_capacity}")
        if not 0.0 <= self.background_load < 1.0:
            raise ValueError(f"background_load out of [0, 1): {self.background_load}")


@dataclass(frozen=True)
class MetricBounds:
    """Per-node calibration used by ``normalize_sample``.

    Bandwidth and latency spans are shared across the fleet (computed from
    the scenario's effective hardware ranges); ``queue_capacity`` is the
    node's own, since queue headroom is measured against it.
    """

    bandwidth_min: float
    bandwidth_max: float
    latency_min: float
    latency_max: float
    queue_capacity: int

    def __post_init__(self):
        if not self.bandwidth_min < self.bandwidth_max:
            raise ValueError(
                f"degenerate bandwidth bounds: [{self.bandwidth_min}, {self.bandwidth_max}]"
            )
        if not self.latency_min < self.latency_max:
            raise ValueError(
                f"degenerate latency bounds: [{self.latency_min}, {self.latency_max}]"
            )
        if self.queue_capacity < 1:
            raise ValueError(f"queue_capacity must be >= 1: {self.queue_capacity}")


def normalize_sample(raw: RawNodeSample, bounds: MetricBounds) -> ResourceStateVector:
    """Map a raw monitor sample onto the favorable-is-high unit hypercube.

    Out-of-range readings are clamped, never rejected: a stale or spiky
    sample must not crash the scheduler mid-run.
    """
    u = clamp01(raw.cpu_idle_fraction)
    q = 1.0 - clamp01(raw.queue_length / bounds.queue_capacity)
    b = clamp01(
        (raw.available_bandwidth - bounds.bandwidth_min)
        / (bounds.bandwidth_max - bounds.bandwidth_min)
    )
    l = 1.0 - clamp01(
        (raw.link_latency - bounds.latency_min) / (bounds.latency_max - bounds.latency_min)
    )
    return ResourceStateVector(u=u, q=q, b=b, l=l)


@dataclass(frozen=True)
class OverloadThresholds:
    """Trip points for the overload detector.

    ``latency_threshold_ms`` of None means "derive from the scenario":
    twice the fleet's worst-case effective latency, so regime surcharges do
    not count as anomalies but genuine spikes do.
    """

    queue_threshold: float = 0.8
    latency_threshold_ms: float | None = None
    memory_threshold: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.queue_threshold <= 1.0:
            raise ValueError(f"queue_threshold out of (0, 1]: {self.queue_threshold}")
        if self.latency_threshold_ms is not None and self.latency_threshold_ms <= 0:
            raise ValueError(f"latency_threshold_ms must be positive: {self.latency_threshold_ms}")
        if not 0.0 < self.memory_threshold <= 1.0:
            raise ValueError(f"memory_threshold out of (0, 1]: {self.memory_threshold}")


@dataclass(frozen=True)
class WorkloadParams:
    """Shape of the synthetic inspection workload."""

    frame_size: float = 8.0  # Mbit per camera frame
    crop_count_mean: float = 2.0
    crop_count_max: int = 8
    crop_frac_min: float = 0.02  # each crop, as a fraction of frame_size
    crop_frac_max: float = 0.06
    service_noise_sigma: float = 0.1  # log-normal sigma; 0 disables noise
    arrival_mode: str = "poisson"  # "poisson" | "fixed"
    utilization: float | None = None  # overrides the regime default when set

    def __post_init__(self):
        if self.frame_size <= 0:
            raise ValueError(f"frame_size must be positive: {self.frame_size}")
        if self.crop_count_mean < 0:
            raise ValueError(f"crop_count_mean negative: {self.crop_count_mean}")
        if self.crop_count_max < 0:
            raise ValueError(f"crop_count_max negative: {self.crop_count_max}")
        if not 0.0 <= self.crop_frac_min <= self.crop_frac_max:
            raise ValueError(
                f"bad crop fraction range: [{self.crop_frac_min}, {self.crop_frac_max}]"
            )
        if self.crop_frac_max * self.crop_count_max > 1.0:
            raise ValueError("crop_frac_max * crop_count_max must not exceed one frame")
        if self.service_noise_sigma < 0:
            raise ValueError(f"service_noise_sigma negative: {self.service_noise_sigma}")
        if self.arrival_mode not in ("poisson", "fixed"):
            raise ValueError(f"arrival_mode must be 'poisson' or 'fixed': {self.arrival_mode}")
        if self.utilization is not None and self.utilization <= 0:
            raise ValueError(f"utilization must be positive: {self.utilization}")


@dataclass(frozen=True)
class CloudParams:
    """Cloud inference tier sizing.

    ``service_rate`` is crops per second. When None it defaults to
    ``rate_multiplier`` times the scenario arrival rate, which keeps the
    cloud ahead of collaborative demand (about two crops per task) while
    remaining the bottleneck for whole-frame offload.
    ``cloud_only_factor`` is the service-time multiplier when the cloud must
    run localization itself.
    """

    service_rate: float | None = None
    rate_multiplier: float = 2.1
    cloud_only_factor: float = 1.5

    def __post_init__(self):
        if self.service_rate is not None and self.service_rate <= 0:
            raise ValueError(f"service_rate must be positive: {self.service_rate}")
        if self.rate_multiplier <= 0:
            raise ValueError(f"rate_multiplier must be positive: {self.rate_multiplier}")
        if self.cloud_only_factor <= 0:
            raise ValueError(f"cloud_only_factor must be positive: {self.cloud_only_factor}")


@dataclass(frozen=True)
class MemoryModel:
    """Simulated per-node memory: fixed detector footprint plus a buffer per
    queued task."""

    detector_footprint_mb: float = 300.0
    per_task_mb: float = 1.5

    def __post_init__(self):
        if self.detector_footprint_mb < 0 or self.per_task_mb < 0:
            raise ValueError("memory model parameters must be non-negative")


@dataclass(frozen=True)
class LatencySpike:
    """A link anomaly: multiply one node's effective latency for a window.

    Monitor samples taken inside the window report the inflated latency and
    transfers started inside it pay it."""

    node_id: int
    start_ms: float
    end_ms: float
    multiplier: float = 10.0

    def __post_init__(self):
        if self.node_id < 0:
            raise ValueError(f"node_id negative: {self.node_id}")
        if not 0.0 <= self.start_ms < self.end_ms:
            raise ValueError(f"bad spike window: [{self.start_ms}, {self.end_ms})")
        if self.multiplier <= 1.0:
            raise ValueError(f"multiplier must exceed 1: {self.multiplier}")

    def active(self, t: float) -> bool:
        return self.start_ms <= t < self.end_ms


def make_heterogeneous_nodes(
    count: int,
    profile_seed: int = 7,
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
) -> tuple[NodeDescriptor, ...]:
    """Synthesize a heterogeneous fleet within the reference hardware ranges.

    Detection rates ramp from weak to strong across the fleet with jittered
    steps, so every fleet size contains both classes and capability-blind
    splitting genuinely overloads the weak end. Link and memory parameters
    draw independently; the whole profile is a pure function of
    (count, profile_seed).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1: {count}")
    rng = random.Random(mix_seed(profile_seed, STREAM_NODE_PROFILE))
    nodes = []
    for i in range(count):
        ramp = i / (count - 1) if count > 1 else 0.5
        compute = (8.0 + 32.0 * ramp) * rng.uniform(0.85, 1.15)
        nodes.append(
            NodeDescriptor(
                node_id=i,
                compute_rate=round(compute, 3),
                memory_capacity=float(round(rng.uniform(1024.0, 8192.0))),
                base_link_latency=round(rng.uniform(5.0, 60.0), 3),
                link_bandwidth=round(rng.uniform(20.0, 200.0), 3),
                queue_capacity=queue_capacity,
                background_load=round(rng.uniform(0.05, 0.5), 3),
            )
        )
    return tuple(nodes)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one simulation run."""

    nodes: tuple[NodeDescriptor, ...]
    scenario_regime: Scenario = Scenario.S1
    policy: PolicyName = PolicyName.DYNAMIC
    # long enough that steady-state behavior dominates the startup transient
    # even on the largest default fleet
    task_count: int = 10_000
    rng_seed: int = 1
    extra_network_latency: float | None = None  # ms; None = regime default
    arrival_rate: float | None = None  # tasks/s; None = regime utilization
    weights: SchedulingWeights = field(default_factory=SchedulingWeights)
    smoothing_eta: float = DEFAULT_SMOOTHING_ETA
    penalty_gamma_base: float = DEFAULT_PENALTY_GAMMA_BASE
    score_floor: float = DEFAULT_SCORE_FLOOR
    monitor_interval: float = DEFAULT_MONITOR_INTERVAL_MS  # ms
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    cloud: CloudParams = field(default_factory=CloudParams)
    memory_model: MemoryModel = field(default_factory=MemoryModel)
    overload: OverloadThresholds = field(default_factory=OverloadThresholds)
    latency_spike: LatencySpike | None = None
    record_events: bool = False

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("nodes must not be empty")
        ids = [n.node_id for n in self.nodes]
        if ids != list(range(len(self.nodes))):
            raise ValueError(f"node_id values must be 0..{len(self.nodes) - 1} in order: {ids}")
        if self.task_count < 0:
            raise ValueError(f"task_count negative: {self.task_count}")
        if not 0.0 <= self.smoothing_eta <= 1.0:
            raise ValueError(f"smoothing_eta out of [0, 1]: {self.smoothing_eta}")
        if not 0.0 < self.penalty_gamma_base < 1.0:
            raise ValueError(f"penalty_gamma_base out of (0, 1): {self.penalty_gamma_base}")
        if self.score_floor <= 0:
            raise ValueError(f"score_floor must be positive: {self.score_floor}")
        if self.monitor_interval <= 0:
            raise ValueError(f"monitor_interval must be positive: {self.monitor_interval}")
        if self.extra_network_latency is not None and self.extra_network_latency < 0:
            raise ValueError(f"extra_network_latency negative: {self.extra_network_latency}")
        if self.arrival_rate is not None and self.arrival_rate <= 0:
            raise ValueError(f"arrival_rate must be positive: {self.arrival_rate}")
        if self.latency_spike is not None and self.latency_spike.node_id >= len(self.nodes):
            raise ValueError(f"latency_spike.node_id out of range: {self.latency_spike.node_id}")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def total_compute_rate(self) -> float:
        return math.fsum(n.compute_rate for n in self.nodes)

    def effective_extra_latency(self) -> float:
        if self.extra_network_latency is not None:
            return self.extra_network_latency
        return SCENARIO_EXTRA_LATENCY_MS[self.scenario_regime]

    def effective_arrival_rate(self) -> float:
        """Tasks per second offered to the dispatcher."""
        if self.arrival_rate is not None:
            return self.arrival_rate
        util = self.workload.utilization
        if util is None:
            util = SCENARIO_UTILIZATION[self.scenario_regime]
        return util * self.total_compute_rate()

    def cloud_service_rate(self) -> float:
        """Crops per second the cloud tier can classify."""
        if self.cloud.service_rate is not None:
            return self.cloud.service_rate
        return self.cloud.rate_multiplier * self.effective_arrival_rate()

    def latency_threshold_ms(self) -> float:
        if self.overload.latency_threshold_ms is not None:
            return self.overload.latency_threshold_ms
        extra = self.effective_extra_latency()
        worst = max(n.base_link_latency for n in self.nodes)
        # an all-zero-latency fleet would yield threshold 0; keep it positive
        # so any measurable latency on such a fleet counts as anomalous
        return max(2.0 * (worst + extra), 1.0)


def build_metric_bounds(cfg: ScenarioConfig) -> tuple[MetricBounds, ...]:
    """Calibrate normalization bounds from the scenario's effective hardware.

    Bandwidth and latency spans cover the fleet (latency includes the regime
    surcharge so the spread between nodes survives normalization in every
    regime). A homogeneous fleet would make a span degenerate, so such spans
    are padded symmetrically; an explicitly constructed degenerate
    ``MetricBounds`` is still an error.
    """
    extra = cfg.effective_extra_latency()
    bws = [n.link_bandwidth for n in cfg.nodes]
    lats = [n.base_link_latency + extra for n in cfg.nodes]
    bw_lo, bw_hi = _padded_span(min(bws), max(bws))
    lat_lo, lat_hi = _padded_span(min(lats), max(lats))
    return tuple(
        MetricBounds(
            bandwidth_min=bw_lo,
            bandwidth_max=bw_hi,
            latency_min=lat_lo,
            latency_max=lat_hi,
            queue_capacity=n.queue_capacity,
        )
        for n in cfg.nodes
    )


def _padded_span(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo > 1e-9:
        return lo, hi
    pad = max(1.0, abs(lo) * 0.5)
    return lo - pad, hi + pad


# --- JSON (de)serialization -------------------------------------------------

_SECTION_TYPES = {
    "weights": SchedulingWeights,
    "workload": WorkloadParams,
    "cloud": CloudParams,
    "memory_model": MemoryModel,
    "overload": OverloadThresholds,
    "latency_spike": LatencySpike,
}

_TOP_LEVEL_KEYS = {
    "nodes",
    "node_count",
    "node_profile_seed",
    "queue_capacity",
    "scenario_regime",
    "policy",
    "task_count",
    "rng_seed",
    "extra_network_latency",
    "arrival_rate",
    "weights",
    "smoothing_eta",
    "penalty_gamma_base",
    "score_floor",
    "monitor_interval",
    "workload",
    "cloud",
    "memory_model",
    "overload",
    "latency_spike",
    "record_events",
}


def _build_section(cls, value: Any, path: str):
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    allowed = {f.name for f in fields(cls)}
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    try:
        return cls(**value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_node(value: Any, path: str) -> NodeDescriptor:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    allowed = {f.name for f in fields(NodeDescriptor)}
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    try:
        return NodeDescriptor(**value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def scenario_from_dict(doc: dict[str, Any]) -> ScenarioConfig:
    """Validate a parsed config document and construct a ScenarioConfig.

    Errors are reported with the path of the offending field, e.g.
    ``nodes[2].compute_rate``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("<root>", f"expected an object, got {type(doc).__name__}")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")

    regime_raw = doc.get("scenario_regime", "s1")
    try:
        regime = Scenario(str(regime_raw).lower())
    except ValueError:
        raise ConfigError(
            "scenario_regime",
            f"must be one of {[s.value for s in Scenario]}, got {regime_raw!r}",
        ) from None

    policy_raw = doc.get("policy", "dynamic")
    try:
        policy = PolicyName(str(policy_raw).lower())
    except ValueError:
        raise ConfigError(
            "policy",
            f"must be one of {[p.value for p in PolicyName]}, got {policy_raw!r}",
        ) from None

    if "nodes" in doc:
        raw_nodes = doc["nodes"]
        if not isinstance(raw_nodes, list) or not raw_nodes:
            raise ConfigError("nodes", "expected a non-empty array of node objects")
        nodes = tuple(_build_node(n, f"nodes[{i}]") for i, n in enumerate(raw_nodes))
        if "node_count" in doc and doc["node_count"] != len(nodes):
            raise ConfigError(
                "node_count", f"is {doc['node_count']} but nodes has {len(nodes)} entries"
            )
    else:
        count = doc.get("node_count")
        if count is None:
            raise ConfigError("nodes", "either nodes or node_count is required")
        if not isinstance(count, int) or count < 1:
            raise ConfigError("node_count", f"must be a positive integer, got {count!r}")
        try:
            nodes = make_heterogeneous_nodes(
                count,
                profile_seed=doc.get("node_profile_seed", 7),
                queue_capacity=doc.get("queue_capacity", DEFAULT_QUEUE_CAPACITY),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError("node_count", str(exc)) from exc

    kwargs: dict[str, Any] = {"nodes": nodes, "scenario_regime": regime, "policy": policy}
    for section, cls in _SECTION_TYPES.items():
        if section in doc and doc[section] is not None:
            kwargs[section] = _build_section(cls, doc[section], section)

    for key in (
        "task_count",
        "rng_seed",
        "extra_network_latency",
        "arrival_rate",
        "smoothing_eta",
        "penalty_gamma_base",
        "score_floor",
        "monitor_interval",
        "record_events",
    ):
        if key in doc:
            kwargs[key] = doc[key]

    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(_guess_field(str(exc)), str(exc)) from exc


def _guess_field(message: str) -> str:
    # Map a constructor complaint back to a field name where possible.
    for key in sorted(_TOP_LEVEL_KEYS, key=len, reverse=True):
        if key in message:
            return key
    return "<config>"


def scenario_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    """Canonical plain-dict form. Synthesized fleets serialize concretely, so
    load(serialize(cfg)) == cfg regardless of how the fleet was built."""
    doc: dict[str, Any] = {
        "nodes": [
            {
                "node_id": n.node_id,
                "compute_rate": n.compute_rate,
                "memory_capacity": n.memory_capacity,
                "base_link_latency": n.base_link_latency,
                "link_bandwidth": n.link_bandwidth,
                "queue_capacity": n.queue_capacity,
                "background_load": n.background_load,
            }
            for n in cfg.nodes
        ],
        "scenario_regime": cfg.scenario_regime.value,
        "policy": cfg.policy.value,
        "task_count": cfg.task_count,
        "rng_seed": cfg.rng_seed,
        "extra_network_latency": cfg.extra_network_latency,
        "arrival_rate": cfg.arrival_rate,
        "weights": {
            "alpha": cfg.weights.alpha,
            "beta": cfg.weights.beta,
            "delta": cfg.weights.delta,
            "epsilon_w": cfg.weights.epsilon_w,
        },
        "smoothing_eta": cfg.smoothing_eta,
        "penalty_gamma_base": cfg.penalty_gamma_base,
        "score_floor": cfg.score_floor,
        "monitor_interval": cfg.monitor_interval,
        "workload": {
            "frame_size": cfg.workload.frame_size,
            "crop_count_mean": cfg.workload.crop_count_mean,
            "crop_count_max": cfg.workload.crop_count_max,
            "crop_frac_min": cfg.workload.crop_frac_min,
            "crop_frac_max": cfg.workload.crop_frac_max,
            "service_noise_sigma": cfg.workload.service_noise_sigma,
            "arrival_mode": cfg.workload.arrival_mode,
            "utilization": cfg.workload.utilization,
        },
        "cloud": {
            "service_rate": cfg.cloud.service_rate,
            "rate_multiplier": cfg.cloud.rate_multiplier,
            "cloud_only_factor": cfg.cloud.cloud_only_factor,
        },
        "memory_model": {
            "detector_footprint_mb": cfg.memory_model.detector_footprint_mb,
            "per_task_mb": cfg.memory_model.per_task_mb,
        },
        "overload": {
            "queue_threshold": cfg.overload.queue_threshold,
            "latency_threshold_ms": cfg.overload.latency_threshold_ms,
            "memory_threshold": cfg.overload.memory_threshold,
        },
        "record_events": cfg.record_events,
    }
    if cfg.latency_spike is not None:
        doc["latency_spike"] = {
            "node_id": cfg.latency_spike.node_id,
            "start_ms": cfg.latency_spike.start_ms,
            "end_ms": cfg.latency_spike.end_ms,
            "multiplier": cfg.latency_spike.multiplier,
        }
    return doc


def serialize_scenario(cfg: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def load_scenario(text: str) -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def load_scenario_file(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigError("<config>", f"config file not found: {path}") from None
    return load_scenario(text)


def apply_overrides(doc: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply KEY=VALUE overrides to a config document.

    Keys use dotted paths into nested sections (``workload.frame_size``).
    Values are parsed as JSON where possible, otherwise taken as strings.
    Unknown keys are rejected so typos fail loudly.
    """
    out = json.loads(json.dumps(doc))  # deep copy, keeps plain types
    for item in overrides:
        if "=" not in item:
            raise ConfigError("--override", f"expected KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.split(".")
        if parts[0] not in _TOP_LEVEL_KEYS:
            raise ConfigError(key, "unknown config field")
        if len(parts) == 1:
            out[parts[0]] = value
        elif len(parts) == 2:
            section = parts[0]
            if section not in _SECTION_TYPES:
                raise ConfigError(key, f"{section} is not a nested section")
            allowed = {f.name for f in fields(_SECTION_TYPES[section])}
            if parts[1] not in allowed:
                raise ConfigError(key, "unknown config field")
            out.setdefault(section, {})
            if not isinstance(out[section], dict):
                raise ConfigError(key, f"{section} is not an object in this document")
            out[section][parts[1]] = value
        else:
            raise ConfigError(key, "override paths go at most one level deep")
    return out
