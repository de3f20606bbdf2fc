"""Deterministic discrete-event engine for the edge-cloud inspection pipeline.

Pipeline stages per task: placement at arrival, FIFO edge detection service,
delay-only network transfer of the cropped regions, FIFO cloud
classification. Zero-crop tasks complete at the edge. Under the cloud-only
policy the edge tier is bypassed: whole frames ship over the chosen camera
link and the cloud runs localization itself at a configured service-time
multiplier.

Determinism contract: the full trace is a pure function of the scenario
config (seed included). The event queue orders on (time, sequence number),
so equal-time events fire in insertion order; every random draw comes from
one of two streams split off the scenario seed (arrival gaps, and per-task
attributes drawn up front in task order so they do not depend on policy).
Monitor samples refresh only on ticks: placements between ticks see stale
state on purpose.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Any

from .core import (
    MemoryModel,
    NodeDescriptor,
    PolicyName,
    RawNodeSample,
    Scenario,
    ScenarioConfig,
    STREAM_ARRIVALS,
    STREAM_TASK_ATTRS,
    clamp01,
    make_heterogeneous_nodes,
    mix_seed,
)
from .scheduler import decide, make_policy_state

# Event kinds, in the order they were first introduced. The integer codes
# are internal; the names appear in event logs.
ARRIVAL = 0
MONITOR_TICK = 1
EDGE_SERVICE_DONE = 2
TRANSFER_DONE = 3
CLOUD_SERVICE_DONE = 4

EVENT_NAMES = {
    ARRIVAL: "arrival",
    MONITOR_TICK: "monitor-tick",
    EDGE_SERVICE_DONE: "edge-service-done",
    TRANSFER_DONE: "transfer-done",
    CLOUD_SERVICE_DONE: "cloud-service-done",
}


@dataclass
class Task:
    """One inspection task and its trace record.

    Attribute fields are drawn before the run starts; timestamp fields are
    filled in as the task moves through the pipeline and stay None for
    stages it never enters.
    """

    task_id: int
    arrival_ms: float
    frame_size: float  # Mbit
    crop_count: int
    crop_total_size: float  # Mbit
    noise_mult: float  # service-time multiplier, log-normal around 1
    node_id: int | None = None
    decision_ms: float | None = None
    edge_start_ms: float | None = None
    edge_done_ms: float | None = None
    transfer_done_ms: float | None = None
    cloud_start_ms: float | None = None
    completion_ms: float | None = None
    drop_ms: float | None = None
    dropped: bool = False
    comm_ms: float = 0.0  # total transfer-stage delay paid by this task
    decision_scores: tuple[float, ...] = ()

    def latency_ms(self) -> float | None:
        if self.completion_ms is None:
            return None
        return self.completion_ms - self.arrival_ms


@dataclass(frozen=True)
class SimTrace:
    """Everything a run produced, ready for aggregation."""

    config: ScenarioConfig
    tasks: tuple[Task, ...]
    node_assignments: tuple[int, ...]
    node_peak_memory: tuple[float, ...]  # MB
    node_busy_ms: tuple[float, ...]
    horizon_ms: float  # time of last completion or drop
    completions: int
    drops: int
    events: tuple[dict[str, Any], ...] = ()


def schedule_arrival_process(
    rate: float, count: int, rng: random.Random, mode: str = "poisson"
) -> list[float]:
    """Arrival times in ms for ``count`` tasks at ``rate`` tasks/second.

    Poisson mode draws exponential gaps; fixed mode spaces arrivals exactly
    1/rate apart. Both start one gap after time zero.
    """
    if count < 0:
        raise ValueError(f"count negative: {count}")
    if count == 0:
        return []
    if rate <= 0:
        raise ValueError(f"rate must be positive: {rate}")
    if mode == "fixed":
        gap = 1000.0 / rate
        return [(i + 1) * gap for i in range(count)]
    if mode != "poisson":
        raise ValueError(f"unknown arrival mode: {mode!r}")
    times = []
    t = 0.0
    for _ in range(count):
        t += rng.expovariate(rate) * 1000.0
        times.append(t)
    return times


def edge_service_time(node: NodeDescriptor, rng: random.Random, sigma: float = 0.1) -> float:
    """Detection service time in ms: 1000/compute_rate with log-normal noise.

    sigma = 0 disables the noise, making the time exactly the reciprocal
    rate. The multiplier has median 1, so the median draw equals the base.
    """
    base = 1000.0 / node.compute_rate
    if sigma <= 0.0:
        return base
    return base * rng.lognormvariate(0.0, sigma)


def transfer_time(payload: float, bandwidth: float, latency: float, extra: float = 0.0) -> float:
    """One-way transfer delay in ms: propagation plus serialization.

    ``payload`` in Mbit, ``bandwidth`` in Mbit/s, ``latency`` and ``extra``
    in ms. Monotone increasing in payload, decreasing in bandwidth.
    """
    if payload < 0:
        raise ValueError(f"payload negative: {payload}")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive: {bandwidth}")
    if latency < 0 or extra < 0:
        raise ValueError("latency terms must be non-negative")
    return latency + extra + 1000.0 * payload / bandwidth


def truncated_poisson(rng: random.Random, mean: float, cap: int) -> int:
    """Poisson draw clipped to [0, cap]."""
    if mean <= 0.0 or cap == 0:
        return 0
    limit = math.exp(-mean)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            break
        k += 1
    return k if k < cap else cap


def build_tasks(cfg: ScenarioConfig) -> list[Task]:
    """Pre-draw every task: arrival time, crops, sizes, service noise.

    Attributes are a pure function of (seed, task_id), never of the policy,
    so policy comparisons on one seed face the identical workload.
    """
    w = cfg.workload
    arr_rng = random.Random(mix_seed(cfg.rng_seed, STREAM_ARRIVALS))
    times = schedule_arrival_process(
        cfg.effective_arrival_rate(), cfg.task_count, arr_rng, w.arrival_mode
    )
    attr_rng = random.Random(mix_seed(cfg.rng_seed, STREAM_TASK_ATTRS))
    tasks = []
    for i, t in enumerate(times):
        if w.service_noise_sigma > 0.0:
            noise = attr_rng.lognormvariate(0.0, w.service_noise_sigma)
        else:
            noise = 1.0
        crops = truncated_poisson(attr_rng, w.crop_count_mean, w.crop_count_max)
        total_frac = 0.0
        for _ in range(crops):
            total_frac += attr_rng.uniform(w.crop_frac_min, w.crop_frac_max)
        tasks.append(
            Task(
                task_id=i,
                arrival_ms=t,
                frame_size=w.frame_size,
                crop_count=crops,
                crop_total_size=w.frame_size * total_frac,
                noise_mult=noise,
            )
        )
    return tasks


class _SimNode:
    """Live edge-node state: FIFO queue, one service slot, accounting."""

    __slots__ = (
        "desc",
        "queue",
        "current",
        "busy_ms",
        "busy_since",
        "tick_busy_base",
        "assigned",
        "mem",
        "peak_mem",
    )

    def __init__(self, desc: NodeDescriptor, mem: MemoryModel):
        self.desc = desc
        self.queue: deque[Task] = deque()
        self.current: Task | None = None
        self.busy_ms = 0.0
        self.busy_since = 0.0
        self.tick_busy_base = 0.0
        self.assigned = 0
        self.mem = mem.detector_footprint_mb
        self.peak_mem = self.mem

    def queue_length(self) -> int:
        return len(self.queue) + (1 if self.current is not None else 0)

    def busy_total(self, now: float) -> float:
        if self.current is not None:
            return self.busy_ms + (now - self.busy_since)
        return self.busy_ms


class _Engine:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.extra = cfg.effective_extra_latency()
        self.mem_model = cfg.memory_model
        self.nodes = [_SimNode(d, cfg.memory_model) for d in cfg.nodes]
        self.tasks = build_tasks(cfg)
        self.cloud_base_ms = 1000.0 / cfg.cloud_service_rate()
        self.cloud_only = cfg.policy is PolicyName.CLOUD_ONLY
        self.cloud_queue: deque[Task] = deque()
        self.cloud_current: Task | None = None
        self.spike = cfg.latency_spike
        self.samples = self._take_samples(0.0, 0.0)
        self.policy = make_policy_state(cfg, self.samples)
        self.heap: list[tuple[float, int, int, int]] = []
        self.seq = 0
        self.last_tick_ms = 0.0
        self.completions = 0
        self.drops = 0
        self.resolved = 0
        self.arrivals_seen = 0
        self.last_resolve_ms = 0.0
        self.events: list[dict[str, Any]] = []

    # -- plumbing ---------------------------------------------------------

    def _push(self, time: float, kind: int, task_id: int):
        self.seq += 1
        heapq.heappush(self.heap, (time, self.seq, kind, task_id))

    def _log(self, t: float, kind: int, task_id: int | None, node_id: int | None):
        if self.cfg.record_events:
            self.events.append(
                {"t_ms": t, "kind": EVENT_NAMES[kind], "task_id": task_id, "node_id": node_id}
            )

    def _spiked_base_latency(self, node_id: int, t: float) -> float:
        base = self.nodes[node_id].desc.base_link_latency
        if self.spike is not None and self.spike.node_id == node_id and self.spike.active(t):
            return base * self.spike.multiplier
        return base

    def _update_memory(self, node: _SimNode):
        node.mem = self.mem_model.detector_footprint_mb + self.mem_model.per_task_mb * (
            node.queue_length()
        )
        if node.mem > node.peak_mem:
            node.peak_mem = node.mem

    def _take_samples(self, now: float, window_ms: float) -> list[RawNodeSample]:
        out = []
        for node in self.nodes:
            if window_ms > 0.0:
                frac = clamp01((node.busy_total(now) - node.tick_busy_base) / window_ms)
            else:
                frac = 0.0
            idle = (1.0 - node.desc.background_load) * (1.0 - frac)
            out.append(
                RawNodeSample(
                    cpu_idle_fraction=idle,
                    queue_length=node.queue_length(),
                    available_bandwidth=node.desc.link_bandwidth,
                    link_latency=self._spiked_base_latency(node.desc.node_id, now) + self.extra,
                    memory_used=node.mem,
                    timestamp=now,
                )
            )
        return out

    def _cloud_time(self, task: Task) -> float:
        if self.cloud_only:
            work = max(1, task.crop_count)
            return self.cfg.cloud.cloud_only_factor * work * self.cloud_base_ms
        return task.crop_count * self.cloud_base_ms

    # -- stage transitions --------------------------------------------------

    def _complete(self, task: Task, now: float):
        task.completion_ms = now
        self.completions += 1
        self.resolved += 1
        if now > self.last_resolve_ms:
            self.last_resolve_ms = now

    def _drop(self, task: Task, now: float):
        task.dropped = True
        task.drop_ms = now
        self.drops += 1
        self.resolved += 1
        if now > self.last_resolve_ms:
            self.last_resolve_ms = now

    def _start_edge(self, node: _SimNode, now: float):
        task = node.queue.popleft()
        node.current = task
        node.busy_since = now
        task.edge_start_ms = now
        duration = (1000.0 / node.desc.compute_rate) * task.noise_mult
        self._push(now + duration, EDGE_SERVICE_DONE, task.task_id)

    def _start_transfer(self, task: Task, now: float):
        node_id = task.node_id
        desc = self.nodes[node_id].desc
        payload = task.frame_size if self.cloud_only else task.crop_total_size
        comm = transfer_time(
            payload, desc.link_bandwidth, self._spiked_base_latency(node_id, now), self.extra
        )
        task.comm_ms = comm
        self._push(now + comm, TRANSFER_DONE, task.task_id)

    def _start_cloud(self, task: Task, now: float):
        self.cloud_current = task
        task.cloud_start_ms = now
        self._push(now + self._cloud_time(task), CLOUD_SERVICE_DONE, task.task_id)

    # -- event handlers -----------------------------------------------------

    def _on_arrival(self, task: Task, now: float):
        self.arrivals_seen += 1
        decision = decide(self.policy, self.samples, task.task_id, now)
        task.node_id = decision.node_id
        task.decision_ms = now
        task.decision_scores = decision.decision_scores
        node = self.nodes[decision.node_id]
        node.assigned += 1
        self._log(now, ARRIVAL, task.task_id, decision.node_id)
        if self.cloud_only:
            self._start_transfer(task, now)
            return
        if node.queue_length() >= node.desc.queue_capacity:
            self._drop(task, now)
            return
        node.queue.append(task)
        self._update_memory(node)
        if node.current is None:
            self._start_edge(node, now)

    def _on_monitor(self, now: float):
        self.samples = self._take_samples(now, now - self.last_tick_ms)
        for node in self.nodes:
            node.tick_busy_base = node.busy_total(now)
        self.last_tick_ms = now
        self._log(now, MONITOR_TICK, None, None)
        if self.resolved < len(self.tasks):
            self._push(now + self.cfg.monitor_interval, MONITOR_TICK, -1)

    def _on_edge_done(self, task: Task, now: float):
        node = self.nodes[task.node_id]
        task.edge_done_ms = now
        node.busy_ms += now - node.busy_since
        node.current = None
        self._update_memory(node)
        self._log(now, EDGE_SERVICE_DONE, task.task_id, task.node_id)
        if task.crop_count == 0:
            self._complete(task, now)
        else:
            self._start_transfer(task, now)
        if node.queue:
            self._start_edge(node, now)

    def _on_transfer_done(self, task: Task, now: float):
        task.transfer_done_ms = now
        self._log(now, TRANSFER_DONE, task.task_id, task.node_id)
        if self.cloud_current is None:
            self._start_cloud(task, now)
        else:
            self.cloud_queue.append(task)

    def _on_cloud_done(self, task: Task, now: float):
        self._complete(task, now)
        self.cloud_current = None
        self._log(now, CLOUD_SERVICE_DONE, task.task_id, task.node_id)
        if self.cloud_queue:
            self._start_cloud(self.cloud_queue.popleft(), now)

    # -- main loop ----------------------------------------------------------

    def run(self) -> SimTrace:
        self._push(0.0, MONITOR_TICK, -1)
        for task in self.tasks:
            self._push(task.arrival_ms, ARRIVAL, task.task_id)
        total = len(self.tasks)
        while self.heap and self.resolved < total:
            now, _, kind, task_id = heapq.heappop(self.heap)
            if kind == ARRIVAL:
                self._on_arrival(self.tasks[task_id], now)
            elif kind == EDGE_SERVICE_DONE:
                self._on_edge_done(self.tasks[task_id], now)
            elif kind == TRANSFER_DONE:
                self._on_transfer_done(self.tasks[task_id], now)
            elif kind == CLOUD_SERVICE_DONE:
                self._on_cloud_done(self.tasks[task_id], now)
            else:
                self._on_monitor(now)
        if self.arrivals_seen != self.completions + self.drops:
            raise AssertionError(
                f"conservation violated: {self.arrivals_seen} arrivals, "
                f"{self.completions} completions, {self.drops} drops"
            )
        return SimTrace(
            config=self.cfg,
            tasks=tuple(self.tasks),
            node_assignments=tuple(n.assigned for n in self.nodes),
            node_peak_memory=tuple(n.peak_mem for n in self.nodes),
            node_busy_ms=tuple(n.busy_ms for n in self.nodes),
            horizon_ms=self.last_resolve_ms,
            completions=self.completions,
            drops=self.drops,
            events=tuple(self.events),
        )


def run_simulation(cfg: ScenarioConfig) -> SimTrace:
    """Run one scenario to completion (every task completed or dropped)."""
    return _Engine(cfg).run()


def _fmt(value) -> str:
    if value is None:
        return "-"
    return repr(value)


def trace_lines(trace: SimTrace) -> list[str]:
    """Canonical per-task text form of a trace, for determinism checks."""
    lines = [
        f"policy={trace.config.policy.value} scenario={trace.config.scenario_regime.value} "
        f"nodes={trace.config.node_count} seed={trace.config.rng_seed} "
        f"completions={trace.completions} drops={trace.drops} horizon={trace.horizon_ms!r}"
    ]
    for t in trace.tasks:
        lines.append(
            " ".join(
                (
                    str(t.task_id),
                    _fmt(t.arrival_ms),
                    _fmt(t.node_id),
                    "1" if t.dropped else "0",
                    _fmt(t.decision_ms),
                    _fmt(t.edge_start_ms),
                    _fmt(t.edge_done_ms),
                    _fmt(t.transfer_done_ms),
                    _fmt(t.cloud_start_ms),
                    _fmt(t.completion_ms),
                    str(t.crop_count),
                    _fmt(t.crop_total_size),
                    _fmt(t.comm_ms),
                    _fmt(t.decision_scores),
                )
            )
        )
    return lines


def trace_digest(trace: SimTrace) -> str:
    """SHA-256 over the canonical trace text."""
    h = hashlib.sha256()
    for line in trace_lines(trace):
        h.update(line.encode("ascii"))
        h.update(b"\n")
    return h.hexdigest()


def make_default_config(
    policy: PolicyName | str = PolicyName.DYNAMIC,
    regime: Scenario | str = Scenario.S1,
    node_count: int = 8,
    seed: int = 1,
    task_count: int = 10_000,
    **kwargs,
) -> ScenarioConfig:
    """A ready-to-run scenario over the default heterogeneous fleet."""
    return ScenarioConfig(
        nodes=make_heterogeneous_nodes(node_count),
        scenario_regime=Scenario(regime),
        policy=PolicyName(policy),
        task_count=task_count,
        rng_seed=seed,
        **kwargs,
    )
