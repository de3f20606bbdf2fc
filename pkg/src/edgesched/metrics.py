"""Aggregation of simulation traces into reported indicators, plus export.

CSV schema, exact column order:

    policy, scenario, node_count, seed, throughput_tps, mean_latency_ms,
    p50_ms, p95_ms, p99_ms, drop_count, peak_memory_mb,
    mean_comm_latency_ms, mean_busy_fraction

Rows sort by (policy, scenario, node_count, seed); floats render with six
decimal places, so identical inputs re-export byte-identically. The JSON
result document carries the same indicators plus per-node detail and the
full config echo. Event logs are newline-delimited JSON objects with keys
``t_ms``, ``kind``, ``task_id``, ``node_id``.

Percentiles use the nearest-rank definition: the ceil(p/100 * n)-th smallest
value, never interpolated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable

from .core import scenario_to_dict
from .sim import SimTrace

CSV_COLUMNS = (
    "policy",
    "scenario",
    "node_count",
    "seed",
    "throughput_tps",
    "mean_latency_ms",
    "p50_ms",
    "p95_ms",
    "p99_ms",
    "drop_count",
    "peak_memory_mb",
    "mean_comm_latency_ms",
    "mean_busy_fraction",
)


@dataclass(frozen=True)
class SimulationResult:
    """Aggregate indicators for one run.

    ``empty`` flags a run with no completions (latency fields are zero and
    meaningless); ``throughput_degenerate`` flags a throughput computed over
    a zero-length or single-completion span.
    """

    policy: str
    scenario: str
    node_count: int
    seed: int
    throughput_tps: float
    mean_latency_ms: float
    p50_ms: float
    p95_ms: float
    p99_ms: float
    drop_count: int
    peak_memory_mb: float
    mean_comm_latency_ms: float
    mean_busy_fraction: float
    per_node_task_counts: tuple[int, ...]
    per_node_peak_memory_mb: tuple[float, ...]
    completed_count: int
    empty: bool
    throughput_degenerate: bool


def nearest_rank(sorted_values: list[float], percentile: float) -> float:
    """Nearest-rank percentile of an ascending list."""
    if not sorted_values:
        raise ValueError("nearest_rank of an empty list")
    if not 0.0 < percentile <= 100.0:
        raise ValueError(f"percentile out of (0, 100]: {percentile}")
    rank = math.ceil(percentile / 100.0 * len(sorted_values))
    if rank < 1:
        rank = 1
    return sorted_values[rank - 1]


def aggregate(trace: SimTrace) -> SimulationResult:
    """Reduce a trace to its reported indicators.

    Order-insensitive: latencies are sorted and means use exact summation,
    so any permutation of the task records aggregates identically.
    """
    cfg = trace.config
    completed = [t for t in trace.tasks if t.completion_ms is not None]
    latencies = sorted(t.completion_ms - t.arrival_ms for t in completed)
    comm = [t.comm_ms for t in completed]

    empty = not completed
    if empty:
        mean_lat = p50 = p95 = p99 = 0.0
        mean_comm = 0.0
    else:
        mean_lat = math.fsum(latencies) / len(latencies)
        p50 = nearest_rank(latencies, 50.0)
        p95 = nearest_rank(latencies, 95.0)
        p99 = nearest_rank(latencies, 99.0)
        mean_comm = math.fsum(sorted(comm)) / len(comm)

    throughput = 0.0
    degenerate = True
    if completed:
        first_arrival = min(t.arrival_ms for t in trace.tasks)
        last_completion = max(t.completion_ms for t in completed)
        span_ms = last_completion - first_arrival
        if span_ms > 0.0 and len(completed) > 1:
            throughput = len(completed) / (span_ms / 1000.0)
            degenerate = False
        elif span_ms > 0.0:
            throughput = len(completed) / (span_ms / 1000.0)

    horizon = trace.horizon_ms
    if horizon > 0.0:
        busy = [b / horizon for b in trace.node_busy_ms]
        mean_busy = math.fsum(sorted(busy)) / len(busy)
    else:
        mean_busy = 0.0

    return SimulationResult(
        policy=cfg.policy.value,
        scenario=cfg.scenario_regime.value,
        node_count=cfg.node_count,
        seed=cfg.rng_seed,
        throughput_tps=throughput,
        mean_latency_ms=mean_lat,
        p50_ms=p50,
        p95_ms=p95,
        p99_ms=p99,
        drop_count=trace.drops,
        peak_memory_mb=max(trace.node_peak_memory),
        mean_comm_latency_ms=mean_comm,
        mean_busy_fraction=mean_busy,
        per_node_task_counts=trace.node_assignments,
        per_node_peak_memory_mb=trace.node_peak_memory,
        completed_count=len(completed),
        empty=empty,
        throughput_degenerate=degenerate,
    )


def _sort_key(r: SimulationResult):
    return (r.policy, r.scenario, r.node_count, r.seed)


def result_row(r: SimulationResult) -> list[str]:
    return [
        r.policy,
        r.scenario,
        str(r.node_count),
        str(r.seed),
        f"{r.throughput_tps:.6f}",
        f"{r.mean_latency_ms:.6f}",
        f"{r.p50_ms:.6f}",
        f"{r.p95_ms:.6f}",
        f"{r.p99_ms:.6f}",
        str(r.drop_count),
        f"{r.peak_memory_mb:.6f}",
        f"{r.mean_comm_latency_ms:.6f}",
        f"{r.mean_busy_fraction:.6f}",
    ]


def render_csv(results: Iterable[SimulationResult]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in sorted(results, key=_sort_key):
        lines.append(",".join(result_row(r)))
    return "\n".join(lines) + "\n"


def result_to_dict(r: SimulationResult) -> dict[str, Any]:
    return {
        "policy": r.policy,
        "scenario": r.scenario,
        "node_count": r.node_count,
        "seed": r.seed,
        "throughput_tps": r.throughput_tps,
        "mean_latency_ms": r.mean_latency_ms,
        "p50_ms": r.p50_ms,
        "p95_ms": r.p95_ms,
        "p99_ms": r.p99_ms,
        "drop_count": r.drop_count,
        "peak_memory_mb": r.peak_memory_mb,
        "mean_comm_latency_ms": r.mean_comm_latency_ms,
        "mean_busy_fraction": r.mean_busy_fraction,
        "per_node_task_counts": list(r.per_node_task_counts),
        "per_node_peak_memory_mb": list(r.per_node_peak_memory_mb),
        "completed_count": r.completed_count,
        "empty": r.empty,
        "throughput_degenerate": r.throughput_degenerate,
    }


def render_json(
    results: Iterable[SimulationResult],
    configs: Iterable[Any] | None = None,
    extra: dict[str, Any] | None = None,
) -> str:
    """Result document: indicators per run, config echoes, optional extras."""
    doc: dict[str, Any] = {
        "results": [result_to_dict(r) for r in sorted(results, key=_sort_key)]
    }
    if configs is not None:
        doc["configs"] = [scenario_to_dict(c) for c in configs]
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_event_log(events: Iterable[dict[str, Any]]) -> str:
    return "".join(json.dumps(e, sort_keys=True) + "\n" for e in events)
