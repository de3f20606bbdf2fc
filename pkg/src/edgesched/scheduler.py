"""Task placement policies for the edge fleet.

Four policies share one stepping interface:

* ``dynamic``    - multi-metric fusion with exponential smoothing, an
                   overload penalty, and a positive score floor. Picks the
                   argmax smoothed score each task.
* ``rr``         - round-robin cycling.
* ``sra``        - static resource-aware: weighted cycling proportional to a
                   one-shot snapshot of per-node CPU idleness taken at
                   simulation start.
* ``cloud-only`` - every frame ships whole to the cloud; the cursor only
                   picks which camera link carries it.

The dynamic per-task update runs, for every node in index order:
normalize -> instant score -> smoothing -> penalty (if overloaded) -> floor.
State is mutated exactly once per task by a single writer.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from . import _kernels
from .core import (
    MetricBounds,
    NodeDescriptor,
    PolicyName,
    RawNodeSample,
    ResourceStateVector,
    ScenarioConfig,
    SchedulingWeights,
    build_metric_bounds,
    clamp01,
    normalize_sample,
)


@dataclass(frozen=True)
class AssignmentDecision:
    """Outcome of one placement. ``decision_scores`` snapshots the per-node
    smoothed scores right after the update that produced the choice; empty
    for the cursor-based policies, which do not score."""

    task_id: int
    node_id: int
    decision_time: float
    decision_scores: tuple[float, ...] = ()


def instant_score(state: ResourceStateVector, weights: SchedulingWeights) -> float:
    """Weighted fusion of the four normalized components."""
    return (
        weights.alpha * state.u
        + weights.beta * state.q
        + weights.delta * state.b
        + weights.epsilon_w * state.l
    )


def smooth_update(previous: float, instant: float, eta: float) -> float:
    """One exponential-smoothing step: keep ``eta`` of history."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta out of [0, 1]: {eta}")
    return eta * previous + (1.0 - eta) * instant


def apply_penalty(score: float, gamma: float) -> float:
    """Multiplicative overload discount; gamma must lie in (0, 1)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma out of (0, 1): {gamma}")
    return gamma * score


def floor_clamp(score: float, floor: float) -> float:
    """Keep scores strictly positive so a penalized node can recover."""
    if floor <= 0.0:
        raise ValueError(f"floor must be positive: {floor}")
    return score if score > floor else floor


def penalty_factor(severity: float, gamma_base: float) -> float:
    """Severity-scaled discount: gamma_base at full severity, approaching 1
    as severity approaches 0."""
    return gamma_base + (1.0 - gamma_base) * (1.0 - severity)


def detect_overload(
    raw: RawNodeSample, node: NodeDescriptor, thresholds
) -> tuple[bool, float]:
    """Check queue pressure, effective latency, and memory pressure.

    Returns (overloaded, severity). Severity is the largest normalized
    threshold excess, clamped to [0, 1]; zero when not overloaded.

    Queue and memory pressure are fractions with a hard ceiling of 1, so
    their excess is normalized by the remaining headroom above the
    threshold: a queue pinned at capacity scores severity 1. Link latency
    has no natural ceiling, so its excess is normalized by the threshold
    itself. ``thresholds.latency_threshold_ms`` must already be resolved.
    """
    worst = 0.0
    overloaded = False
    q_thresh = thresholds.queue_threshold
    q_frac = raw.queue_length / node.queue_capacity
    if q_frac > q_thresh:
        overloaded = True
        excess = (q_frac - q_thresh) / (1.0 - q_thresh) if q_thresh < 1.0 else 1.0
        if excess > worst:
            worst = excess
    lat_thresh = thresholds.latency_threshold_ms
    if lat_thresh is None:
        raise ValueError("latency_threshold_ms is unresolved; use resolved thresholds")
    if raw.link_latency > lat_thresh:
        overloaded = True
        excess = (raw.link_latency - lat_thresh) / lat_thresh
        if excess > worst:
            worst = excess
    m_thresh = thresholds.memory_threshold
    m_frac = raw.memory_used / node.memory_capacity
    if m_frac > m_thresh:
        overloaded = True
        excess = (m_frac - m_thresh) / (1.0 - m_thresh) if m_thresh < 1.0 else 1.0
        if excess > worst:
            worst = excess
    return overloaded, clamp01(worst)


class PolicyState:
    """Mutable per-run scheduler state. Single-writer: the engine steps it
    sequentially; decisions snapshot what outsiders need."""

    def __init__(
        self,
        policy: PolicyName,
        nodes: tuple[NodeDescriptor, ...],
        bounds: tuple[MetricBounds, ...],
        weights: SchedulingWeights,
        eta: float,
        gamma_base: float,
        floor: float,
        thresholds,
        sra_snapshot: tuple[float, ...] | None = None,
    ):
        n = len(nodes)
        if n == 0:
            raise ValueError("at least one node is required")
        if len(bounds) != n:
            raise ValueError(f"bounds length {len(bounds)} != node count {n}")
        self.policy = policy
        self.nodes = nodes
        self.bounds = bounds
        self.weights = weights
        self.eta = eta
        self.gamma_base = gamma_base
        self.floor = floor
        self.thresholds = thresholds
        # Smoothed scores start at zero; the floor lifts them on first update.
        self.smoothed_scores = array("d", [0.0] * n)
        self.rr_cursor = 0
        self.sra_snapshot = sra_snapshot
        self._sra_weights: list[float] | None = None
        self._sra_credits = array("d", [0.0] * n)
        # Scratch buffers for the fused kernel, reused across tasks.
        self._u = array("d", [0.0] * n)
        self._q = array("d", [0.0] * n)
        self._b = array("d", [0.0] * n)
        self._l = array("d", [0.0] * n)
        self._gamma = array("d", [0.0] * n)
        self._over = array("B", [0] * n)
        if policy is PolicyName.SRA:
            if sra_snapshot is None:
                raise ValueError("sra policy requires an idleness snapshot")
            if len(sra_snapshot) != n:
                raise ValueError(
                    f"snapshot length {len(sra_snapshot)} != node count {n}"
                )
            total = sum(sra_snapshot)
            if total > 0.0:
                self._sra_weights = [s / total for s in sra_snapshot]
            else:
                # Uninformative snapshot: fall back to uniform cycling.
                self._sra_weights = [1.0 / n] * n


def policy_step(
    state: PolicyState,
    samples: list[RawNodeSample],
    task_id: int,
    now: float,
) -> AssignmentDecision:
    """One dynamic-policy placement against the latest monitor samples."""
    nodes = state.nodes
    n = len(nodes)
    if len(samples) != n:
        raise ValueError(f"got {len(samples)} samples for {n} nodes")
    u, q, b, l = state._u, state._q, state._b, state._l
    over, gamma = state._over, state._gamma
    for i in range(n):
        vec = normalize_sample(samples[i], state.bounds[i])
        u[i] = vec.u
        q[i] = vec.q
        b[i] = vec.b
        l[i] = vec.l
        is_over, severity = detect_overload(samples[i], nodes[i], state.thresholds)
        over[i] = 1 if is_over else 0
        gamma[i] = penalty_factor(severity, state.gamma_base) if is_over else 1.0
    w = state.weights
    arg = _kernels.score_update(
        state.smoothed_scores,
        u,
        q,
        b,
        l,
        w.alpha,
        w.beta,
        w.delta,
        w.epsilon_w,
        state.eta,
        over,
        gamma,
        state.floor,
    )
    return AssignmentDecision(
        task_id=task_id,
        node_id=arg,
        decision_time=now,
        decision_scores=tuple(state.smoothed_scores),
    )


def rr_step(state: PolicyState, task_id: int, now: float) -> AssignmentDecision:
    """Cycle through nodes in index order."""
    node_id = state.rr_cursor % len(state.nodes)
    state.rr_cursor += 1
    return AssignmentDecision(task_id=task_id, node_id=node_id, decision_time=now)


def sra_step(state: PolicyState, task_id: int, now: float) -> AssignmentDecision:
    """Weighted cycling against the start-of-run idleness snapshot.

    Credit accumulation: each step adds every node's weight to its credit,
    the largest credit wins (ties to the lowest index) and pays one unit.
    Over k tasks node i receives within one task of k * weight_i.
    """
    weights = state._sra_weights
    if weights is None:
        raise ValueError("policy state was not built for sra")
    credits = state._sra_credits
    n = len(credits)
    best = -float("inf")
    arg = 0
    for i in range(n):
        credits[i] += weights[i]
        if credits[i] > best:
            best = credits[i]
            arg = i
    credits[arg] -= 1.0
    return AssignmentDecision(task_id=task_id, node_id=arg, decision_time=now)


def cloud_only_step(state: PolicyState, task_id: int, now: float) -> AssignmentDecision:
    """Pick the camera link for a whole-frame upload, round-robin."""
    node_id = state.rr_cursor % len(state.nodes)
    state.rr_cursor += 1
    return AssignmentDecision(task_id=task_id, node_id=node_id, decision_time=now)


_STEPPERS = {
    PolicyName.RR: rr_step,
    PolicyName.SRA: sra_step,
    PolicyName.CLOUD_ONLY: cloud_only_step,
}


def decide(
    state: PolicyState,
    samples: list[RawNodeSample],
    task_id: int,
    now: float,
) -> AssignmentDecision:
    """Dispatch one placement to whichever policy the state was built for."""
    if state.policy is PolicyName.DYNAMIC:
        return policy_step(state, samples, task_id, now)
    return _STEPPERS[state.policy](state, task_id, now)


def resolve_thresholds(cfg: ScenarioConfig):
    """Overload thresholds with the latency trip point made concrete."""
    from .core import OverloadThresholds

    return OverloadThresholds(
        queue_threshold=cfg.overload.queue_threshold,
        latency_threshold_ms=cfg.latency_threshold_ms(),
        memory_threshold=cfg.overload.memory_threshold,
    )


def make_policy_state(
    cfg: ScenarioConfig,
    initial_samples: list[RawNodeSample] | None = None,
) -> PolicyState:
    """Build run-ready policy state from a scenario.

    ``initial_samples`` feeds the sra snapshot; required for sra, ignored
    otherwise.
    """
    snapshot = None
    if cfg.policy is PolicyName.SRA:
        if initial_samples is None:
            raise ValueError("sra policy requires initial samples for its snapshot")
        snapshot = tuple(s.cpu_idle_fraction for s in initial_samples)
    return PolicyState(
        policy=cfg.policy,
        nodes=cfg.nodes,
        bounds=build_metric_bounds(cfg),
        weights=cfg.weights,
        eta=cfg.smoothing_eta,
        gamma_base=cfg.penalty_gamma_base,
        floor=cfg.score_floor,
        thresholds=resolve_thresholds(cfg),
        sra_snapshot=snapshot,
    )
