"""Command-line interface.

Subcommands:

* ``run``      - one scenario; writes results.csv + results.json.
* ``sweep``    - one policy across scenarios {s1,s2,s3} x node counts
                 {4,8,12,16}; writes sweep.csv + sweep.json.
* ``compare``  - all four policies across the same grid (48 cells); writes
                 compare.csv + compare.json with a relative-improvement
                 summary of dynamic against each baseline.
* ``selfcheck`` - fast built-in oracle checks; exit 1 on any failure.

Grid cell seeds derive from the base seed with the documented mixing
function: mix_seed(base, policy_index, scenario_index, node_count), where
policies index in the order dynamic=0, rr=1, sra=2, cloud-only=3 and
scenarios as s1=1, s2=2, s3=3. Identical invocations write identical bytes.

Exit codes: 0 success, 2 configuration error, 3 I/O error. The default
output directory is $EDGESCHED_OUT, falling back to ./out.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import _kernels
from .core import (
    ConfigError,
    PolicyName,
    Scenario,
    apply_overrides,
    load_scenario_file,
    mix_seed,
    scenario_from_dict,
    scenario_to_dict,
)
from .metrics import aggregate, render_csv, render_event_log, render_json
from .sim import make_default_config, run_simulation

GRID_NODE_COUNTS = (4, 8, 12, 16)
POLICY_ORDER = (PolicyName.DYNAMIC, PolicyName.RR, PolicyName.SRA, PolicyName.CLOUD_ONLY)
SCENARIO_INDEX = {Scenario.S1: 1, Scenario.S2: 2, Scenario.S3: 3}


def _base_document(args) -> dict:
    """Merge config file, convenience flags, and --override items."""
    if args.config is not None:
        doc = scenario_to_dict(load_scenario_file(args.config))
    else:
        doc = scenario_to_dict(make_default_config())
    if getattr(args, "policy", None):
        doc["policy"] = args.policy
    if args.scenario:
        doc["scenario_regime"] = args.scenario
    if args.nodes:
        del doc["nodes"]
        doc["node_count"] = args.nodes
    if args.seed is not None:
        doc["rng_seed"] = args.seed
    return apply_overrides(doc, args.override or [])


def _out_dir(args) -> str:
    if args.out:
        return args.out
    return os.environ.get("EDGESCHED_OUT", "out")


def _write_all(out_dir: str, files: dict[str, str]) -> list[str]:
    """Render-then-write: content is fully built before any file opens, so a
    successful exit never leaves a partial file behind."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, content in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        paths.append(path)
    return paths


def _cell_doc(base_doc: dict, policy: PolicyName, scenario: Scenario, nodes: int, seed: int) -> dict:
    doc = dict(base_doc)
    doc.pop("nodes", None)
    doc["node_count"] = nodes
    doc["policy"] = policy.value
    doc["scenario_regime"] = scenario.value
    doc["rng_seed"] = seed
    return doc


def cmd_run(args) -> int:
    doc = _base_document(args)
    cfg = scenario_from_dict(doc)
    trace = run_simulation(cfg)
    result = aggregate(trace)
    files = {
        "results.csv": render_csv([result]),
        "results.json": render_json([result], configs=[cfg]),
    }
    if cfg.record_events:
        files["events.ndjson"] = render_event_log(trace.events)
    out = _out_dir(args)
    _write_all(out, files)
    print(
        f"run policy={result.policy} scenario={result.scenario} nodes={result.node_count} "
        f"seed={result.seed} tasks={cfg.task_count} backend={_kernels.BACKEND} "
        f"throughput_tps={result.throughput_tps:.3f} mean_latency_ms={result.mean_latency_ms:.3f} "
        f"drops={result.drop_count} out={out}"
    )
    return 0


def cmd_sweep(args) -> int:
    doc = _base_document(args)
    base_seed = doc.get("rng_seed", 1)
    policy = PolicyName(doc.get("policy", "dynamic"))
    p_idx = POLICY_ORDER.index(policy)
    results = []
    configs = []
    for scenario in Scenario:
        for nodes in GRID_NODE_COUNTS:
            seed = mix_seed(base_seed, p_idx, SCENARIO_INDEX[scenario], nodes)
            cfg = scenario_from_dict(_cell_doc(doc, policy, scenario, nodes, seed))
            configs.append(cfg)
            results.append(aggregate(run_simulation(cfg)))
    out = _out_dir(args)
    _write_all(
        out,
        {
            "sweep.csv": render_csv(results),
            "sweep.json": render_json(results, configs=configs),
        },
    )
    print(f"sweep policy={policy.value} cells={len(results)} backend={_kernels.BACKEND} out={out}")
    return 0


def _improvement_summary(by_cell: dict) -> list[dict]:
    """Dynamic vs each baseline, % throughput gain and % latency reduction."""
    summary = []
    for scenario in Scenario:
        for nodes in GRID_NODE_COUNTS:
            dyn = by_cell[(PolicyName.DYNAMIC, scenario, nodes)]
            entry = {
                "scenario": scenario.value,
                "node_count": nodes,
                "dynamic_throughput_tps": dyn.throughput_tps,
                "dynamic_mean_latency_ms": dyn.mean_latency_ms,
            }
            for baseline in (PolicyName.RR, PolicyName.SRA, PolicyName.CLOUD_ONLY):
                base = by_cell[(baseline, scenario, nodes)]
                tag = baseline.value.replace("-", "_")
                if base.throughput_tps > 0:
                    entry[f"throughput_gain_vs_{tag}_pct"] = (
                        (dyn.throughput_tps - base.throughput_tps) / base.throughput_tps * 100.0
                    )
                if base.mean_latency_ms > 0:
                    entry[f"latency_reduction_vs_{tag}_pct"] = (
                        (base.mean_latency_ms - dyn.mean_latency_ms) / base.mean_latency_ms * 100.0
                    )
            summary.append(entry)
    return summary


def cmd_compare(args) -> int:
    doc = _base_document(args)
    base_seed = doc.get("rng_seed", 1)
    results = []
    configs = []
    by_cell = {}
    for p_idx, policy in enumerate(POLICY_ORDER):
        for scenario in Scenario:
            for nodes in GRID_NODE_COUNTS:
                seed = mix_seed(base_seed, p_idx, SCENARIO_INDEX[scenario], nodes)
                cfg = scenario_from_dict(_cell_doc(doc, policy, scenario, nodes, seed))
                result = aggregate(run_simulation(cfg))
                configs.append(cfg)
                results.append(result)
                by_cell[(policy, scenario, nodes)] = result
    out = _out_dir(args)
    _write_all(
        out,
        {
            "compare.csv": render_csv(results),
            "compare.json": render_json(
                results,
                configs=configs,
                extra={"improvement_summary": _improvement_summary(by_cell)},
            ),
        },
    )
    print(f"compare cells={len(results)} backend={_kernels.BACKEND} out={out}")
    return 0


def cmd_selfcheck(args) -> int:
    checks = [
        ("scheduler ops vs exact oracles", _check_ops),
        ("smoothing contraction", _check_contraction),
        ("weighted cycling counts", _check_sra),
        ("hsv round trip", _check_hsv),
        ("kernel backend parity", _check_backends),
        ("simulation determinism", _check_determinism),
        ("adapter algebra", _check_lora),
    ]
    failures = 0
    for name, fn in checks:
        try:
            detail = fn()
        except Exception as exc:  # report, keep checking
            failures += 1
            print(f"FAIL: {name} ({exc})")
        else:
            print(f"ok: {name}" + (f" ({detail})" if detail else ""))
    if failures:
        print(f"selfcheck: {failures} of {len(checks)} checks failed")
        return 1
    print(f"selfcheck: all {len(checks)} checks passed (backend={_kernels.BACKEND})")
    return 0


def _check_ops():
    import random
    from fractions import Fraction

    from .scheduler import apply_penalty, floor_clamp, instant_score, smooth_update
    from .core import ResourceStateVector, SchedulingWeights

    rng = random.Random(11)
    for _ in range(200):
        u, q, b, l = (rng.random() for _ in range(4))
        w = [rng.random() for _ in range(4)]
        got = instant_score(
            ResourceStateVector(u, q, b, l),
            SchedulingWeights(alpha=w[0], beta=w[1], delta=w[2], epsilon_w=w[3]),
        )
        exact = (
            Fraction(w[0]) * Fraction(u)
            + Fraction(w[1]) * Fraction(q)
            + Fraction(w[2]) * Fraction(b)
            + Fraction(w[3]) * Fraction(l)
        )
        if abs(got - float(exact)) > 1e-12:
            raise AssertionError(f"instant_score off by {abs(got - float(exact))}")
        s, inst, eta = rng.random(), rng.random(), rng.random()
        got = smooth_update(s, inst, eta)
        exact = Fraction(eta) * Fraction(s) + (1 - Fraction(eta)) * Fraction(inst)
        if abs(got - float(exact)) > 1e-12:
            raise AssertionError("smooth_update off")
        g = rng.uniform(1e-6, 1 - 1e-6)
        if abs(apply_penalty(s, g) - float(Fraction(g) * Fraction(s))) > 1e-12:
            raise AssertionError("apply_penalty off")
        if floor_clamp(-s, 1e-6) != 1e-6 or floor_clamp(s + 2.0, 1e-6) != s + 2.0:
            raise AssertionError("floor_clamp off")
    return "200 random inputs"


def _check_contraction():
    from .scheduler import smooth_update

    for eta in (0.3, 0.7, 0.9):
        s, target = 0.0, 0.83
        gap0 = abs(s - target)
        for t in range(1, 101):
            s = smooth_update(s, target, eta)
            if abs(s - target) > (eta**t) * gap0 + 1e-12:
                raise AssertionError(f"contraction violated at eta={eta}, t={t}")
    return "eta in {0.3, 0.7, 0.9}"


def _check_sra():
    from .scheduler import sra_step

    state = _sra_state((0.75, 0.25))
    counts = [0, 0]
    for i in range(100):
        counts[sra_step(state, i, 0.0).node_id] += 1
    if counts != [75, 25]:
        raise AssertionError(f"expected [75, 25], got {counts}")
    return "75/25 split"


def _sra_state(snapshot):
    from .core import build_metric_bounds
    from .scheduler import PolicyState
    from .sim import make_default_config

    cfg = make_default_config(policy="sra", node_count=len(snapshot))
    return PolicyState(
        policy=PolicyName.SRA,
        nodes=cfg.nodes,
        bounds=build_metric_bounds(cfg),
        weights=cfg.weights,
        eta=cfg.smoothing_eta,
        gamma_base=cfg.penalty_gamma_base,
        floor=cfg.score_floor,
        thresholds=None,
        sra_snapshot=tuple(snapshot),
    )


def _check_hsv():
    import random

    from . import visualprep as vp

    rng = random.Random(5)
    worst = 0
    for _ in range(2000):
        px = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
        h, s, v = vp.rgb_to_hsv(*px)
        back = vp.hsv_to_rgb(h, s, v)
        worst = max(worst, max(abs(a - b) for a, b in zip(px, back)))
    if worst > 1:
        raise AssertionError(f"round-trip deviation {worst} > 1")
    return f"max deviation {worst}"


def _check_backends():
    import random

    from ._kernels import available_backends, get_backend

    names = available_backends()
    if len(names) < 2:
        return "native unavailable, pure only"
    rng = random.Random(3)
    buf = bytearray(rng.randrange(256) for _ in range(3 * 500))
    for alpha, beta in ((0.7, 1.3), (1.5, 0.5)):
        bufs = []
        for name in names:
            work = bytearray(buf)
            get_backend(name).hsv_scale_rgb(work, alpha, beta)
            bufs.append(bytes(work))
        if bufs[0] != bufs[1]:
            raise AssertionError("hsv kernels disagree across backends")
    return "pure == native"


def _check_determinism():
    from .sim import make_default_config, run_simulation, trace_digest

    cfg = make_default_config(task_count=300, node_count=4, seed=9)
    d1 = trace_digest(run_simulation(cfg))
    d2 = trace_digest(run_simulation(cfg))
    if d1 != d2:
        raise AssertionError("same config+seed produced different traces")
    return d1[:12]


def _check_lora():
    import numpy as np

    from . import lora

    rng = np.random.default_rng(2)
    ad = lora.init_adapter(16, 4, 0.02, rng)
    if lora.delta(ad).any():
        raise AssertionError("fresh adapter update is not zero")
    w = rng.normal(size=(16, 16))
    x = rng.normal(size=16)
    ad2 = lora.LoraAdapter(a=ad.a, b=rng.normal(size=(16, 4)), lam=0.5, rank=4)
    direct = lora.apply(w, ad2, x)
    via_merge = lora.merge(w, ad2) @ x
    err = float(np.max(np.abs(direct - via_merge)))
    scale = float(np.max(np.abs(via_merge))) or 1.0
    if err / scale > 1e-9:
        raise AssertionError(f"apply deviates from merged product by {err / scale}")
    return "zero init + factored apply"


def _add_common(parser: argparse.ArgumentParser, with_policy: bool = True):
    parser.add_argument("--config", metavar="PATH", help="scenario config JSON")
    parser.add_argument(
        "--override",
        metavar="KEY=VALUE",
        action="append",
        help="override a config field (dotted paths for nested sections); repeatable",
    )
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, metavar="N", help="rng seed (base seed for grids)")
    if with_policy:
        parser.add_argument(
            "--policy", choices=[p.value for p in PolicyName], help="placement policy"
        )
    parser.add_argument("--scenario", choices=[s.value for s in Scenario], help="load regime")
    parser.add_argument("--nodes", type=int, metavar="N", help="fleet size (default profile)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesched",
        description="Deterministic edge-cloud scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run one scenario"))
    _add_common(sub.add_parser("sweep", help="one policy across the scenario/fleet grid"))
    _add_common(sub.add_parser("compare", help="all policies across the grid"), with_policy=False)
    sub.add_parser("selfcheck", help="run built-in oracle checks")
    return parser


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "selfcheck": cmd_selfcheck,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
