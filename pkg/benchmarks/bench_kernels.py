"""Benchmark the compiled kernels against the pure-Python fallback.

Measures the two hot loops (score updates and HSV jitter) per backend on
identical inputs, plus an optional end-to-end simulation timing that forces
each backend in a subprocess via EDGESCHED_PURE_KERNELS.

Usage: python3 benchmarks/bench_kernels.py [--nodes N] [--side PX]
       [--repeat K] [--sim] [--tasks N]
"""

import argparse
import os
import random
import subprocess
import sys
import time
from array import array

from edgesched._kernels import available_backends, get_backend


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_score_update(backend, nodes, calls, repeat):
    rng = random.Random(7)
    inputs = []
    for _ in range(calls):
        inputs.append((
            array("d", (rng.random() for _ in range(nodes))),
            array("d", (rng.random() for _ in range(nodes))),
            array("d", (rng.random() for _ in range(nodes))),
            array("d", (rng.random() for _ in range(nodes))),
            array("B", (rng.random() < 0.2 for _ in range(nodes))),
            array("d", (rng.uniform(0.5, 1.0) for _ in range(nodes))),
        ))
    scores = array("d", [0.0] * nodes)
    kern = get_backend(backend).score_update

    def run():
        for u, q, b, l, over, gamma in inputs:
            kern(scores, u, q, b, l, 0.25, 0.25, 0.25, 0.25, 0.7,
                 over, gamma, 1e-6)

    return calls / best_of(repeat, run)


def bench_hsv_scale(backend, side, repeat):
    rng = random.Random(11)
    src = bytes(rng.randrange(256) for _ in range(3 * side * side))
    kern = get_backend(backend).hsv_scale_rgb
    bufs = [bytearray(src) for _ in range(repeat)]
    times = []
    for buf in bufs:
        start = time.perf_counter()
        kern(buf, 1.2, 0.9)
        times.append(time.perf_counter() - start)
    pixels = side * side
    return pixels / min(times)


def bench_simulation(backend, tasks):
    env = dict(os.environ)
    if backend == "pure":
        env["EDGESCHED_PURE_KERNELS"] = "1"
    else:
        env.pop("EDGESCHED_PURE_KERNELS", None)
    code = (
        "import time\n"
        "from edgesched.sim import make_default_config, run_simulation\n"
        "from edgesched import _kernels\n"
        f"cfg = make_default_config(node_count=16, task_count={tasks})\n"
        "start = time.perf_counter()\n"
        "run_simulation(cfg)\n"
        "print(_kernels.BACKEND, time.perf_counter() - start)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    got_backend, seconds = out.stdout.split()
    if got_backend != backend:
        raise RuntimeError(f"subprocess ran {got_backend}, wanted {backend}")
    return float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=16)
    parser.add_argument("--calls", type=int, default=2000)
    parser.add_argument("--side", type=int, default=512)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sim", action="store_true",
                        help="also time a full simulation per backend")
    parser.add_argument("--tasks", type=int, default=20_000)
    args = parser.parse_args(argv)

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("native extension not built; nothing to compare")

    rates = {b: bench_score_update(b, args.nodes, args.calls, args.repeat)
             for b in backends}
    line = f"score_update   {args.nodes} nodes      "
    line += "   ".join(f"{b}: {rates[b]:.3e} calls/s" for b in backends)
    if len(backends) == 2:
        line += f"   speedup: {rates['native'] / rates['pure']:.1f}x"
    print(line)

    rates = {b: bench_hsv_scale(b, args.side, args.repeat) for b in backends}
    line = f"hsv_scale_rgb  {args.side}x{args.side} px   "
    line += "   ".join(f"{b}: {rates[b]:.3e} px/s" for b in backends)
    if len(backends) == 2:
        line += f"   speedup: {rates['native'] / rates['pure']:.1f}x"
    print(line)

    if args.sim:
        secs = {b: bench_simulation(b, args.tasks) for b in backends}
        line = f"run_simulation {args.tasks} tasks  "
        line += "   ".join(f"{b}: {secs[b]:.2f} s" for b in backends)
        if len(backends) == 2:
            line += f"   speedup: {secs['pure'] / secs['native']:.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
