"""Time the pure-Python loop against the compiled kernel on identical runs.

    python benchmarks/bench_kernel.py --seeds 3 --horizon 10800
"""

import argparse
import time

from excavsim import kernel
from excavsim.config import SimConfig
from excavsim.engine import run


def bench(backend: str, cfg: SimConfig, seeds: list[int]) -> tuple[float, list]:
    t0 = time.perf_counter()
    logs = [run(cfg, seed=s, backend=backend).log for s in seeds]
    return time.perf_counter() - t0, logs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--horizon", type=int, default=10_800)
    ap.add_argument("--protocol", default="adaptive")
    args = ap.parse_args()

    cfg = SimConfig().with_protocol(args.protocol).replace("engine", horizon=args.horizon)
    seeds = list(range(args.seeds))
    ticks = args.horizon * len(seeds)
    results = {}
    for backend in kernel.available():
        elapsed, logs = bench(backend, cfg, seeds)
        results[backend] = (elapsed, logs)
        print(f"{backend:7s} {elapsed:8.3f} s  {ticks / elapsed:12,.0f} ticks/s")
    if len(results) == 2:
        same = all(a.equals(b) for a, b in zip(results["python"][1], results["c"][1]))
        print(f"speedup {results['python'][0] / results['c'][0]:.1f}x, logs identical: {same}")
    else:
        print("compiled kernel not built; only the Python backend ran")


if __name__ == "__main__":
    main()
