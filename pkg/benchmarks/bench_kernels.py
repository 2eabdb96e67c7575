"""Compiled vs interpreted worker kernels on the same workload.

Each backend runs in its own interpreter because the switch is read at import
time. Usage::

    python benchmarks/bench_kernels.py [--edges 20000] [--workers 4] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from dtc import ClusterConfig, run_stream
from dtc._jit import backend_name
from dtc.stream_io import planted_community_graph, synthesize_fully_dynamic

edges, workers, repeat = map(int, sys.argv[1:4])
g = planted_community_graph(max(100, edges // 4), edges, seed=1)
d = synthesize_fully_dynamic(g, 0.2, seed=1)
jobs = {
    "ar": (ClusterConfig("ar", workers=workers, k=max(2, edges // 100), ratio_threshold=0.2), g),
    "fd": (ClusterConfig("fd", workers=workers, k=max(2, edges // 100)), d),
}
out = {"backend": backend_name()}
for name, (cfg, stream) in jobs.items():
    run_stream(cfg, stream.prefix(min(len(stream), 500)))  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = run_stream(cfg, stream)
        best = min(best, time.perf_counter() - t0)
    out[name] = {"seconds": best, "events": len(stream), "estimate": res.global_estimate}
json.dump(out, sys.stdout)
"""


def measure(disable: bool, edges: int, workers: int, repeat: int) -> dict:
    env = dict(os.environ, DTC_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", CHILD, str(edges), str(workers), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--edges", type=int, default=20_000)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    fast = measure(False, args.edges, args.workers, args.repeat)
    slow = measure(True, args.edges, args.workers, args.repeat)
    print(f"{'algo':<5}{'events':>9}{fast['backend']:>16}{slow['backend']:>12}{'speedup':>10}  identical")
    for name in ("ar", "fd"):
        f, s = fast[name], slow[name]
        print(f"{name:<5}{f['events']:>9}{f['seconds']:>15.3f}s{s['seconds']:>11.3f}s"
              f"{s['seconds'] / f['seconds']:>9.1f}x  {f['estimate'] == s['estimate']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
