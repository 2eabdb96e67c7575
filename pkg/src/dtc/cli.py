"""Command-line front end: ``dtc {ingest,synth,exact,run,sweep}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
import time
from pathlib import Path

from . import __version__
from ._jit import backend_name
from .core_sampling import SplitMix64
from .errors import DTCError
from .exact import exact_incremental, exact_static
from .harness import ClusterConfig, config_items, run_stream, sweep
from .metrics import CSV_COLUMNS
from .stream_io import load_edge_list, read_stream, synthesize_fully_dynamic, write_stream

# published (nodes, edges) after cleaning, used for an advisory check only
KNOWN_DATASETS = {
    "arxiv": (34_546, 420_877),
    "facebook": (63_731, 817_090),
    "dblp": (317_080, 1_049_866),
    "notredame": (325_729, 1_090_108),
    "berkstan": (685_230, 6_649_470),
    "youtube": (3_223_589, 9_376_594),
    "skitter": (1_696_415, 11_095_298),
    "livejournal": (3_997_962, 34_681_189),
}

GRID_KEYS = {"algo": str, "W": int, "k": int, "R": float, "S": int, "delta": float}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("expected an unsigned 64-bit integer")
    return value


def _write_meta(out: Path, items: dict) -> None:
    meta = out.with_name(out.name + ".meta")
    with open(meta, "w", encoding="utf-8") as fh:
        for key, value in items.items():
            fh.write(f"{key}={value}\n")


def dataset_check(name: str, nodes: int, edges: int) -> str | None:
    """Warning text when the cleaned counts differ from the published ones."""
    expected = KNOWN_DATASETS.get(name.lower())
    if expected is None:
        return f"unknown dataset {name!r}; known: {', '.join(sorted(KNOWN_DATASETS))}"
    if (nodes, edges) != expected:
        return (f"{name}: cleaned graph has {nodes} nodes / {edges} edges, "
                f"published {expected[0]} / {expected[1]}")
    return None


def cmd_ingest(args) -> int:
    stream, report = load_edge_list(args.input)
    write_stream(stream, args.output)
    print(f"nodes={stream.num_nodes} edges={len(stream)} self_loops={report.self_loops} "
          f"duplicates={report.duplicates} dropped={report.dropped}")
    if args.dataset:
        warning = dataset_check(args.dataset, stream.num_nodes, len(stream))
        if warning:
            print(f"warning: {warning}", file=sys.stderr)
        else:
            print(f"dataset {args.dataset}: matches published counts")
    return 0


def cmd_synth(args) -> int:
    stream = read_stream(args.input)
    out = synthesize_fully_dynamic(stream, args.delta, args.seed)
    write_stream(out, args.output)
    print(f"events={len(out)} insertions={out.num_insertions} deletions={out.num_deletions}")
    return 0


def cmd_exact(args) -> int:
    stream = read_stream(args.input)
    counts = exact_static(stream.surviving_edges())
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scope", "node", "count"])
        w.writerow(["global", "", counts.global_count])
        for node in sorted(counts.local):
            w.writerow(["local", node, counts.local[node]])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _config_from_args(args, algo: str, workers: int, k: int, ratio: float, total: int | None,
                      seed: int) -> ClusterConfig:
    return ClusterConfig(algorithm=algo, workers=workers, k=k, ratio_threshold=ratio,
                         total_budget=total, seed=seed, hash_seed=args.hash_seed)


def cmd_run(args) -> int:
    stream = read_stream(args.input)
    cfg = _config_from_args(args, args.algo, args.workers, args.budget, args.ratio,
                            args.total_budget, args.seed)
    n = len(stream)
    points = list(range(args.query_every, n, args.query_every)) if args.query_every else []
    points.append(n)
    result = run_stream(cfg, stream, points, mode=args.mode)
    exact = {e.position: e.global_count for e in exact_incremental(stream, points)}
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algo", "W", "k", "R", "seed", "position", "global_estimate", "exact_global"])
        r_col = cfg.ratio_threshold if cfg.algorithm == "ar" else ""
        for snap in result.snapshots:
            w.writerow([cfg.algorithm, cfg.workers, cfg.k, r_col, cfg.seed, snap.position,
                        repr(snap.global_estimate), exact[snap.position]])
    if args.locals:
        with open(args.locals, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "local_estimate"])
            for node, val in zip(result.final.nodes.tolist(), result.final.local_values.tolist()):
                w.writerow([node, repr(val)])
    meta = {"command": "run", "version": __version__, "input": args.input, "events": n}
    meta.update(config_items(cfg))
    meta.update({"rng": SplitMix64.name, "backend": result.backend, "mode": args.mode,
                 "wall_time_s": f"{result.wall_time:.6f}"})
    for ws in result.workers:
        meta[f"worker{ws.worker_id}"] = (f"delivered={ws.delivered} offers={ws.offers} stored={ws.stored} "
                                         f"peak={ws.peak_stored} rotations={ws.rotations} "
                                         f"exhausted_at={ws.exhausted_at} n_g={ws.n_g} n_b={ws.n_b}")
    _write_meta(out, meta)
    print(f"final_estimate={result.global_estimate!r} exact={exact[n]}")
    return 0


def parse_grid(spec: str) -> list[dict]:
    """``"algo=ar,fd;W=1,4;k=100"`` -> cartesian product of cells."""
    axes: dict[str, list] = {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        key, sep, values = part.partition("=")
        key = key.strip()
        if not sep or key not in GRID_KEYS:
            raise DTCError(f"bad grid axis {part!r}; keys are {', '.join(GRID_KEYS)}")
        conv = GRID_KEYS[key]
        vals = [conv(v.strip()) for v in values.split(",") if v.strip()]
        if not vals:
            raise DTCError(f"grid axis {key!r} has no values")
        axes[key] = vals
    if not axes:
        raise DTCError("empty grid")
    keys = list(axes)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def cmd_sweep(args) -> int:
    base = read_stream(args.input)
    cells = parse_grid(args.grid)
    rows = []
    t0 = time.perf_counter()
    streams: dict[float | None, tuple] = {}
    for cell in cells:
        delta = cell.get("delta")
        if delta not in streams:
            stream = base if not delta else synthesize_fully_dynamic(base, delta, args.stream_seed)
            streams[delta] = (stream, exact_static(stream.surviving_edges()))
        stream, exact = streams[delta]
        cfg = _config_from_args(args, cell.get("algo", args.algo), cell.get("W", args.workers),
                                cell.get("k", args.budget), cell.get("R", args.ratio),
                                cell.get("S", args.total_budget), args.seed_base)
        report = sweep([cfg], stream, args.runs, base_seed=args.seed_base, exact=exact,
                       mode=args.mode)[0]
        if delta is None and not stream.insertion_only:
            delta = stream.num_deletions / stream.num_insertions
        report.delta = delta if delta is not None else 0.0
        rows.append(report.csv_row(with_timing=args.timing))
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _write_meta(out, {"command": "sweep", "version": __version__, "input": args.input, "grid": args.grid,
                      "runs": args.runs, "seed_base": args.seed_base, "stream_seed": args.stream_seed,
                      "hash_seed": args.hash_seed, "rng": SplitMix64.name, "backend": backend_name(),
                      "threads": os.environ.get("DTC_THREADS", ""),
                      "wall_time_s": f"{time.perf_counter() - t0:.6f}"})
    print(f"cells={len(rows)} runs_per_cell={args.runs}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtc", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="clean a raw edge list into a canonical stream")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--dataset", help="compare cleaned counts against a known dataset (advisory)")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("synth", help="add deletions to an insertion-only stream")
    s.add_argument("--input", required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("exact", help="exact global and local counts of the surviving graph")
    s.add_argument("--input", required=True)
    s.add_argument("--output")
    s.set_defaults(func=cmd_exact)

    def cluster_flags(sp):
        sp.add_argument("--input", required=True)
        sp.add_argument("--algo", choices=("ar", "fd"), default="fd")
        sp.add_argument("--workers", type=int, default=10)
        sp.add_argument("--budget", type=int, default=1000, help="edge budget k per worker")
        sp.add_argument("--ratio", type=float, default=0.2, help="sampling ratio threshold (ar)")
        sp.add_argument("--total-budget", type=int, default=None, help="edge slots per ar worker")
        sp.add_argument("--hash-seed", type=_u64, default=0)
        sp.add_argument("--out", required=True)
        sp.add_argument("--mode", choices=("sequential", "parallel"), default="sequential")

    s = sub.add_parser("run", help="one cluster run")
    cluster_flags(s)
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--query-every", type=int, default=0)
    s.add_argument("--locals", help="write final local estimates here")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="repeated seeded runs over a parameter grid")
    cluster_flags(s)
    s.add_argument("--grid", required=True, help='e.g. "algo=fd;W=1,4,16;k=500;delta=0.2"')
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--seed-base", type=_u64, default=0)
    s.add_argument("--stream-seed", type=_u64, default=0, help="seed for deletion synthesis")
    s.add_argument("--timing", action="store_true", help="fill the wall_ms column (not reproducible)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DTCError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
