"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Datasets are synthetic stand-ins generated with fixed seeds; the real-data
ingestion check (criterion 10) runs only when a raw Arxiv edge list is found
at ``$DTC_ARXIV_PATH``.
"""

import itertools
import math
import os
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from dtc import kernels as K
from dtc._jit import new_edge_index
from dtc.cli import dataset_check
from dtc.core_sampling import SplitMix64
from dtc.exact import exact_incremental, exact_static
from dtc.harness import ClusterConfig, run_stream, sweep
from dtc.metrics import global_variance, mean_global_error, mean_local_error, pearson
from dtc.routing import Partitioner
from dtc.stream_io import (
    CanonicalStream,
    load_edge_list,
    planted_community_graph,
    synthesize_fully_dynamic,
    write_stream,
)

from conftest import gnm_edges, record_acceptance
from oracles import PAIRS_4, canonical_streams, live_edges, membership, pairing_tree

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


@pytest.fixture(scope="module")
def big_graph():
    return planted_community_graph(25_000, 100_000, seed=1)


# 1 -------------------------------------------------------------------------

def test_criterion_1_exactness():
    rng = np.random.default_rng(1)
    worst = 0.0
    checked = 0
    for g in range(50):
        n = int(rng.integers(20, 201))
        m = int(rng.integers(n, min(2000, n * (n - 1) // 2) + 1))
        base = CanonicalStream.from_edges(gnm_edges(n, m, seed=1000 + g))
        dyn = synthesize_fully_dynamic(base, 0.2, seed=g)
        mid = len(dyn) // 2
        ex_base = exact_static(base.surviving_edges())
        ex_dyn = exact_incremental(dyn, [mid, len(dyn)])
        for w in (1, 2, 5, 10):
            runs = [
                (run_stream(ClusterConfig("ar", workers=w, k=max(m, 2), ratio_threshold=0.2, seed=g), base),
                 [ex_base]),
                (run_stream(ClusterConfig("fd", workers=w, k=len(dyn), seed=g), dyn, [mid]), ex_dyn),
            ]
            for res, exacts in runs:
                assert all(ws.rotations == 0 for ws in res.workers)
                for snap, ex in zip(res.snapshots[-len(exacts):], exacts):
                    nodes = snap.nodes
                    want = np.array([ex.local_count(int(u)) for u in nodes.tolist()], dtype=float)
                    err = max(abs(snap.global_estimate - ex.global_count),
                              float(np.max(np.abs(snap.local_values - want), initial=0.0)))
                    worst = max(worst, err)
                    checked += 1
    ok = worst < 1e-6
    record_acceptance(1, ok, f"exactness at p=1: {checked} snapshots, max abs error {worst:.2e} (< 1e-6)")
    assert ok


# 2 -------------------------------------------------------------------------

def test_criterion_2_unbiasedness():
    graph = planted_community_graph(1200, 5000, seed=2)
    dyn = synthesize_fully_dynamic(graph, 0.2, seed=2)
    k = int(0.05 * len(graph))
    parts = []
    ok = True
    for algo, stream in (("ar", graph), ("fd", dyn)):
        exact = exact_static(stream.surviving_edges())
        cfg = ClusterConfig(algo, workers=4, k=k, ratio_threshold=0.2)
        (rep,) = sweep([cfg], stream, 500, base_seed=0, exact=exact)
        est = np.array(rep.estimates)
        sem = est.std(ddof=1) / math.sqrt(len(est))
        z = abs(est.mean() - exact.global_count) / sem
        ok &= z <= 4
        parts.append(f"{algo}: mean {est.mean():.1f} vs exact {exact.global_count}, {z:.2f} SE")
    record_acceptance(2, ok, "unbiasedness over 500 runs (k=5% of m, <= 4 SE): " + "; ".join(parts))
    assert ok


# 3 -------------------------------------------------------------------------

def test_criterion_3_threshold_trend(big_graph):
    exact = exact_static(big_graph.surviving_edges())
    cfgs = [ClusterConfig("ar", workers=10, k=200, ratio_threshold=r) for r in (0.032, 0.08, 0.2)]
    errs = [rep.mean_global_error for rep in sweep(cfgs, big_graph, 100, base_seed=0, exact=exact)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    ok = all(r <= 0.8 for r in ratios)
    record_acceptance(3, ok, "AR error over R=0.032/0.08/0.2 (100 runs, W=10, k=200, m=1e5): "
                      + " > ".join(f"{e:.4f}" for e in errs)
                      + f"; step ratios {', '.join(f'{r:.2f}' for r in ratios)} (<= 0.80)")
    assert ok


# 4 -------------------------------------------------------------------------

def test_criterion_4_worker_trend(big_graph):
    dyn = synthesize_fully_dynamic(big_graph, 0.2, seed=4)
    exact = exact_static(dyn.surviving_edges())
    cfgs = [ClusterConfig("fd", workers=w, k=1000) for w in (1, 4, 16)]
    errs = [rep.mean_global_error for rep in sweep(cfgs, dyn, 200, base_seed=0, exact=exact)]
    ok = errs[0] >= errs[1] >= errs[2] and errs[2] <= 0.6 * errs[0]
    record_acceptance(4, ok, "FD error over W=1/4/16 (200 runs, k=1000, delta=0.2): "
                      + ", ".join(f"{e:.4f}" for e in errs)
                      + f"; W16/W1 = {errs[2] / errs[0]:.2f} (<= 0.60)")
    assert ok


# 5 -------------------------------------------------------------------------

def test_criterion_5_linear_scaling():
    sizes = [2 ** p for p in range(15, 21)]
    m = math.ceil(sizes[-1] / 1.2) + 1
    stream = synthesize_fully_dynamic(planted_community_graph(250_000, m, seed=5), 0.2, seed=5)
    assert len(stream) >= sizes[-1]
    cfg = ClusterConfig("fd", workers=8, k=10_000)
    run_stream(cfg, stream.prefix(sizes[0]))  # warm-up, keeps compilation out of the fit
    times = []
    for n in sizes:
        prefix = stream.prefix(n)
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            run_stream(cfg, prefix)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    x, y = np.array(sizes, float), np.array(times)
    slope, icpt = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - (slope * x + icpt)) ** 2) / np.sum((y - y.mean()) ** 2)
    ok = r2 >= 0.98
    record_acceptance(5, ok, f"FD W=8 k=1e4 wall time over prefixes 2^15..2^20: R^2 = {r2:.4f} (>= 0.98); "
                      + ", ".join(f"{t * 1e3:.0f}ms" for t in times))
    assert ok


# 6 -------------------------------------------------------------------------

MC_SEED = 0
MC_TRIALS = 100_000


def _mc_membership(events, k, rng):
    n = 4
    ev_u = np.array([PAIRS_4[e][0] for _, e in events], dtype=np.int64)
    ev_v = np.array([PAIRS_4[e][1] for _, e in events], dtype=np.int64)
    ev_s = np.array([s for s, _ in events], dtype=np.int8)
    live = sorted(live_edges(events))
    q_u = np.array([PAIRS_4[e][0] for e in live], dtype=np.int64)
    q_v = np.array([PAIRS_4[e][1] for e in live], dtype=np.int64)
    hits = K.pairing_membership_mc(
        ev_u, ev_v, ev_s, q_u, q_v, n, k, MC_TRIALS,
        np.zeros(k, np.int64), np.zeros(k, np.int64), new_edge_index(),
        np.full(n, -1, np.int64), np.full(2 * k, -1, np.int64), np.full(2 * k, -1, np.int64),
        np.zeros(n, np.int64), np.zeros(K.NSTAT, np.int64), rng)
    return live, hits


def test_criterion_6_random_pairing_oracle():
    streams = canonical_streams(6)
    rng = np.array([SplitMix64(MC_SEED).state], dtype=np.uint64)
    comparisons = exceed = 0
    expected_exceed = 0.0
    worst = 0.0
    z2 = []
    for k in (2, 3):
        for events in streams:
            states = pairing_tree(events, k)
            live, hits = _mc_membership(events, k, rng)
            assert (hits >= 0).all()
            for e, h in zip(live, hits.tolist()):
                p = float(membership(states, e))
                sd = math.sqrt(p * (1 - p) / MC_TRIALS)
                dev = abs(h / MC_TRIALS - p)
                comparisons += 1
                if sd == 0:
                    bad = dev != 0
                else:
                    bad = dev > 3 * sd
                    worst = max(worst, dev / sd)
                    z2.append((dev / sd) ** 2)
                    expected_exceed += 0.0027
                exceed += bad
    ok = exceed == 0
    # context only: the pass/fail rule above is the per-comparison 3 SD bound
    chi2_p = stats.chi2.sf(sum(z2), len(z2))
    record_acceptance(6, ok, f"RP micro-oracle: {len(streams)} streams x k in (2,3), {comparisons} memberships, "
                      f"{exceed} outside 3 SD (chance expectation {expected_exceed:.1f}), worst {worst:.2f} SD; "
                      f"aggregate chi2 p = {chi2_p:.2f}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_criterion_7_metric_fixtures():
    tol = 1e-12
    checks = [
        mean_global_error(10, [10, 10]) == 0,
        abs(mean_global_error(9, [19]) - 1.0) < tol,
        abs(mean_global_error(0, [0.5]) - 0.5) < tol,
        abs(global_variance(10, [8, 12]) - 4) < tol,
        global_variance(10, [10, 10, 10]) == 0,
        abs(global_variance(0, [3]) - 9) < tol,
        mean_local_error(np.array([3.0, 0.0]), [np.array([3.0, 0.0])]) == 0,
        abs(mean_local_error(np.array([3.0, 0.0]), [np.array([1.0, 1.0])]) - 0.75) < tol,
        abs(mean_local_error(np.full(4, 3.0), [np.zeros(4)]) - 0.75) < tol,
        abs(pearson(np.array([1.0, 5.0, 2.0]), np.array([1.0, 5.0, 2.0])) - 1) < tol,
        abs(pearson(np.array([1.0, 5.0, 2.0]), np.array([7.0, 15.0, 9.0])) - 1) < tol,
        abs(pearson(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0])) + 1) < tol,
    ]
    ok = all(checks)
    record_acceptance(7, ok, f"metric fixtures: {sum(checks)}/{len(checks)} within 1e-12")
    assert ok


# 8 -------------------------------------------------------------------------

def _cli(args, env):
    subprocess.run([sys.executable, "-m", "dtc.cli", *args], env=env, check=True, capture_output=True)


def test_criterion_8_determinism(tmp_path):
    graph = planted_community_graph(2000, 12_000, seed=8)
    ins, dyn = tmp_path / "g.txt", tmp_path / "d.txt"
    write_stream(graph, ins)
    write_stream(synthesize_fully_dynamic(graph, 0.2, seed=8), dyn)
    env = dict(os.environ, DTC_THREADS="4")
    invocations = {
        "run-ar": ["run", "--algo", "ar", "--workers", "6", "--budget", "300", "--input", str(ins),
                   "--query-every", "2000", "--seed", "5"],
        "run-fd": ["run", "--algo", "fd", "--workers", "6", "--budget", "300", "--input", str(dyn),
                   "--query-every", "2000", "--seed", "5"],
        "sweep-fd": ["sweep", "--input", str(ins), "--grid", "algo=fd;W=1,4;k=300;delta=0,0.2", "--runs", "5",
                     "--seed-base", "3"],
        "sweep-ar": ["sweep", "--input", str(ins), "--grid", "algo=ar;W=1,4;k=300;R=0.08,0.2", "--runs", "5",
                     "--seed-base", "3"],
    }
    outputs = {}
    for name, args in invocations.items():
        for mode in ("sequential", "parallel"):
            for rep in range(2):
                out = tmp_path / f"{name}-{mode}-{rep}.csv"
                _cli([*args, "--mode", mode, "--out", str(out)], env)
                outputs[(name, mode, rep)] = out.read_bytes()
    same_rep = all(outputs[(n, m, 0)] == outputs[(n, m, 1)] for n, m, _ in outputs)
    same_mode = all(outputs[(n, "sequential", 0)] == outputs[(n, "parallel", 0)] for n in invocations)
    ok = same_rep and same_mode
    record_acceptance(8, ok, f"byte-identical CSV across repeats: {same_rep}; sequential == parallel: {same_mode} "
                      f"({len(outputs)} invocations)")
    assert ok


# 9 -------------------------------------------------------------------------

def test_criterion_9_single_counting():
    p = Partitioner(3)
    reps = {}
    for node in itertools.count():
        reps.setdefault(p.hash_node(node), []).append(node)
        if all(len(reps.get(c, [])) >= 3 for c in range(3)):
            break
    worst = 0
    cases = 0
    for colors in itertools.product(range(3), repeat=3):
        pool = {c: list(reps[c]) for c in range(3)}
        nodes = [pool[c].pop() for c in colors]
        for closing in itertools.combinations(range(3), 2):
            x, y = (nodes[i] for i in closing)
            (z,) = (nodes[i] for i in range(3) if i not in closing)
            holders = [w for w in p.recipients(x, y)
                       if w in (p.hash_node(x), p.hash_node(z)) and w in (p.hash_node(y), p.hash_node(z))]
            worst = max(worst, len(holders))
            cases += 1
    ok = worst <= 1
    record_acceptance(9, ok, f"routing single-counting: {cases} colouring/closing-edge cases, "
                      f"max closers per triangle = {worst}")
    assert ok


# 10 ------------------------------------------------------------------------

def test_criterion_10_arxiv_ingestion():
    path = os.environ.get("DTC_ARXIV_PATH")
    if not path or not Path(path).exists():
        msg = "raw Arxiv edge list not available (set DTC_ARXIV_PATH); advisory check not run"
        record_acceptance(10, False, msg, status="SKIP (advisory)")
        warnings.warn(msg)
        pytest.skip(msg)
    stream, report = load_edge_list(path)
    warning = dataset_check("arxiv", stream.num_nodes, len(stream))
    detail = f"cleaned Arxiv: {stream.num_nodes} nodes / {len(stream)} edges (dropped {report.dropped})"
    if warning:
        record_acceptance(10, False, detail + " differs from published counts", status="WARN (advisory)")
        warnings.warn(warning)
    else:
        record_acceptance(10, True, detail)
