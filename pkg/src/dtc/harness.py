"""In-process master/workers/aggregator simulator.

The master routes every event of a stream to one worker (unicast) or to all
of them (broadcast). Each worker consumes its events in global stream order
and owns all of its state, so workers can be advanced on separate threads;
the aggregator then merges their deltas in worker-id order. Output is a pure
function of ``(config, stream)``: the sequential and threaded modes produce
bit-identical results.
"""

from __future__ import annotations

import os
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels as K
from ._jit import backend_name, new_edge_index
from .aggregation import Aggregator, CountSnapshot
from .core_sampling import SplitMix64, rotation_trigger, sampler_seed
from .errors import ConfigError, StreamIntegrityError, UnsupportedOperationError
from .routing import MASK64, Partitioner
from .stream_io import CanonicalStream
from .workers import ArWorker, FdWorker

ALGORITHMS = ("ar", "fd")
DEFAULT_BUDGET_FACTOR = 64


@dataclass(frozen=True)
class ClusterConfig:
    algorithm: str = "fd"
    workers: int = 1
    k: int = 1000
    ratio_threshold: float = 0.2
    total_budget: int | None = None
    seed: int = 0
    hash_seed: int = 0
    flush_every: int | None = None

    def __post_init__(self):
        algo = self.algorithm.lower()
        object.__setattr__(self, "algorithm", algo)
        if algo not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.k < 2:
            raise ConfigError("budget k must be >= 2")
        if not 0.0 < self.ratio_threshold <= 1.0:
            raise ConfigError("ratio threshold must lie in (0, 1]")
        if self.total_budget is not None and self.total_budget < self.k:
            raise ConfigError("total budget must be >= k")
        if not 0 <= self.seed <= MASK64 or not 0 <= self.hash_seed <= MASK64:
            raise ConfigError("seeds must fit in 64 unsigned bits")
        if self.flush_every is not None and self.flush_every < 1:
            raise ConfigError("flush_every must be >= 1")

    @property
    def budget(self) -> int:
        """Total edge slots per adaptive-resampling worker."""
        return self.total_budget if self.total_budget is not None else DEFAULT_BUDGET_FACTOR * self.k

    @property
    def partitioner(self) -> Partitioner:
        return Partitioner(self.workers, self.hash_seed)


@dataclass
class WorkerStats:
    worker_id: int
    delivered: int
    offers: int
    stored: int
    peak_stored: int
    rotations: int = 0
    exhausted_at: int | None = None
    n_g: int = 0
    n_b: int = 0


@dataclass
class RunResult:
    config: ClusterConfig
    final: CountSnapshot
    snapshots: list[CountSnapshot]
    workers: list[WorkerStats]
    wall_time: float
    backend: str
    rng: str = SplitMix64.name
    metadata: dict = field(default_factory=dict)

    @property
    def global_estimate(self) -> float:
        return self.final.global_estimate


class _KernelWorker:
    def __init__(self, wid: int, config: ClusterConfig, n: int, arrays):
        self.wid = wid
        self.algo = config.algorithm
        self.k = config.k
        self.n = n
        self.arrays = arrays
        if self.algo == "ar":
            groups = config.budget // config.k
            cap = groups * config.k
            self.trigger = rotation_trigger(config.k, config.ratio_threshold)
        else:
            groups = 0
            cap = config.k
        self.slot_u = np.zeros(cap, dtype=np.int64)
        self.slot_v = np.zeros(cap, dtype=np.int64)
        self.index = new_edge_index()
        self.head = np.full(n, -1, dtype=np.int64)
        self.nxt = np.full(2 * cap, -1, dtype=np.int64)
        self.prv = np.full(2 * cap, -1, dtype=np.int64)
        self.deg = np.zeros(n, dtype=np.int64)
        self.local = np.zeros(n, dtype=np.float64)
        self.flushed = np.zeros(n, dtype=np.float64)
        self.glob = np.zeros(1, dtype=np.float64)
        self.flushed_glob = 0.0
        self.st = np.zeros(K.NSTAT, dtype=np.int64)
        self.st[K.ST_REMAINING] = config.budget - config.k
        self.st[K.ST_EXHAUSTED_AT] = -1
        self.st[K.ST_ERROR] = -1
        self.seg_seen = np.ones(max(groups, 1), dtype=np.int64)
        self.rng = np.array([sampler_seed(config.seed, wid)], dtype=np.uint64)

    def advance(self, start: int, stop: int) -> None:
        us, vs, signs, hu, hv = self.arrays
        if self.algo == "ar":
            K.ar_run(us, vs, signs, hu, hv, start, stop, self.wid, self.n, self.k, self.trigger,
                     self.slot_u, self.slot_v, self.index, self.head, self.nxt, self.prv, self.deg,
                     self.local, self.glob, self.st, self.seg_seen, self.rng)
        else:
            K.fd_run(us, vs, signs, hu, hv, start, stop, self.wid, self.n, self.k,
                     self.slot_u, self.slot_v, self.index, self.head, self.nxt, self.prv, self.deg,
                     self.local, self.glob, self.st, self.rng)
        err = int(self.st[K.ST_ERROR])
        if err >= 0:
            if self.algo == "ar":
                raise UnsupportedOperationError(f"event {err}: adaptive resampling cannot process deletions")
            raise StreamIntegrityError(f"event {err}: deletion with no live eligible edges at worker {self.wid}")

    def flush(self):
        g = float(self.glob[0])
        dg = g - self.flushed_glob
        dl = self.local - self.flushed
        self.flushed_glob = g
        self.flushed = self.local.copy()
        return dg, dl

    def stats(self) -> WorkerStats:
        st = self.st
        stored = int(st[K.ST_GROUP] * self.k + st[K.ST_SIZE]) if self.algo == "ar" else int(st[K.ST_SIZE])
        ex = int(st[K.ST_EXHAUSTED_AT])
        return WorkerStats(self.wid, int(st[K.ST_DELIVERED]), int(st[K.ST_OFFERS]), stored,
                           int(st[K.ST_PEAK]), int(st[K.ST_ROTATIONS]), None if ex < 0 else ex,
                           int(st[K.ST_NG]), int(st[K.ST_NB]))


class _ReferenceWorker:
    def __init__(self, wid: int, config: ClusterConfig, stream: CanonicalStream):
        self.wid = wid
        self.stream = stream
        part = config.partitioner
        self.part = part
        if config.algorithm == "ar":
            self.worker = ArWorker(wid, part, config.k, config.ratio_threshold,
                                   config.budget - config.k, config.seed)
        else:
            self.worker = FdWorker(wid, part, config.k, config.seed)
        self.peak = 0

    def advance(self, start: int, stop: int) -> None:
        w = self.worker
        for i in range(start, stop):
            e = self.stream[i]
            if self.wid in self.part.recipients(e.u, e.v):
                w.process_edge(e)
                self.peak = max(self.peak, w.stored_edges)

    def flush(self):
        return self.worker.counts.flush()

    def stats(self) -> WorkerStats:
        w = self.worker
        if isinstance(w, ArWorker):
            pool = w.pool
            return WorkerStats(self.wid, w.delivered, pool.offers, len(pool), self.peak,
                               len(pool.segments), pool.exhausted_at)
        pr = w.pairing
        return WorkerStats(self.wid, w.delivered, pr.inserts_offered + pr.deletes_offered,
                           len(pr.reservoir), self.peak, n_g=pr.n_g, n_b=pr.n_b)


def _thread_cap() -> int:
    env = os.environ.get("DTC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"DTC_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


class Cluster:
    """A master, ``W`` workers and an aggregator bound to one stream."""

    def __init__(self, config: ClusterConfig, stream: CanonicalStream, *, engine: str = "kernel",
                 mode: str = "sequential", threads: int | None = None):
        if config.algorithm == "ar" and not stream.insertion_only:
            raise UnsupportedOperationError("adaptive resampling requires an insertion-only stream")
        if engine not in ("kernel", "reference"):
            raise ConfigError(f"unknown engine {engine!r}")
        if mode not in ("sequential", "parallel"):
            raise ConfigError(f"unknown mode {mode!r}")
        self.config = config
        self.stream = stream
        self.engine = engine
        self.mode = mode
        self.threads = min(threads or _thread_cap(), config.workers)
        self.nodes = stream.nodes
        self.position = 0
        self._seq = 0
        self.history: dict[int, CountSnapshot] = {}
        part = config.partitioner
        if engine == "kernel":
            n = self.nodes.shape[0]
            du = np.searchsorted(self.nodes, stream.u).astype(np.int64)
            dv = np.searchsorted(self.nodes, stream.v).astype(np.int64)
            owner = part.hash_nodes(self.nodes)
            arrays = (du, dv, stream.sign, owner[du], owner[dv])
            self.workers = [_KernelWorker(w, config, n, arrays) for w in range(config.workers)]
        else:
            self.workers = [_ReferenceWorker(w, config, stream) for w in range(config.workers)]
        self.aggregator = Aggregator(self.nodes)

    def _advance_all(self, stop: int) -> None:
        start = self.position
        if stop <= start:
            return
        if self.mode == "parallel" and self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                list(pool.map(lambda w: w.advance(start, stop), self.workers))
        else:
            for w in self.workers:
                w.advance(start, stop)
        self.position = stop

    def flush(self) -> None:
        for w in self.workers:
            dg, dl = w.flush()
            self.aggregator.accumulate(w.wid, self._seq, dg, dl)
        self._seq += 1

    def advance_to(self, position: int) -> None:
        if position > len(self.stream):
            raise ValueError(f"position {position} is past the end of the stream ({len(self.stream)})")
        if position < self.position:
            raise ValueError("cannot rewind a cluster")
        cadence = self.config.flush_every
        while self.position < position:
            stop = position
            if cadence is not None:
                stop = min(position, (self.position // cadence + 1) * cadence)
            self._advance_all(stop)
            if cadence is not None and stop % cadence == 0:
                self.flush()

    def snapshot_at(self, position: int) -> CountSnapshot:
        if position > self.position:
            raise ValueError(f"position {position} has not been reached (at {self.position})")
        if position == self.position:
            self.flush()
            snap = self.aggregator.snapshot(position)
            self.history[position] = snap
            return snap
        if position in self.history:
            return self.history[position]
        raise ValueError(f"no snapshot was taken at position {position}")

    def worker_stats(self) -> list[WorkerStats]:
        return [w.stats() for w in self.workers]


def run_stream(config: ClusterConfig, stream: CanonicalStream, query_points: Iterable[int] | None = None,
               *, engine: str = "kernel", mode: str = "sequential", threads: int | None = None) -> RunResult:
    t0 = time.perf_counter()
    cluster = Cluster(config, stream, engine=engine, mode=mode, threads=threads)
    n = len(stream)
    points = sorted({int(p) for p in query_points or ()} | {n})
    if points[0] < 0 or points[-1] > n:
        raise ValueError(f"query points must lie in [0, {n}]")
    snaps = []
    for p in points:
        cluster.advance_to(p)
        snaps.append(cluster.snapshot_at(p))
    wall = time.perf_counter() - t0
    exhausted = [s.worker_id for s in cluster.worker_stats() if s.exhausted_at is not None]
    meta = {"budget_exhausted_workers": exhausted} if exhausted else {}
    return RunResult(config, snaps[-1], snaps, cluster.worker_stats(), wall,
                     backend_name() if engine == "kernel" else "reference", metadata=meta)


def config_items(config: ClusterConfig) -> dict:
    d = asdict(config)
    d["budget"] = config.budget
    return d


def with_seed(config: ClusterConfig, seed: int) -> ClusterConfig:
    return replace(config, seed=seed & MASK64)


def sweep(configs: Sequence[ClusterConfig], stream: CanonicalStream, runs: int, *, base_seed: int = 0,
          threads: int | None = None, exact=None, mode: str = "sequential"):
    """``runs`` seeded repetitions per config (seed = base_seed + run index).

    Returns one :class:`dtc.metrics.RunReport` per config, in input order.
    """
    from .exact import exact_static
    from .metrics import evaluate

    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if not configs:
        raise ConfigError("sweep needs at least one config")
    if exact is None:
        exact = exact_static(stream.surviving_edges())
    cap = threads or _thread_cap()
    reports = []
    for cfg in configs:
        jobs = [with_seed(cfg, base_seed + i) for i in range(runs)]
        t0 = time.perf_counter()
        if cap > 1:
            with ThreadPoolExecutor(max_workers=cap) as pool:
                results = list(pool.map(lambda c: run_stream(c, stream, mode=mode, threads=1), jobs))
        else:
            results = [run_stream(c, stream, mode=mode) for c in jobs]
        wall = time.perf_counter() - t0
        reports.append(evaluate(exact, [r.final for r in results], config=cfg, base_seed=base_seed,
                                wall_time=wall))
    return reports
