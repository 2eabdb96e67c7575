"""Object-level worker implementations.

These follow the per-edge worker loop literally: count every wedge closed by
the arriving edge against the stored sample, then (only when one endpoint
hashes to this worker) hand the edge to the sampler. They are the readable
reference for the array kernels in :mod:`dtc.kernels`, which the cluster
harness uses by default.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable

from .core_sampling import (
    AdaptivePool,
    Edge,
    PairingAction,
    PairingState,
    SplitMix64,
    p_ar,
    p_fd,
    sampler_seed,
)
from .errors import UnsupportedOperationError
from .routing import Partitioner
from .stream_io import SignedEdge


class LocalCounts:
    """Global and per-node estimates, plus the increments not yet flushed."""

    def __init__(self):
        self.global_estimate = 0.0
        self.local: dict[int, float] = defaultdict(float)
        self.pending_global = 0.0
        self.pending_local: dict[int, float] = defaultdict(float)

    def add_triangle(self, u: int, v: int, c: int, amount: float) -> None:
        self.global_estimate += amount
        self.pending_global += amount
        for x in (u, v, c):
            self.local[x] += amount
            self.pending_local[x] += amount

    def flush(self) -> tuple[float, dict[int, float]]:
        out = (self.pending_global, dict(self.pending_local))
        self.pending_global = 0.0
        self.pending_local = defaultdict(float)
        return out


class SampleGraph:
    """Adjacency sets over the edges a worker currently stores."""

    def __init__(self, edges: Iterable[Edge] = ()):
        self.adj: dict[int, set[int]] = defaultdict(set)
        for e in edges:
            self.add(e)

    def add(self, edge: Edge) -> None:
        a, b = edge
        self.adj[a].add(b)
        self.adj[b].add(a)

    def remove(self, edge: Edge) -> None:
        a, b = edge
        self.adj[a].discard(b)
        self.adj[b].discard(a)

    def neighbors(self, node: int) -> set[int]:
        return self.adj.get(node, set())


def common_neighbors(sample: SampleGraph | Iterable[Edge], u: int, v: int) -> set[int]:
    if not isinstance(sample, SampleGraph):
        sample = SampleGraph(sample)
    nu, nv = sample.neighbors(u), sample.neighbors(v)
    return nu & nv if len(nu) <= len(nv) else nv & nu


class _Worker:
    def __init__(self, worker_id: int, partitioner: Partitioner):
        self.worker_id = worker_id
        self.partitioner = partitioner
        self.counts = LocalCounts()
        self.sample = SampleGraph()
        self.delivered = 0

    def eligible(self, u: int, v: int) -> bool:
        p = self.partitioner
        return p.hash_node(u) == self.worker_id or p.hash_node(v) == self.worker_id


class ArWorker(_Worker):
    def __init__(self, worker_id: int, partitioner: Partitioner, k: int, ratio_threshold: float,
                 remaining_budget: int, seed: int = 0):
        super().__init__(worker_id, partitioner)
        rng = SplitMix64(sampler_seed(seed, worker_id))
        self.pool = AdaptivePool(k, ratio_threshold, remaining_budget, rng)

    def process_edge(self, edge: SignedEdge) -> None:
        if edge.sign < 0:
            raise UnsupportedOperationError("adaptive resampling handles insertion-only streams")
        self.delivered += 1
        u, v = edge.u, edge.v
        pool = self.pool
        for c in sorted(common_neighbors(self.sample, u, v)):
            p = p_ar(pool, pool.locate((u, c)), pool.locate((v, c)))
            self.counts.add_triangle(u, v, c, 1.0 / p)
        if self.eligible(u, v):
            sampled = pool.offer((u, v))
            if pool.last_evicted is not None:
                self.sample.remove(pool.last_evicted)
            if sampled:
                self.sample.add((u, v))

    @property
    def stored_edges(self) -> int:
        return len(self.pool)


class FdWorker(_Worker):
    def __init__(self, worker_id: int, partitioner: Partitioner, k: int, seed: int = 0):
        super().__init__(worker_id, partitioner)
        self.pairing = PairingState.create(k, SplitMix64(sampler_seed(seed, worker_id)))

    def process_edge(self, edge: SignedEdge) -> None:
        self.delivered += 1
        u, v = edge.u, edge.v
        inc = edge.sign / p_fd(self.pairing)
        for c in sorted(common_neighbors(self.sample, u, v)):
            self.counts.add_triangle(u, v, c, inc)
        if self.eligible(u, v):
            res = self.pairing.reservoir
            action = self.pairing.offer((u, v), edge.sign)
            if action is PairingAction.INSERTED:
                if res.last_evicted is not None:
                    self.sample.remove(res.last_evicted)
                self.sample.add((u, v))
            elif action is PairingAction.REMOVED:
                self.sample.remove((u, v))

    @property
    def stored_edges(self) -> int:
        return len(self.pairing.reservoir)
