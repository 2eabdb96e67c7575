"""Master-side edge scheduling.

Every node is mapped to a worker by a fixed 64-bit mixer (the splitmix64
finalizer). An edge whose endpoints map to the same worker is unicast to it;
any other edge is broadcast to all workers. The sign of the edge never
influences routing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StreamIntegrityError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    x = (x + GOLDEN) & MASK64
    x ^= x >> 30
    x = (x * MIX1) & MASK64
    x ^= x >> 27
    x = (x * MIX2) & MASK64
    x ^= x >> 31
    return x


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64) + np.uint64(GOLDEN)
    x ^= x >> np.uint64(30)
    x *= np.uint64(MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(MIX2)
    x ^= x >> np.uint64(31)
    return x


@dataclass(frozen=True)
class Unicast:
    worker: int


@dataclass(frozen=True)
class Broadcast:
    pass


RoutingDecision = Unicast | Broadcast


@dataclass(frozen=True)
class Partitioner:
    worker_count: int
    seed: int = 0

    def __post_init__(self):
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    def hash_node(self, node: int) -> int:
        return mix64((int(node) ^ self.seed) & MASK64) % self.worker_count

    def hash_nodes(self, nodes: np.ndarray) -> np.ndarray:
        """Worker id for every entry of ``nodes``, as int64."""
        keyed = np.asarray(nodes, dtype=np.uint64) ^ np.uint64(self.seed)
        return (mix64_array(keyed) % np.uint64(self.worker_count)).astype(np.int64)

    def schedule_edge(self, u: int, v: int) -> RoutingDecision:
        if u == v:
            raise StreamIntegrityError(f"self-loop on node {u} cannot be scheduled")
        hu = self.hash_node(u)
        if hu == self.hash_node(v):
            return Unicast(hu)
        return Broadcast()

    def recipients(self, u: int, v: int) -> list[int]:
        decision = self.schedule_edge(u, v)
        if isinstance(decision, Unicast):
            return [decision.worker]
        return list(range(self.worker_count))

