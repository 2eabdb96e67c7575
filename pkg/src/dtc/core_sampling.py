"""Sampler state machines and pair-inclusion probabilities.

Three samplers live here:

* :class:`ReservoirState`, a fixed-capacity uniform reservoir over
  insertion-only offers;
* :class:`AdaptivePool`, a reservoir that is frozen into an immutable segment
  whenever its sampling ratio drops to the configured threshold, after which
  a fresh reservoir takes over (while the edge budget lasts);
* :class:`PairingState`, a reservoir extended with Random Pairing so that
  deletions are compensated by later insertions.

Slot order inside a reservoir is part of the contract: appends go to the end,
random eviction replaces a slot in place, and removal moves the last slot into
the hole. The array kernels in :mod:`dtc.kernels` follow the same rules, so
both paths make identical sampling decisions from the same random stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError, DuplicateEdgeError, StreamIntegrityError
from .routing import GOLDEN, MASK64, mix64

Edge = tuple[int, int]

_INV_2_53 = 1.0 / 9007199254740992.0


class SplitMix64:
    """splitmix64: state advances by the golden gamma, output is mix64(state)."""

    name = "splitmix64"

    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        out = mix64(self.state)
        self.state = (self.state + GOLDEN) & MASK64
        return out

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def below(self, n: int) -> int:
        return int(self.random() * n)


def sampler_seed(seed: int, worker_id: int) -> int:
    return mix64((int(seed) ^ int(worker_id)) & MASK64)


def _canon(edge: Edge) -> Edge:
    a, b = edge
    if a == b:
        raise StreamIntegrityError(f"self-loop on node {a}")
    return (a, b) if a < b else (b, a)


# -- pair inclusion probabilities -------------------------------------------

def reservoir_inclusion_probability(k: int, seen: int) -> float:
    if seen <= k:
        return 1.0
    return k / seen


def reservoir_pair_probability(k: int, seen: int) -> float:
    """Probability that two given offers both sit in a size-``k`` reservoir."""
    if seen <= k or seen <= 1:
        return 1.0
    return (k / seen) * ((k - 1) / (seen - 1))


def segment_pair_probability(k: int, segment_seen: int) -> float:
    # ratio * (k - 1) / (k / ratio - 1) with ratio = k / segment_seen
    return (k / segment_seen) * ((k - 1) / (segment_seen - 1))


def pairing_pair_probability(k: int, population: int) -> float:
    """``population`` is t + n_g + n_b of a Random Pairing sampler."""
    if population < k:
        return 1.0
    return (k / population) * ((k - 1) / (population - 1))


# -- reservoir ---------------------------------------------------------------

class ReservoirState:
    def __init__(self, capacity: int, rng: SplitMix64 | None = None):
        if capacity < 0:
            raise ConfigError("capacity must be non-negative")
        self.capacity = capacity
        self.seen = 0
        self.rng = rng if rng is not None else SplitMix64()
        self.slots: list[Edge] = []
        self._pos: dict[Edge, int] = {}
        self.last_evicted: Edge | None = None

    def __len__(self) -> int:
        return len(self.slots)

    def __contains__(self, edge: Edge) -> bool:
        return _canon(edge) in self._pos

    @property
    def edges(self) -> set[Edge]:
        return set(self.slots)

    @property
    def full(self) -> bool:
        return len(self.slots) >= self.capacity

    def offer(self, edge: Edge) -> bool:
        """Standard reservoir step; returns whether ``edge`` was stored.

        When an edge is evicted to make room it is reported through
        :attr:`last_evicted` (``None`` otherwise).
        """
        edge = _canon(edge)
        if edge in self._pos:
            raise DuplicateEdgeError(f"edge {edge} already sampled")
        self.seen += 1
        self.last_evicted = None
        if self.capacity == 0:
            return False
        if len(self.slots) < self.capacity:
            self.append(edge)
            return True
        if self.rng.random() < self.capacity / self.seen:
            j = self.rng.below(self.capacity)
            old = self.slots[j]
            del self._pos[old]
            self.slots[j] = edge
            self._pos[edge] = j
            self.last_evicted = old
            return True
        return False

    def append(self, edge: Edge) -> None:
        edge = _canon(edge)
        if edge in self._pos:
            raise DuplicateEdgeError(f"edge {edge} already sampled")
        if len(self.slots) >= self.capacity:
            raise OverflowError("reservoir is full")
        self.last_evicted = None
        self._pos[edge] = len(self.slots)
        self.slots.append(edge)

    def remove(self, edge: Edge) -> bool:
        edge = _canon(edge)
        j = self._pos.pop(edge, None)
        if j is None:
            return False
        last = self.slots.pop()
        if j < len(self.slots):
            self.slots[j] = last
            self._pos[last] = j
        return True


# -- adaptive pool ----------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    edges: frozenset
    seen: int

    @property
    def ratio(self) -> float:
        return len(self.edges) / self.seen


@dataclass(frozen=True)
class EdgeLocation:
    segment: int | None = None

    @property
    def is_current(self) -> bool:
        return self.segment is None


CURRENT = EdgeLocation(None)


def rotation_trigger(k: int, ratio_threshold: float) -> int:
    """Offers after which a full reservoir's ratio k/t has dropped to R."""
    t = math.ceil(k / ratio_threshold)
    # guard against k/R landing a hair above an integer
    if t - 1 >= k and k / (t - 1) <= ratio_threshold:
        t -= 1
    return t


class AdaptivePool:
    def __init__(self, k: int, ratio_threshold: float, remaining_budget: int,
                 rng: SplitMix64 | None = None):
        if k < 1:
            raise ConfigError("segment size k must be >= 1")
        if not 0.0 < ratio_threshold <= 1.0:
            raise ConfigError("ratio threshold must lie in (0, 1]")
        if remaining_budget < 0:
            raise ConfigError("remaining budget must be >= 0")
        self.k = k
        self.ratio_threshold = ratio_threshold
        self.remaining_budget = remaining_budget
        self.trigger = rotation_trigger(k, ratio_threshold)
        self.rng = rng if rng is not None else SplitMix64()
        self.current = ReservoirState(k, self.rng)
        self.segments: list[Segment] = []
        self._segment_of: dict[Edge, int] = {}
        self.exhausted_at: int | None = None
        self.offers = 0
        self.last_evicted: Edge | None = None

    def __len__(self) -> int:
        return len(self.current) + self.k * len(self.segments)

    def locate(self, edge: Edge) -> EdgeLocation | None:
        edge = _canon(edge)
        if edge in self.current._pos:
            return CURRENT
        seg = self._segment_of.get(edge)
        return None if seg is None else EdgeLocation(seg)

    def offer(self, edge: Edge) -> bool:
        edge = _canon(edge)
        if edge in self._segment_of:
            raise DuplicateEdgeError(f"edge {edge} already in a finalized segment")
        self.offers += 1
        sampled = self.current.offer(edge)
        self.last_evicted = self.current.last_evicted
        self.check_ratio()
        return sampled

    def check_ratio(self) -> bool:
        cur = self.current
        if cur.seen < self.trigger or len(cur) < self.k:
            return False
        if self.remaining_budget < self.k:
            if self.exhausted_at is None:
                self.exhausted_at = self.offers
            return False
        idx = len(self.segments)
        self.segments.append(Segment(frozenset(cur.slots), cur.seen))
        for e in cur.slots:
            self._segment_of[e] = idx
        self.current = ReservoirState(self.k, self.rng)
        self.remaining_budget -= self.k
        return True

    def p_ar(self, loc1: EdgeLocation, loc2: EdgeLocation) -> float:
        return p_ar(self, loc1, loc2)


def p_ar(pool: AdaptivePool, loc1: EdgeLocation, loc2: EdgeLocation) -> float:
    """Joint inclusion probability of two wedge edges found in the pool."""
    k = pool.k
    t = pool.current.seen
    if loc1.is_current and loc2.is_current:
        return reservoir_pair_probability(k, t)
    if loc1.is_current or loc2.is_current:
        seg = pool.segments[loc2.segment if loc1.is_current else loc1.segment]
        return reservoir_inclusion_probability(k, t) * (k / seg.seen)
    if loc1.segment == loc2.segment:
        return segment_pair_probability(k, pool.segments[loc1.segment].seen)
    return (k / pool.segments[loc1.segment].seen) * (k / pool.segments[loc2.segment].seen)


# -- random pairing -----------------------------------------------------------

class PairingAction(Enum):
    INSERTED = "inserted"
    SKIPPED = "skipped"
    REMOVED = "removed"
    COMPENSATED = "compensated"


@dataclass
class PairingState:
    reservoir: ReservoirState
    n_g: int = 0
    n_b: int = 0
    t: int = 0
    inserts_offered: int = field(default=0, repr=False)
    deletes_offered: int = field(default=0, repr=False)

    @classmethod
    def create(cls, k: int, rng: SplitMix64 | None = None) -> PairingState:
        return cls(ReservoirState(k, rng))

    @property
    def k(self) -> int:
        return self.reservoir.capacity

    def offer(self, edge: Edge, sign: int) -> PairingAction:
        res = self.reservoir
        if sign > 0:
            self.inserts_offered += 1
            if self.n_b + self.n_g == 0:
                # plain reservoir step over the live population
                res.seen = self.t
                self.t += 1
                return PairingAction.INSERTED if res.offer(edge) else PairingAction.SKIPPED
            self.t += 1
            if res.rng.random() < self.n_b / (self.n_b + self.n_g):
                res.append(edge)
                self.n_b -= 1
                return PairingAction.INSERTED
            self.n_g -= 1
            return PairingAction.SKIPPED
        if self.t == 0:
            raise StreamIntegrityError(f"deletion of {edge} with no live eligible edges")
        self.deletes_offered += 1
        self.t -= 1
        res.seen = self.t
        if res.remove(edge):
            self.n_b += 1
            return PairingAction.REMOVED
        self.n_g += 1
        return PairingAction.COMPENSATED


def p_fd(state: PairingState) -> float:
    return pairing_pair_probability(state.k, state.t + state.n_g + state.n_b)
