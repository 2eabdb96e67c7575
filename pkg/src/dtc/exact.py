"""Ground-truth triangle counts.

``exact_static`` orients every edge from lower to higher (degree, id) rank and
intersects forward neighbourhoods, so each triangle is found exactly once.
``exact_incremental`` replays a signed stream over hash-set adjacency.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .stream_io import CanonicalStream


@dataclass
class ExactCounts:
    global_count: int = 0
    local: dict[int, int] = field(default_factory=dict)
    position: int | None = None

    def local_count(self, node: int) -> int:
        return self.local.get(node, 0)


def exact_static(edges: Iterable[tuple[int, int]]) -> ExactCounts:
    adj: dict[int, set[int]] = defaultdict(set)
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b:
            continue
        adj[a].add(b)
        adj[b].add(a)
    rank = {node: (len(nbrs), node) for node, nbrs in adj.items()}
    forward = {node: {w for w in nbrs if rank[w] > rank[node]} for node, nbrs in adj.items()}
    local: dict[int, int] = {node: 0 for node in adj}
    total = 0
    for a, fa in forward.items():
        for b in fa:
            common = fa & forward[b]
            if not common:
                continue
            n = len(common)
            total += n
            local[a] += n
            local[b] += n
            for c in common:
                local[c] += 1
    return ExactCounts(total, local)


def exact_incremental(stream: CanonicalStream, query_points: Iterable[int] | None = None) -> list[ExactCounts]:
    """Counts after the first ``p`` events for every ``p`` in ``query_points``.

    With no query points only the end-of-stream snapshot is returned.
    """
    n = len(stream)
    points = sorted(set(query_points)) if query_points is not None else [n]
    if points and (points[0] < 0 or points[-1] > n):
        raise ValueError(f"query points must lie in [0, {n}]")
    adj: dict[int, set[int]] = defaultdict(set)
    local: dict[int, int] = defaultdict(int)
    total = 0
    out: list[ExactCounts] = []
    qi = 0

    def emit(pos: int) -> None:
        snap = {node: cnt for node, cnt in local.items() if node in adj and adj[node]}
        out.append(ExactCounts(total, snap, pos))

    while qi < len(points) and points[qi] == 0:
        emit(0)
        qi += 1
    us, vs, ss = stream.u.tolist(), stream.v.tolist(), stream.sign.tolist()
    for i in range(n):
        a, b, s = us[i], vs[i], ss[i]
        na, nb = adj[a], adj[b]
        common = na & nb if len(na) <= len(nb) else nb & na
        k = len(common)
        if s > 0:
            total += k
            local[a] += k
            local[b] += k
            for c in common:
                local[c] += 1
            na.add(b)
            nb.add(a)
        else:
            total -= k
            local[a] -= k
            local[b] -= k
            for c in common:
                local[c] -= 1
            na.discard(b)
            nb.discard(a)
        while qi < len(points) and points[qi] == i + 1:
            emit(i + 1)
            qi += 1
    return out


def brute_force_counts(edges: Iterable[tuple[int, int]]) -> ExactCounts:
    """O(n^3) triple enumeration; only for small test graphs."""
    edge_set = {(min(a, b), max(a, b)) for a, b in edges if a != b}
    nodes = sorted({x for e in edge_set for x in e})
    local = {node: 0 for node in nodes}
    total = 0
    for i, a in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            b = nodes[j]
            if (a, b) not in edge_set:
                continue
            for c in nodes[j + 1:]:
                if (a, c) in edge_set and (b, c) in edge_set:
                    total += 1
                    local[a] += 1
                    local[b] += 1
                    local[c] += 1
    return ExactCounts(total, local)


def local_vector(counts: ExactCounts, nodes: np.ndarray) -> np.ndarray:
    return np.array([counts.local.get(int(x), 0) for x in nodes], dtype=np.float64)
