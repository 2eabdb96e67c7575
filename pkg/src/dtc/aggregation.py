"""Aggregator: sums worker deltas into cluster-wide estimates."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import DTCError


class DuplicateDeltaError(DTCError):
    pass


@dataclass(frozen=True)
class CountSnapshot:
    position: int
    global_estimate: float
    nodes: np.ndarray
    local_values: np.ndarray

    def local(self, node: int) -> float:
        i = np.searchsorted(self.nodes, np.uint64(node))
        if i < self.nodes.shape[0] and self.nodes[i] == node:
            return float(self.local_values[i])
        return 0.0

    @property
    def local_estimates(self) -> dict[int, float]:
        """Touched nodes only (nonzero estimate)."""
        nz = np.flatnonzero(self.local_values)
        return dict(zip(self.nodes[nz].tolist(), self.local_values[nz].tolist()))

    def local_vector(self, nodes: np.ndarray) -> np.ndarray:
        """Estimates aligned to ``nodes``; unknown nodes read as 0."""
        nodes = np.asarray(nodes, dtype=np.uint64)
        out = np.zeros(nodes.shape[0], dtype=np.float64)
        if self.nodes.shape[0] == 0 or nodes.shape[0] == 0:
            return out
        idx = np.searchsorted(self.nodes, nodes)
        idx = np.minimum(idx, self.nodes.shape[0] - 1)
        hit = self.nodes[idx] == nodes
        out[hit] = self.local_values[idx[hit]]
        return out

    def local_sum_check(self) -> float:
        """|A - sum(A_u)/3|, zero up to rounding."""
        return abs(self.global_estimate - float(self.local_values.sum()) / 3.0)


class Aggregator:
    """Accumulates ``(worker, sequence)``-tagged deltas.

    ``nodes`` fixes the sorted node universe when known up front (dense deltas
    are then plain array adds); otherwise nodes are registered as they appear
    in mapping deltas.
    """

    def __init__(self, nodes: np.ndarray | None = None):
        self.global_estimate = 0.0
        self._seen: set[tuple[int, int]] = set()
        if nodes is None:
            self._fixed = False
            self._nodes: list[int] = []
            self._index: dict[int, int] = {}
            self._values = np.zeros(16, dtype=np.float64)
        else:
            self._fixed = True
            self._nodes = np.asarray(nodes, dtype=np.uint64)
            self._values = np.zeros(self._nodes.shape[0], dtype=np.float64)

    def _slot(self, node: int) -> int:
        if self._fixed:
            i = int(np.searchsorted(self._nodes, np.uint64(node)))
            if i >= self._nodes.shape[0] or int(self._nodes[i]) != node:
                raise KeyError(f"node {node} is not part of this aggregator")
            return i
        i = self._index.get(node)
        if i is None:
            i = len(self._nodes)
            self._index[node] = i
            self._nodes.append(node)
            if i >= self._values.shape[0]:
                self._values = np.concatenate([self._values, np.zeros_like(self._values)])
        return i

    def accumulate(self, worker_id: int, seq: int, global_delta: float,
                   local_delta: Mapping[int, float] | np.ndarray | None = None) -> None:
        tag = (worker_id, seq)
        if tag in self._seen:
            raise DuplicateDeltaError(f"delta {tag} already accumulated")
        self._seen.add(tag)
        self.global_estimate += global_delta
        if local_delta is None:
            return
        if isinstance(local_delta, np.ndarray):
            if not self._fixed or local_delta.shape != self._values.shape:
                raise ValueError("dense deltas need a fixed node universe of matching size")
            self._values += local_delta
            return
        for node, val in local_delta.items():
            self._values[self._slot(int(node))] += val

    def snapshot(self, position: int) -> CountSnapshot:
        if self._fixed:
            return CountSnapshot(position, self.global_estimate, self._nodes, self._values.copy())
        n = len(self._nodes)
        nodes = np.array(self._nodes, dtype=np.uint64)
        order = np.argsort(nodes, kind="stable")
        return CountSnapshot(position, self.global_estimate, nodes[order], self._values[:n][order].copy())
