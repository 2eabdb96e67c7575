"""Accuracy metrics over repeated runs."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("algo", "W", "k", "R", "delta", "seed_base", "runs", "global_error",
               "global_variance", "local_error", "pearson", "wall_ms")


def mean_global_error(exact: float, estimates: Sequence[float]) -> float:
    est = np.asarray(estimates, dtype=np.float64)
    if est.size == 0:
        raise ValueError("need at least one run")
    return float(np.mean(np.abs(exact - est)) / (exact + 1))


def global_variance(exact: float, estimates: Sequence[float]) -> float:
    est = np.asarray(estimates, dtype=np.float64)
    if est.size == 0:
        raise ValueError("need at least one run")
    return float(np.mean((exact - est) ** 2))


def mean_local_error(exact_locals: np.ndarray, estimated_locals: Sequence[np.ndarray]) -> float:
    """``estimated_locals`` holds one vector per run, aligned with ``exact_locals``."""
    if len(estimated_locals) == 0:
        raise ValueError("need at least one run")
    x = np.asarray(exact_locals, dtype=np.float64)
    runs = np.atleast_2d(np.asarray(estimated_locals, dtype=np.float64))
    if x.size == 0:
        return 0.0
    per_run = np.mean(np.abs(x - runs) / (x + 1), axis=1)
    return float(np.mean(per_run))


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Population Pearson coefficient; ``None`` when either vector is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("vectors must be aligned")
    dx = x - x.mean() if x.size else x
    dy = y - y.mean() if y.size else y
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if x.size < 2 or sxx == 0.0 or syy == 0.0:
        return None
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def mean_pearson(exact_locals: np.ndarray, estimated_locals: Sequence[np.ndarray]) -> float | None:
    vals = [r for r in (pearson(exact_locals, est) for est in estimated_locals) if r is not None]
    return float(np.mean(vals)) if vals else None


@dataclass
class RunReport:
    n: int
    exact_global: int
    mean_global_error: float
    global_variance: float
    mean_local_error: float
    mean_pearson: float | None
    estimates: list[float] = field(default_factory=list)
    config: object = None
    base_seed: int = 0
    delta: float | None = None
    wall_time: float | None = None

    @property
    def mean_estimate(self) -> float:
        return float(np.mean(self.estimates))

    @property
    def standard_error(self) -> float:
        if self.n < 2:
            return float("nan")
        return float(np.std(self.estimates, ddof=1) / np.sqrt(self.n))

    def csv_row(self, with_timing: bool = False) -> dict:
        cfg = self.config
        return {
            "algo": cfg.algorithm if cfg else "",
            "W": cfg.workers if cfg else "",
            "k": cfg.k if cfg else "",
            "R": cfg.ratio_threshold if cfg and cfg.algorithm == "ar" else "",
            "delta": "" if self.delta is None else self.delta,
            "seed_base": self.base_seed,
            "runs": self.n,
            "global_error": repr(self.mean_global_error),
            "global_variance": repr(self.global_variance),
            "local_error": repr(self.mean_local_error),
            "pearson": "" if self.mean_pearson is None else repr(self.mean_pearson),
            "wall_ms": f"{self.wall_time * 1000:.1f}" if with_timing and self.wall_time is not None else "",
        }


def evaluate(exact, snapshots, *, config=None, base_seed: int = 0, delta: float | None = None,
             wall_time: float | None = None) -> RunReport:
    """Score run snapshots against :class:`dtc.exact.ExactCounts`.

    The local metrics range over every node of the exact graph; a node missing
    from a run's estimates counts as 0.
    """
    nodes = np.array(sorted(exact.local), dtype=np.uint64)
    x_u = np.array([exact.local[int(u)] for u in nodes.tolist()], dtype=np.float64)
    est = [s.global_estimate for s in snapshots]
    loc = [s.local_vector(nodes) for s in snapshots]
    x = exact.global_count
    return RunReport(
        n=len(est),
        exact_global=x,
        mean_global_error=mean_global_error(x, est),
        global_variance=global_variance(x, est),
        mean_local_error=mean_local_error(x_u, loc),
        mean_pearson=mean_pearson(x_u, loc),
        estimates=est,
        config=config,
        base_seed=base_seed,
        delta=delta,
        wall_time=wall_time,
    )
