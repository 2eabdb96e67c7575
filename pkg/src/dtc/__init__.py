"""Distributed streaming triangle counting on a simulated master/workers/aggregator cluster."""

from .aggregation import Aggregator, CountSnapshot
from .core_sampling import AdaptivePool, EdgeLocation, PairingState, ReservoirState, SplitMix64, p_ar, p_fd
from .exact import ExactCounts, exact_incremental, exact_static
from .harness import Cluster, ClusterConfig, RunResult, run_stream, sweep
from .metrics import RunReport, evaluate, global_variance, mean_global_error, mean_local_error, pearson
from .routing import Partitioner
from .stream_io import (
    CanonicalStream,
    SignedEdge,
    parse_edge_list,
    read_stream,
    synthesize_fully_dynamic,
    write_stream,
)

__version__ = "0.1.0"
