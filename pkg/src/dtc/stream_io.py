"""Edge streams: ingestion, validation, fully dynamic synthesis, text I/O.

A stream is held as three parallel numpy arrays (``u < v`` endpoints as
uint64 and a +1/-1 sign per event); the arrival index of an event is its
position in those arrays.
"""

from __future__ import annotations

import gzip
import io
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError, StreamIntegrityError

INSERT = 1
DELETE = -1


@dataclass(frozen=True, slots=True)
class SignedEdge:
    u: int
    v: int
    sign: int = INSERT
    index: int = 0

    def __post_init__(self):
        if self.u == self.v:
            raise StreamIntegrityError(f"self-loop on node {self.u}")
        if self.sign not in (INSERT, DELETE):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.u, self.v)

    @property
    def is_insertion(self) -> bool:
        return self.sign == INSERT


@dataclass(frozen=True)
class IngestReport:
    lines: int
    comments: int
    self_loops: int
    duplicates: int

    @property
    def dropped(self) -> int:
        return self.self_loops + self.duplicates


class CanonicalStream:
    """An ordered, validated sequence of signed undirected edges."""

    __slots__ = ("u", "v", "sign", "_nodes")

    def __init__(self, u, v, sign=None, *, validate: bool = True):
        u = np.asarray(u, dtype=np.uint64).ravel()
        v = np.asarray(v, dtype=np.uint64).ravel()
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        if sign is None:
            sign = np.ones(u.shape, dtype=np.int8)
        sign = np.asarray(sign, dtype=np.int8).ravel()
        if sign.shape != u.shape:
            raise ValueError("sign must have the same length as u and v")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        self.u = lo
        self.v = hi
        self.sign = sign
        self._nodes = None
        for arr in (self.u, self.v, self.sign):
            arr.flags.writeable = False
        if validate:
            validate_events(self.u, self.v, self.sign)

    @classmethod
    def from_edges(cls, edges: Iterable, validate: bool = True) -> CanonicalStream:
        us, vs, ss = [], [], []
        for e in edges:
            if isinstance(e, SignedEdge):
                us.append(e.u)
                vs.append(e.v)
                ss.append(e.sign)
            elif len(e) == 3:
                ss.append(e[0])
                us.append(e[1])
                vs.append(e[2])
            else:
                us.append(e[0])
                vs.append(e[1])
                ss.append(INSERT)
        return cls(np.array(us, dtype=np.uint64), np.array(vs, dtype=np.uint64),
                   np.array(ss, dtype=np.int8), validate=validate)

    def __len__(self) -> int:
        return int(self.u.shape[0])

    def __iter__(self) -> Iterator[SignedEdge]:
        for i, (a, b, s) in enumerate(zip(self.u.tolist(), self.v.tolist(), self.sign.tolist())):
            yield SignedEdge(a, b, s, i)

    def __getitem__(self, i: int) -> SignedEdge:
        if i < 0:
            i += len(self)
        return SignedEdge(int(self.u[i]), int(self.v[i]), int(self.sign[i]), i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanonicalStream):
            return NotImplemented
        return (np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v)
                and np.array_equal(self.sign, other.sign))

    def __repr__(self) -> str:
        return (f"CanonicalStream(events={len(self)}, insertions={self.num_insertions}, "
                f"deletions={self.num_deletions}, nodes={self.num_nodes})")

    @property
    def nodes(self) -> np.ndarray:
        """Sorted unique node ids appearing anywhere in the stream."""
        if self._nodes is None:
            self._nodes = np.unique(np.concatenate([self.u, self.v]))
        return self._nodes

    @property
    def num_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def num_insertions(self) -> int:
        return int(np.count_nonzero(self.sign > 0))

    @property
    def num_deletions(self) -> int:
        return int(np.count_nonzero(self.sign < 0))

    @property
    def num_edges(self) -> int:
        """Edges live at the end of the stream."""
        return self.num_insertions - self.num_deletions

    @property
    def insertion_only(self) -> bool:
        return self.num_deletions == 0

    def prefix(self, n: int) -> CanonicalStream:
        return CanonicalStream(self.u[:n], self.v[:n], self.sign[:n], validate=False)

    def surviving_edges(self, upto: int | None = None) -> set[tuple[int, int]]:
        live: set[tuple[int, int]] = set()
        n = len(self) if upto is None else upto
        for a, b, s in zip(self.u[:n].tolist(), self.v[:n].tolist(), self.sign[:n].tolist()):
            if s > 0:
                live.add((a, b))
            else:
                live.discard((a, b))
        return live


def validate_events(u: np.ndarray, v: np.ndarray, sign: np.ndarray) -> None:
    """Linear scan over the live-edge set; raises on the first violation."""
    loops = np.flatnonzero(u == v)
    if loops.size:
        raise StreamIntegrityError(f"event {int(loops[0])}: self-loop on node {int(u[loops[0]])}")
    if not np.all(np.isin(sign, (INSERT, DELETE))):
        raise StreamIntegrityError("signs must be +1 or -1")
    if np.all(sign > 0):
        keys = np.stack([u, v], axis=1)
        uniq, first = np.unique(keys, axis=0, return_index=True)
        if uniq.shape[0] != keys.shape[0]:
            seen = np.zeros(keys.shape[0], dtype=bool)
            seen[first] = True
            bad = int(np.flatnonzero(~seen)[0])
            raise StreamIntegrityError(
                f"event {bad}: edge ({int(u[bad])}, {int(v[bad])}) inserted while live")
        return
    live: set[tuple[int, int]] = set()
    for i, (a, b, s) in enumerate(zip(u.tolist(), v.tolist(), sign.tolist())):
        if s > 0:
            if (a, b) in live:
                raise StreamIntegrityError(f"event {i}: edge ({a}, {b}) inserted while live")
            live.add((a, b))
        else:
            if (a, b) not in live:
                raise StreamIntegrityError(f"event {i}: deletion of absent edge ({a}, {b})")
            live.remove((a, b))


def _open_text(path: str | Path) -> io.TextIOBase:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def _parse_node(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"non-integer node id {token!r}", lineno) from None
    if value < 0 or value >= 1 << 64:
        raise ParseError(f"node id {value} outside unsigned 64-bit range", lineno)
    return value


def parse_edge_list(source: str | Iterable[str]) -> tuple[CanonicalStream, IngestReport]:
    """Clean a raw whitespace-separated edge list.

    Self-loops are dropped, direction is collapsed and repeated pairs keep only
    their first occurrence. Tokens past the second column are ignored.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    seen: set[tuple[int, int]] = set()
    us: list[int] = []
    vs: list[int] = []
    n_lines = comments = loops = dups = 0
    for lineno, line in enumerate(lines, 1):
        n_lines += 1
        stripped = line.strip()
        if not stripped:
            continue
        if stripped[0] in "#%":
            comments += 1
            continue
        parts = stripped.split()
        if len(parts) < 2:
            raise ParseError("expected two node ids", lineno)
        a = _parse_node(parts[0], lineno)
        b = _parse_node(parts[1], lineno)
        if a == b:
            loops += 1
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
    stream = CanonicalStream(np.array(us, dtype=np.uint64), np.array(vs, dtype=np.uint64),
                             validate=False)
    return stream, IngestReport(n_lines, comments, loops, dups)


def load_edge_list(path: str | Path) -> tuple[CanonicalStream, IngestReport]:
    with _open_text(path) as fh:
        return parse_edge_list(fh)


def synthesize_fully_dynamic(stream: CanonicalStream, delta: float, seed: int = 0) -> CanonicalStream:
    """Delete ``round(delta * m)`` uniformly chosen edges after their insertion.

    Each deletion lands in a gap drawn uniformly from the gaps that follow its
    insertion (up to and including the end of the stream); deletions sharing a
    gap are ordered randomly.
    """
    if not 0.0 <= delta <= 1.0 or math.isnan(delta):
        raise ConfigError(f"delta must lie in [0, 1], got {delta}")
    if not stream.insertion_only:
        raise StreamIntegrityError("synthesis requires an insertion-only stream")
    m = len(stream)
    n_del = int(math.floor(delta * m + 0.5))
    if n_del == 0:
        return stream
    rng = np.random.default_rng(seed)
    victims = np.sort(rng.choice(m, size=n_del, replace=False))
    gaps = rng.integers(victims, m)
    ties = rng.random(n_del)
    # sort key: (gap, kind, tie) where insertions (kind 0) open their gap
    gap_key = np.concatenate([np.arange(m), gaps])
    kind = np.concatenate([np.zeros(m), np.ones(n_del)])
    tie = np.concatenate([np.zeros(m), ties])
    order = np.lexsort((tie, kind, gap_key))
    src = np.concatenate([np.arange(m), victims])[order]
    sign = np.where(kind[order] > 0, DELETE, INSERT).astype(np.int8)
    return CanonicalStream(stream.u[src], stream.v[src], sign, validate=False)


def write_stream(stream: CanonicalStream, path: str | Path) -> None:
    with_sign = not stream.insertion_only
    with open(path, "w", encoding="utf-8") as fh:
        if with_sign:
            for a, b, s in zip(stream.u.tolist(), stream.v.tolist(), stream.sign.tolist()):
                fh.write(f"{'+' if s > 0 else '-'} {a} {b}\n")
        else:
            for a, b in zip(stream.u.tolist(), stream.v.tolist()):
                fh.write(f"{a} {b}\n")


def parse_stream(source: str | Iterable[str]) -> CanonicalStream:
    lines = source.splitlines() if isinstance(source, str) else source
    us: list[int] = []
    vs: list[int] = []
    ss: list[int] = []
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#%":
            continue
        parts = stripped.split()
        if len(parts) == 3:
            tok = parts[0]
            if tok == "+":
                ss.append(INSERT)
            elif tok == "-":
                ss.append(DELETE)
            else:
                raise ParseError(f"malformed sign token {tok!r}", lineno)
            parts = parts[1:]
        elif len(parts) == 2:
            ss.append(INSERT)
        else:
            raise ParseError(f"expected 'SIGN u v' or 'u v', got {stripped!r}", lineno)
        a = _parse_node(parts[0], lineno)
        b = _parse_node(parts[1], lineno)
        us.append(a)
        vs.append(b)
    return CanonicalStream(np.array(us, dtype=np.uint64), np.array(vs, dtype=np.uint64),
                           np.array(ss, dtype=np.int8))


def read_stream(path: str | Path) -> CanonicalStream:
    with _open_text(path) as fh:
        return parse_stream(fh)


def planted_community_graph(num_nodes: int, num_edges: int, *, community_size: int = 12,
                            intra_fraction: float = 0.7, seed: int = 0) -> CanonicalStream:
    """Random simple graph with dense planted communities, in random arrival order.

    A fraction ``intra_fraction`` of draws picks two members of one community,
    the rest pick two arbitrary nodes; duplicates and loops are discarded.
    Serves as a triangle-rich stand-in for social-network datasets.
    """
    if num_nodes < 3 or community_size < 3:
        raise ConfigError("need at least 3 nodes and communities of size >= 3")
    max_edges = num_nodes * (num_nodes - 1) // 2
    if num_edges > max_edges:
        raise ConfigError(f"cannot place {num_edges} edges on {num_nodes} nodes")
    rng = np.random.default_rng(seed)
    n_comm = max(1, num_nodes // community_size)
    keys = np.empty(0, dtype=np.int64)
    while keys.size < num_edges:
        batch = int((num_edges - keys.size) * 1.3) + 64
        intra = rng.random(batch) < intra_fraction
        comm = rng.integers(0, n_comm, batch)
        a = np.where(intra, comm * community_size + rng.integers(0, community_size, batch),
                     rng.integers(0, num_nodes, batch))
        b = np.where(intra, comm * community_size + rng.integers(0, community_size, batch),
                     rng.integers(0, num_nodes, batch))
        a = np.minimum(a, num_nodes - 1)
        b = np.minimum(b, num_nodes - 1)
        ok = a != b
        lo = np.minimum(a, b)[ok]
        hi = np.maximum(a, b)[ok]
        keys = np.concatenate([keys, lo * num_nodes + hi])
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]
    keys = keys[:num_edges]
    return CanonicalStream((keys // num_nodes).astype(np.uint64), (keys % num_nodes).astype(np.uint64),
                           validate=False)
