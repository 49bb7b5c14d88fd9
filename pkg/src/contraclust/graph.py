"""Immutable graph containers: static graphs, temporal snapshots, streams, merges."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

Edge = Tuple[int, int]
TemporalEdge = Tuple[int, int, float]


def _canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class StaticGraph:
    """Undirected simple graph on nodes 0..n-1 with sorted adjacency lists."""

    def __init__(self, n: int, edges: Iterable[Edge]):
        self.n = int(n)
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) references a node >= n={self.n}")
            canon.add(_canon(u, v))
        self.edges = frozenset(canon)
        neigh: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in canon:
            neigh[u].append(v)
            neigh[v].append(u)
        self._adj = tuple(np.array(sorted(a), dtype=np.int64) for a in neigh)
        self._neigh_sets = tuple(frozenset(a.tolist()) for a in self._adj)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> np.ndarray:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return int(self._adj[u].size)

    def degrees(self) -> np.ndarray:
        return np.array([a.size for a in self._adj], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return _canon(int(u), int(v)) in self.edges

    def nodes_with_edges(self) -> np.ndarray:
        """Nodes that have at least one incident edge, ascending."""
        return np.flatnonzero(self.degrees() > 0)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a


def build_static(n: int, edge_list: Iterable[Edge]) -> StaticGraph:
    """Build a deduplicated, symmetric, self-loop-free graph from node pairs."""
    return StaticGraph(n, edge_list)


def triangle_neighbors(g: StaticGraph, u: int) -> frozenset:
    """Neighbors of u that close at least one triangle with u."""
    nu = g.neighbors(u)
    nu_set = g._neigh_sets[u]
    out = set()
    for v in nu:
        if nu_set & g._neigh_sets[v]:
            out.add(int(v))
    return frozenset(out)


@dataclass(frozen=True)
class Snapshot:
    """Edges observed during one time span. Span indices are 0-based."""

    span_index: int
    edges: Tuple[TemporalEdge, ...]
    t_start: Optional[float] = None
    t_end: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v), float(t)) for u, v, t in self.edges))
        for u, v, t in self.edges:
            if t < 0:
                raise ValueError(f"negative timestamp {t} on edge ({u}, {v})")
            if self.t_start is not None and self.t_end is not None:
                if not (self.t_start <= t < self.t_end):
                    raise ValueError(
                        f"timestamp {t} outside span [{self.t_start}, {self.t_end})"
                    )

    def as_static(self, n: int) -> StaticGraph:
        return StaticGraph(n, [(u, v) for u, v, _ in self.edges])


@dataclass(frozen=True)
class TemporalGraphStream:
    """Ordered, non-overlapping snapshots over a fixed node universe."""

    n: int
    snapshots: Tuple[Snapshot, ...]

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        idx = [s.span_index for s in self.snapshots]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("span indices must be strictly increasing")
        for s in self.snapshots:
            for u, v, _ in s.edges:
                if not (0 <= u < self.n and 0 <= v < self.n):
                    raise ValueError(f"edge ({u}, {v}) references a node >= n={self.n}")

    def span_indices(self) -> List[int]:
        return [s.span_index for s in self.snapshots]

    def snapshot(self, span_index: int) -> Snapshot:
        for s in self.snapshots:
            if s.span_index == span_index:
                return s
        raise KeyError(f"no snapshot with span index {span_index}")


class MergedGraph:
    """Union of snapshots; each surviving edge keeps its most recent timestamp."""

    def __init__(self, n: int, timed_edges: Iterable[TemporalEdge]):
        last: Dict[Edge, float] = {}
        pairs = []
        for u, v, t in timed_edges:
            u, v, t = int(u), int(v), float(t)
            if u == v:
                continue
            key = _canon(u, v)
            if key not in last:
                pairs.append(key)
            last[key] = max(last.get(key, t), t)
        self.static = StaticGraph(n, pairs)
        self.last_time = {k: last[k] for k in self.static.edges}

    @property
    def n(self) -> int:
        return self.static.n

    def edge_time(self, u: int, v: int) -> float:
        return self.last_time[_canon(int(u), int(v))]

    def neighbors(self, u: int) -> np.ndarray:
        return self.static.neighbors(u)

    def degree(self, u: int) -> int:
        return self.static.degree(u)


def merge_snapshots(stream: TemporalGraphStream, i: int, j: int) -> MergedGraph:
    """Merge snapshots with span indices in [i, j] into a single timed graph."""
    if i > j:
        raise ValueError(f"invalid span range [{i}, {j}]")
    labels = set(stream.span_indices())
    if i not in labels or j not in labels:
        raise ValueError(f"span range [{i}, {j}] not covered by the stream")
    timed = []
    for s in stream.snapshots:
        if i <= s.span_index <= j:
            timed.extend(s.edges)
    return MergedGraph(stream.n, timed)


def merge_all(n: int, snapshots: Sequence[Snapshot]) -> MergedGraph:
    """Merge an explicit list of snapshots (a stream segment)."""
    timed = []
    for s in snapshots:
        timed.extend(s.edges)
    return MergedGraph(n, timed)


def latest_interaction(g: MergedGraph, v: int) -> Optional[float]:
    """Most recent timestamp among v's incident edges; None if v is isolated."""
    nv = g.neighbors(v)
    if nv.size == 0:
        return None
    return max(g.edge_time(v, int(u)) for u in nv)
