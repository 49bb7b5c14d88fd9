"""Synthetic fixtures: planted SBM graphs and two community-evolution streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .features import FeatureMatrix
from .graph import Snapshot, StaticGraph, TemporalGraphStream


@dataclass
class SynthSpec:
    """Shared knobs for the generators; not every field applies to every scenario."""

    n_per_group: int = 50
    spans: int = 7
    intra_p: float = 0.15
    inter_p: float = 0.01
    scenario: str = "traveling"
    seed: int = 0
    n_blocks: int = 2  # static-sbm only
    separation: float = 3.0  # feature-blob mean distance, in sigma units
    feat_dim: int = 16

    def __post_init__(self):
        if not (0.0 <= self.intra_p <= 1.0 and 0.0 <= self.inter_p <= 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if self.spans < 1:
            raise ValueError("need at least one span")


def _pair_edges(
    labels: np.ndarray, intra_p: float, inter_p: float, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    n = labels.size
    iu, iv = np.triu_indices(n, k=1)
    p = np.where(labels[iu] == labels[iv], intra_p, inter_p)
    keep = rng.random(iu.size) < p
    return iu[keep], iv[keep]


def _span_snapshot(
    span: int, labels: np.ndarray, spec: SynthSpec, rng: np.random.Generator
) -> Snapshot:
    iu, iv = _pair_edges(labels, spec.intra_p, spec.inter_p, rng)
    ts = span + rng.random(iu.size)
    edges = tuple(
        (int(u), int(v), float(t)) for u, v, t in zip(iu, iv, ts)
    )
    return Snapshot(span, edges, t_start=float(span), t_end=float(span + 1))


def gen_traveling(spec: SynthSpec) -> Tuple[TemporalGraphStream, np.ndarray]:
    """Two groups; half of group 0 joins group 1 for spans 3..5, then returns.

    Returns the stream and per-span labels of shape (spans, n).
    """
    if spec.spans < 7:
        raise ValueError("the traveling scenario needs at least 7 spans")
    rng = np.random.default_rng(spec.seed)
    n1 = spec.n_per_group
    n = 2 * n1
    base = np.repeat(np.array([0, 1]), n1)
    travelers = np.arange(n1 // 2)
    moved = base.copy()
    moved[travelers] = 1
    labels = np.empty((spec.spans, n), dtype=np.int64)
    snaps: List[Snapshot] = []
    for span in range(spec.spans):
        lab = moved if 3 <= span <= 5 else base
        labels[span] = lab
        snaps.append(_span_snapshot(span, lab, spec, rng))
    return TemporalGraphStream(n, tuple(snaps)), labels


def gen_reorg(spec: SynthSpec) -> Tuple[TemporalGraphStream, np.ndarray]:
    """Two groups reorganize into three fixed random groups from span 3 on."""
    if spec.spans < 4:
        raise ValueError("the reorganization scenario needs at least 4 spans")
    rng = np.random.default_rng(spec.seed)
    n = 2 * spec.n_per_group
    base = np.repeat(np.array([0, 1]), spec.n_per_group)
    perm = rng.permutation(n)
    reorg = np.empty(n, dtype=np.int64)
    sizes = [(n + 2) // 3, (n + 1) // 3, n // 3]
    start = 0
    for grp, size in enumerate(sizes):
        reorg[perm[start : start + size]] = grp
        start += size
    labels = np.empty((spec.spans, n), dtype=np.int64)
    snaps: List[Snapshot] = []
    for span in range(spec.spans):
        lab = base if span < 3 else reorg
        labels[span] = lab
        snaps.append(_span_snapshot(span, lab, spec, rng))
    return TemporalGraphStream(n, tuple(snaps)), labels


def gen_sbm(spec: SynthSpec) -> Tuple[StaticGraph, np.ndarray, FeatureMatrix]:
    """Planted k-block SBM plus unit-variance Gaussian feature blobs.

    Block feature means are placed so that every pair of means is
    ``separation`` apart.
    """
    rng = np.random.default_rng(spec.seed)
    k = spec.n_blocks
    if spec.feat_dim < k:
        raise ValueError("feat_dim must be at least the number of blocks")
    n = k * spec.n_per_group
    labels = np.repeat(np.arange(k), spec.n_per_group)
    iu, iv = _pair_edges(labels, spec.intra_p, spec.inter_p, rng)
    g = StaticGraph(n, list(zip(iu.tolist(), iv.tolist())))
    means = np.zeros((k, spec.feat_dim))
    for j in range(k):
        means[j, j] = spec.separation / np.sqrt(2.0)
    values = means[labels] + rng.standard_normal((n, spec.feat_dim))
    return g, labels, FeatureMatrix(values, learnable=False)
