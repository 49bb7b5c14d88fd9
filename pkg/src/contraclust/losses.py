"""InfoNCE loss terms and their positive/negative sample construction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .graph import StaticGraph, triangle_neighbors


@dataclass(frozen=True)
class LossWeights:
    """Non-negative weights for the four loss terms."""

    features: float = 1.0
    homophily: float = 1.0
    community: float = 1.0
    temporal: float = 0.0

    def __post_init__(self):
        for name in ("features", "homophily", "community", "temporal"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be non-negative")


class LossParts(NamedTuple):
    features: float
    homophily: float
    community: float
    temporal: float


def total_loss(parts: LossParts, weights: LossWeights) -> float:
    return (
        weights.features * parts.features
        + weights.homophily * parts.homophily
        + weights.community * parts.community
        + weights.temporal * parts.temporal
    )


def infonce_term(anchor_score: float, negative_scores: Sequence[float]) -> float:
    """-log softmax of the positive score against the negatives.

    Computed with max-subtraction; 0 when there are no negatives.
    """
    neg = np.asarray(negative_scores, dtype=np.float64)
    scores = np.concatenate([[float(anchor_score)], neg])
    m = scores.max()
    return float(m + np.log(np.exp(scores - m).sum()) - anchor_score)


def _nce_rows(pos_scores: np.ndarray, neg_scores: np.ndarray) -> np.ndarray:
    """Per-anchor InfoNCE values for stacked score rows."""
    scores = np.concatenate([pos_scores[:, None], neg_scores], axis=1)
    m = scores.max(axis=1)
    lse = m + np.log(np.exp(scores - m[:, None]).sum(axis=1))
    return lse - pos_scores


# ----------------------------------------------------------------------------
# sampling


def draw_feature_negatives(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Per anchor, r nodes sampled uniformly with replacement excluding the anchor."""
    if r == 0:
        return np.zeros((n, 0), dtype=np.int64)
    if n < 2:
        raise ValueError("feature negatives need at least two nodes")
    raw = rng.integers(0, n - 1, size=(n, r))
    raw += raw >= np.arange(n)[:, None]
    return raw


def sample_homophily_positive(
    g: StaticGraph, u: int, delta: float, rng: np.random.Generator
) -> int:
    """A neighbor of u, triangle-closing neighbors taking total mass delta.

    Degenerate cases redistribute the full mass: no triangle neighbors ->
    uniform over N(u); all neighbors triangle-closing -> uniform over them.
    """
    nbrs = g.neighbors(u)
    if nbrs.size == 0:
        raise ValueError(f"node {u} is isolated")
    tri = np.array(sorted(triangle_neighbors(g, u)), dtype=np.int64)
    other = np.setdiff1d(nbrs, tri, assume_unique=True)
    if tri.size == 0:
        pool = nbrs
    elif other.size == 0:
        pool = tri
    else:
        pool = tri if rng.random() < delta else other
    return int(pool[rng.integers(pool.size)])


def draw_homophily_samples(
    g: StaticGraph,
    delta: float,
    r: int,
    rng: np.random.Generator,
):
    """Positive neighbor per anchor (-1 for isolated nodes) and negative row ids."""
    n = g.n
    pos = np.full(n, -1, dtype=np.int64)
    for u in range(n):
        if g.degree(u) > 0:
            pos[u] = sample_homophily_positive(g, u, delta, rng)
    negs = rng.integers(0, n, size=(n, r)) if r > 0 else np.zeros((n, 0), dtype=np.int64)
    return pos, negs


def draw_community_negatives(
    positives: np.ndarray, k: int, r: int, rng: np.random.Generator
) -> np.ndarray:
    """r centroids per anchor, uniform without replacement among the other k-1."""
    if k < 2 and r >= 1:
        raise ValueError("community negatives need at least two clusters")
    if r > k - 1:
        warnings.warn(
            f"requested {r} community negatives but only {k - 1} other centroids; clamping",
            stacklevel=2,
        )
        r = k - 1
    n = positives.shape[0]
    if r == 0:
        return np.zeros((n, 0), dtype=np.int64)
    out = np.empty((n, r), dtype=np.int64)
    for u in range(n):
        picked = rng.choice(k - 1, size=r, replace=False)
        picked += picked >= positives[u]
        out[u] = picked
    return out


# ----------------------------------------------------------------------------
# loss values


def loss_features_from_samples(
    h: np.ndarray,
    f: np.ndarray,
    critic: np.ndarray,
    tau: float,
    neg_idx: np.ndarray,
) -> float:
    """Eq.-style bilinear feature contrast with recorded negative indices."""
    s = h @ critic
    pos = (s * f).sum(axis=1) / tau
    neg = np.einsum("nd,nrd->nr", s, f[neg_idx]) / tau
    return float(_nce_rows(pos, neg).sum())


def loss_features(
    h: np.ndarray,
    f: np.ndarray,
    critic: np.ndarray,
    tau: float,
    r: int,
    rng: np.random.Generator,
) -> float:
    if r == 0:
        return 0.0
    neg_idx = draw_feature_negatives(h.shape[0], r, rng)
    return loss_features_from_samples(h, f, critic, tau, neg_idx)


def loss_homophily_from_samples(
    h: np.ndarray,
    h_corrupt: np.ndarray,
    pos: np.ndarray,
    neg_idx: np.ndarray,
    tau: float,
) -> float:
    anchors = np.flatnonzero(pos >= 0)
    if anchors.size == 0:
        return 0.0
    ha = h[anchors]
    sp = (ha * h[pos[anchors]]).sum(axis=1) / tau
    sn = np.einsum("ad,ard->ar", ha, h_corrupt[neg_idx[anchors]]) / tau
    return float(_nce_rows(sp, sn).sum())


def loss_homophily(
    h: np.ndarray,
    h_corrupt: np.ndarray,
    g: StaticGraph,
    delta: float,
    tau: float,
    r: int,
    rng: np.random.Generator,
) -> float:
    pos, negs = draw_homophily_samples(g, delta, r, rng)
    return loss_homophily_from_samples(h, h_corrupt, pos, negs, tau)


def loss_community_from_samples(
    h: np.ndarray,
    centroids: List[np.ndarray],
    positives: List[np.ndarray],
    neg_idx: List[np.ndarray],
    tau: float,
) -> float:
    n_levels = len(centroids)
    acc = 0.0
    for c, pos, negs in zip(centroids, positives, neg_idx):
        sp = (h * c[pos]).sum(axis=1) / tau
        sn = np.einsum("nd,nrd->nr", h, c[negs]) / tau
        acc += float(_nce_rows(sp, sn).sum())
    return acc / n_levels


def loss_community(
    h: np.ndarray,
    clustering,
    tau: float,
    r_per_level: Sequence[int],
    rng: np.random.Generator,
) -> float:
    """Centroid contrast averaged over the clustering levels.

    ``clustering`` is a MultiLevelClustering; the positive per node and level
    is the centroid its membership row points at most strongly.
    """
    centroids = [lvl.centroids for lvl in clustering.levels]
    positives = [np.argmax(lvl.memberships, axis=1) for lvl in clustering.levels]
    negs = [
        draw_community_negatives(pos, lvl.k, r, rng)
        for lvl, pos, r in zip(clustering.levels, positives, r_per_level)
    ]
    return loss_community_from_samples(h, centroids, positives, negs, tau)


def loss_temporal(
    h_cur: np.ndarray,
    h_prev: Optional[np.ndarray],
    corrupt_prev: Optional[np.ndarray],
    tau: float,
) -> float:
    """Contrast against the previous span's embeddings.

    ``corrupt_prev`` stacks the negatives: shape (r, n, d'), one corrupted
    forward pass of the previous segment per negative. None or r = 0 -> 0,
    as is a missing previous span.
    """
    if h_prev is None:
        return 0.0
    if corrupt_prev is None or corrupt_prev.shape[0] == 0:
        corrupt_prev = np.zeros((0,) + h_cur.shape)
    sp = (h_cur * h_prev).sum(axis=1) / tau
    sn = np.einsum("nd,rnd->nr", h_cur, corrupt_prev) / tau
    return float(_nce_rows(sp, sn).sum())
