"""Lloyd k-means with k-means++ seeding, soft memberships, level refinement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        (x * x).sum(axis=1)[:, None]
        - 2.0 * x @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            nxt = int(rng.choice(n, p=probs))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _group_means(x: np.ndarray, assign: np.ndarray, k: int) -> np.ndarray:
    onehot = np.zeros((x.shape[0], k))
    onehot[np.arange(x.shape[0]), assign] = 1.0
    counts = onehot.sum(axis=0)
    sums = onehot.T @ x
    return sums / counts[:, None]


def _fix_empty(assign: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    """Re-seed each empty cluster at the point farthest from its own centroid."""
    counts = np.bincount(assign, minlength=k)
    if np.all(counts > 0):
        return assign
    assign = assign.copy()
    own = d2[np.arange(assign.size), assign].copy()
    for j in np.flatnonzero(counts == 0):
        cand = int(np.argmax(own))
        assign[cand] = j
        own[cand] = -1.0
    return assign


def kmeans(
    x: np.ndarray,
    k: int,
    rng: np.random.Generator,
    restarts: int = 10,
    max_iter: int = 100,
) -> Tuple[np.ndarray, np.ndarray]:
    """Best-SSE Lloyd run over restarts.

    Returns (centroids, hard assignments); at termination every centroid is
    the mean of the points assigned to it. Ties between restarts keep the
    earliest restart.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if k < 1:
        raise ValueError("k must be at least 1")
    best: Tuple[float, np.ndarray, np.ndarray] | None = None
    for _ in range(max(1, restarts)):
        centroids = _kmeanspp(x, k, rng)
        prev = None
        for _ in range(max_iter):
            d2 = _sq_dists(x, centroids)
            assign = _fix_empty(np.argmin(d2, axis=1), d2, k)
            centroids = _group_means(x, assign, k)
            if prev is not None and np.array_equal(assign, prev):
                break
            prev = assign
        sse = float(((x - centroids[assign]) ** 2).sum())
        if best is None or sse < best[0]:
            best = (sse, centroids, assign)
    return best[1], best[2]


def soft_membership(
    x: np.ndarray, centroids: np.ndarray, tau_m: float = 1.0
) -> np.ndarray:
    """Row-stochastic softmax over negative squared distances to centroids."""
    if centroids.shape[0] == 0:
        raise ValueError("need at least one centroid")
    if tau_m <= 0:
        raise ValueError("softness must be positive")
    diff = x[:, None, :] - centroids[None, :, :]
    logits = -(diff * diff).sum(axis=2) / tau_m
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class ClusterLevel:
    """One clustering granularity: centroids plus stochastic memberships."""

    k: int
    centroids: np.ndarray
    memberships: np.ndarray
    assignments: np.ndarray


@dataclass
class MultiLevelClustering:
    levels: List[ClusterLevel]

    @property
    def primary(self) -> ClusterLevel:
        return self.levels[0]


def refine_levels(
    x: np.ndarray,
    ks: Sequence[int],
    rng: np.random.Generator,
    restarts: int = 10,
    tau_m: float = 1.0,
) -> MultiLevelClustering:
    """Independent k-means per level; memberships from soft_membership."""
    if max(ks) > x.shape[0]:
        raise ValueError(f"largest level {max(ks)} exceeds n={x.shape[0]}")
    levels = []
    for k in ks:
        centroids, assign = kmeans(x, k, rng, restarts=restarts)
        phi = soft_membership(x, centroids, tau_m)
        levels.append(ClusterLevel(k, centroids, phi, assign))
    return MultiLevelClustering(levels)
