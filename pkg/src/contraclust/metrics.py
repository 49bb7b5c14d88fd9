"""Clustering metrics with optimal label matching, plus link-prediction scoring."""

from __future__ import annotations

from typing import Dict, List, NamedTuple, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import (
    adjusted_rand_score,
    f1_score,
    normalized_mutual_info_score,
)


class ClusteringScores(NamedTuple):
    acc: float
    nmi: float
    ari: float
    f1: float


class RankScores(NamedTuple):
    auc: float
    ap: float


def match_labels(pred: np.ndarray, truth: np.ndarray) -> Dict[int, int]:
    """Cluster-to-label mapping maximizing total agreement (Hungarian).

    Unmatched clusters (when pred has more clusters than truth has labels)
    map to fresh labels that never occur in truth.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same length")
    clusters, pred_idx = np.unique(pred, return_inverse=True)
    labels, truth_idx = np.unique(truth, return_inverse=True)
    contingency = np.zeros((clusters.size, labels.size), dtype=np.int64)
    np.add.at(contingency, (pred_idx, truth_idx), 1)
    rows, cols = linear_sum_assignment(contingency, maximize=True)
    mapping = {int(clusters[r]): int(labels[c]) for r, c in zip(rows, cols)}
    spare = int(labels.max()) + 1 if labels.size else 0
    for c in clusters:
        if int(c) not in mapping:
            mapping[int(c)] = spare
            spare += 1
    return mapping


def clustering_metrics(pred: np.ndarray, truth: np.ndarray) -> ClusteringScores:
    """ACC (after Hungarian matching), NMI (arithmetic mean), ARI, macro F1."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.size == 0 or pred.shape != truth.shape:
        raise ValueError("pred and truth must be non-empty and equally long")
    mapping = match_labels(pred, truth)
    mapped = np.array([mapping[int(c)] for c in pred])
    acc = float(np.mean(mapped == truth))
    nmi = float(normalized_mutual_info_score(truth, pred, average_method="arithmetic"))
    ari = float(adjusted_rand_score(truth, pred))
    f1 = float(
        f1_score(truth, mapped, labels=np.unique(truth), average="macro", zero_division=0)
    )
    return ClusteringScores(acc, nmi, ari, f1)


def sample_negative_edges(
    pos_edges: Sequence[Tuple[int, int]], n: int, rng: np.random.Generator
) -> List[Tuple[int, int]]:
    """Uniform sample from the complement, matching |pos_edges|, via rejection."""
    pos = {(min(u, v), max(u, v)) for u, v in pos_edges}
    want = len(pos_edges)
    capacity = n * (n - 1) // 2 - len(pos)
    if want > capacity:
        raise ValueError(
            f"cannot sample {want} negative edges; complement holds only {capacity}"
        )
    out: List[Tuple[int, int]] = []
    seen: Set[Tuple[int, int]] = set()
    while len(out) < want:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        key = (min(int(u), int(v)), max(int(u), int(v)))
        if key in pos or key in seen:
            continue
        seen.add(key)
        out.append(key)
    return out


def link_score(phi: np.ndarray, u: int, v: int) -> float:
    """Likelihood proxy for an edge: inner product of membership rows."""
    return float(phi[u] @ phi[v])


def rank_metrics(
    scores_pos: Sequence[float], scores_neg: Sequence[float]
) -> RankScores:
    """AUC by tie-averaged rank counting and AP over grouped score thresholds."""
    pos = np.asarray(scores_pos, dtype=np.float64)
    neg = np.asarray(scores_neg, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")

    pooled = np.concatenate([pos, neg])
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size)
    sorted_scores = pooled[order]
    i = 0
    rank = 1
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (rank + rank + (j - i))
        rank += j - i + 1
        i = j + 1
    rank_sum_pos = ranks[: pos.size].sum()
    auc = (rank_sum_pos - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size)

    labels = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    desc = np.argsort(-pooled, kind="stable")
    s = pooled[desc]
    y = labels[desc]
    ap = 0.0
    tp = fp = 0
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and s[j + 1] == s[i]:
            j += 1
        tp_g = int(y[i : j + 1].sum())
        fp_g = (j - i + 1) - tp_g
        tp += tp_g
        fp += fp_g
        if tp_g:
            precision = tp / (tp + fp)
            ap += precision * (tp_g / pos.size)
        i = j + 1
    return RankScores(float(auc), float(ap))


def combine_rank_metrics(per_span: Sequence[Tuple[float, float, int]]) -> RankScores:
    """Average per-span (auc, ap) weighted by the span's edge-set size."""
    if not per_span:
        raise ValueError("no spans to combine")
    weights = np.array([w for _, _, w in per_span], dtype=np.float64)
    aucs = np.array([a for a, _, _ in per_span])
    aps = np.array([p for _, p, _ in per_span])
    total = weights.sum()
    return RankScores(float((aucs * weights).sum() / total), float((aps * weights).sum() / total))
