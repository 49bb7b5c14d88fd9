"""Node feature matrices, row-shuffle corruption, and SVD-based initialization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .graph import MergedGraph, StaticGraph


@dataclass
class FeatureMatrix:
    """Dense per-node features; ``learnable`` marks rows as trainable parameters."""

    values: np.ndarray
    learnable: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def as_array(features: Union[FeatureMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(features, FeatureMatrix):
        return features.values
    return np.asarray(features, dtype=np.float64)


def corrupt(features: FeatureMatrix, rng: np.random.Generator) -> FeatureMatrix:
    """Row-shuffled copy; the multiset of rows is preserved exactly."""
    perm = rng.permutation(features.n)
    return FeatureMatrix(features.values[perm].copy(), learnable=features.learnable)


def row_normalized_adjacency(g: Union[StaticGraph, MergedGraph]) -> np.ndarray:
    """D^-1 A with zero-degree rows left as zero."""
    static = g.static if isinstance(g, MergedGraph) else g
    a = static.adjacency_matrix()
    deg = a.sum(axis=1)
    out = np.zeros_like(a)
    nz = deg > 0
    out[nz] = a[nz] / deg[nz, None]
    return out


def svd_init(g: Union[StaticGraph, MergedGraph], d: int) -> FeatureMatrix:
    """Learnable features from the top-d left singular directions of D^-1 A.

    Columns are U_d scaled by the singular values, ordered by non-increasing
    singular value.
    """
    static = g.static if isinstance(g, MergedGraph) else g
    if d > static.n:
        raise ValueError(f"feature dimension {d} exceeds node count {static.n}")
    norm_adj = row_normalized_adjacency(static)
    u, s, _ = np.linalg.svd(norm_adj, full_matrices=False)
    values = u[:, :d] * s[:d]
    # Zero-degree rows of D^-1 A are zero, but truncated SVD can leave noise
    # of magnitude ~eps there; pin them to exact zeros.
    values[static.degrees() == 0] = 0.0
    return FeatureMatrix(values, learnable=True)
