"""Mean-aggregator GNN encoder with optional time-decayed neighbor weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .features import FeatureMatrix, as_array
from .graph import MergedGraph, StaticGraph, latest_interaction


@dataclass
class EncoderParams:
    """Per-layer weight matrices plus the time-decay factor psi in (0, 1].

    Layer l maps dimension layers[l].shape[1] -> layers[l].shape[0]; the chain
    must be consistent. ``decay_unit`` rescales timestamp gaps before they
    enter the decay exponent (gaps are measured in multiples of it).
    """

    layers: List[np.ndarray]
    decay: float = 1.0
    decay_unit: float = 1.0

    def __post_init__(self):
        self.layers = [np.asarray(w, dtype=np.float64) for w in self.layers]
        if not self.layers:
            raise ValueError("encoder needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if b.shape[1] != a.shape[0]:
                raise ValueError(
                    f"layer shapes do not chain: {a.shape} -> {b.shape}"
                )
        if not (0.0 < self.decay <= 1.0):
            raise ValueError("decay must lie in (0, 1]")
        if self.decay_unit <= 0:
            raise ValueError("decay_unit must be positive")

    @property
    def in_dim(self) -> int:
        return self.layers[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].shape[0]


def init_encoder_params(
    in_dim: int,
    out_dim: int,
    n_layers: int,
    rng: np.random.Generator,
    decay: float = 1.0,
    decay_unit: float = 1.0,
) -> EncoderParams:
    """Uniform init scaled by 1/sqrt(fan_in); hidden widths equal out_dim."""
    dims = [in_dim] + [out_dim] * n_layers
    layers = []
    for d_in, d_out in zip(dims, dims[1:]):
        bound = 1.0 / np.sqrt(d_in)
        layers.append(rng.uniform(-bound, bound, size=(d_out, d_in)))
    return EncoderParams(layers, decay=decay, decay_unit=decay_unit)


def mean_propagation(g: StaticGraph) -> sp.csr_matrix:
    """Row-stochastic matrix averaging each node with its neighbors.

    Row v holds 1/(deg(v)+1) on v itself and on every neighbor, neighbor
    columns in ascending order.
    """
    return _propagation(g, None)


def decayed_propagation(g: MergedGraph, decay: float, decay_unit: float = 1.0) -> sp.csr_matrix:
    """Like mean_propagation but each neighbor u of v is weighted by
    decay ** ((t_v_max - t_uv) / decay_unit). The self entry and the
    denominator deg(v)+1 are unchanged; isolated nodes keep weight 1 on self.
    """

    def weight(v: int, u: int, t_max: float) -> float:
        gap = (t_max - g.edge_time(v, u)) / decay_unit
        return float(decay) ** gap

    return _propagation(g.static, (g, weight))


def _propagation(static: StaticGraph, decayed) -> sp.csr_matrix:
    n = static.n
    indptr = np.zeros(n + 1, dtype=np.int64)
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []
    for v in range(n):
        nbrs = static.neighbors(v)
        denom = float(nbrs.size + 1)
        if decayed is None:
            w = np.ones(nbrs.size)
        else:
            g, weight_fn = decayed
            if nbrs.size == 0:
                w = np.ones(0)
            else:
                t_max = latest_interaction(g, v)
                w = np.array([weight_fn(v, int(u), t_max) for u in nbrs])
        pos = int(np.searchsorted(nbrs, v))
        row_cols = np.insert(nbrs, pos, v)
        row_vals = np.insert(w, pos, 1.0) / denom
        cols.append(row_cols)
        vals.append(row_vals)
        indptr[v + 1] = indptr[v] + row_cols.size
    indices = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.concatenate(vals) if vals else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def forward_layers(
    prop: sp.csr_matrix, x: np.ndarray, layers: List[np.ndarray]
) -> Tuple[np.ndarray, list]:
    """Forward pass returning the embedding and a cache for backprop."""
    if x.shape[1] != layers[0].shape[1]:
        raise ValueError(
            f"feature dim {x.shape[1]} does not match encoder input dim "
            f"{layers[0].shape[1]}"
        )
    cache = []
    h = x
    for w in layers:
        agg = prop @ h
        z = agg @ w.T
        h = np.maximum(z, 0.0)
        cache.append((agg, z))
    return h, cache


def backward_layers(
    prop_t: sp.csr_matrix,
    layers: List[np.ndarray],
    cache: list,
    d_out: np.ndarray,
) -> Tuple[List[np.ndarray], np.ndarray]:
    """Reverse pass; returns per-layer weight gradients and the input gradient.

    The ReLU subgradient at exactly 0 is taken as 0.
    """
    d_layers = [None] * len(layers)
    dh = d_out
    for l in range(len(layers) - 1, -1, -1):
        agg, z = cache[l]
        dz = np.where(z > 0.0, dh, 0.0)
        d_layers[l] = dz.T @ agg
        dagg = dz @ layers[l]
        dh = prop_t @ dagg
    return d_layers, dh


def encode(
    g: StaticGraph,
    features: Union[FeatureMatrix, np.ndarray],
    params: EncoderParams,
) -> np.ndarray:
    """Node embeddings: per layer, ReLU of the weighted mean over v and N(v)."""
    x = as_array(features)
    h, _ = forward_layers(mean_propagation(g), x, params.layers)
    return h


def encode_temporal(
    g: MergedGraph,
    features: Union[FeatureMatrix, np.ndarray],
    params: EncoderParams,
) -> np.ndarray:
    """encode() with neighbor embeddings down-weighted by elapsed time."""
    x = as_array(features)
    prop = decayed_propagation(g, params.decay, params.decay_unit)
    h, _ = forward_layers(prop, x, params.layers)
    return h
