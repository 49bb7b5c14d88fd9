"""Exact gradients of the combined contrastive objective, a finite-difference
oracle, and Adam with L2 weight decay.

Only the fixed computation graph of this model is supported: mean-aggregator
encoder -> four InfoNCE terms -> weighted sum. Cluster centroids, membership
argmaxes, previous-span embeddings, and all sample indices are constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .encoder import backward_layers, forward_layers
from .losses import LossParts, LossWeights, _nce_rows


@dataclass
class ParameterSet:
    """Trainable tensors: encoder layers, bilinear critic, optional features."""

    layers: List[np.ndarray]
    critic: np.ndarray
    features: Optional[np.ndarray] = None

    def named(self):
        for i, w in enumerate(self.layers):
            yield f"layer_{i}", w
        yield "critic", self.critic
        if self.features is not None:
            yield "features", self.features

    def copy(self) -> "ParameterSet":
        return ParameterSet(
            [w.copy() for w in self.layers],
            self.critic.copy(),
            None if self.features is None else self.features.copy(),
        )

    def zeros_like(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.named()}


@dataclass
class EpochSamples:
    """Frozen sampling record for one loss evaluation."""

    feature_negatives: Optional[np.ndarray] = None  # (n, r_F) node ids
    homophily_positives: Optional[np.ndarray] = None  # (n,), -1 skips the anchor
    homophily_negatives: Optional[np.ndarray] = None  # (n, r_H) corrupted row ids
    corruption: Optional[np.ndarray] = None  # (n,) permutation behind H~
    community_positives: Optional[List[np.ndarray]] = None  # per level (n,)
    community_negatives: Optional[List[np.ndarray]] = None  # per level (n, r_l)


class ContrastiveObjective:
    """Total loss on a fixed graph with frozen samples and constants.

    value() and gradients() are pure in the parameters, so central finite
    differences of value() are a valid oracle for gradients(). Constants per
    evaluation: cluster centroids and membership argmaxes, all sample indices
    and the corruption permutation, and the previous-span embeddings plus
    their corrupted negatives for the time contrast. The current corrupted
    embeddings H~ are recomputed from the parameters, so gradients flow
    through them.
    """

    def __init__(
        self,
        prop: sp.csr_matrix,
        weights: LossWeights,
        tau: float,
        samples: EpochSamples,
        centroids: Optional[List[np.ndarray]] = None,
        features_const: Optional[np.ndarray] = None,
        prev_embedding: Optional[np.ndarray] = None,
        temporal_negatives: Optional[np.ndarray] = None,  # (r_T, n, d') constants
    ):
        self.prop = prop
        self.prop_t = prop.T.tocsr()
        self.weights = weights
        self.tau = tau
        self.samples = samples
        self.centroids = centroids
        self.features_const = features_const
        self.prev_embedding = prev_embedding
        self.temporal_negatives = temporal_negatives

    # -- helpers

    def _features(self, params: ParameterSet) -> np.ndarray:
        if params.features is not None:
            return params.features
        if self.features_const is None:
            raise ValueError("no feature matrix available")
        return self.features_const

    def _use_homophily(self) -> bool:
        return (
            self.weights.homophily > 0
            and self.samples.homophily_positives is not None
            and self.samples.corruption is not None
        )

    def _use_features_loss(self) -> bool:
        return self.weights.features > 0 and self.samples.feature_negatives is not None

    def _use_community(self) -> bool:
        return (
            self.weights.community > 0
            and self.centroids is not None
            and self.samples.community_positives is not None
        )

    def _use_temporal(self) -> bool:
        return self.weights.temporal > 0 and self.prev_embedding is not None

    # -- forward

    def value(self, params: ParameterSet) -> Tuple[float, LossParts]:
        f = self._features(params)
        h, _ = forward_layers(self.prop, f, params.layers)
        lf = lh = lc = lt = 0.0
        if self._use_features_loss():
            s = h @ params.critic
            neg = self.samples.feature_negatives
            sp_ = (s * f).sum(axis=1) / self.tau
            sn = np.einsum("nd,nrd->nr", s, f[neg]) / self.tau
            lf = float(_nce_rows(sp_, sn).sum())
        if self._use_homophily():
            ht, _ = forward_layers(self.prop, f[self.samples.corruption], params.layers)
            pos = self.samples.homophily_positives
            negs = self.samples.homophily_negatives
            anchors = np.flatnonzero(pos >= 0)
            if anchors.size:
                ha = h[anchors]
                sp_ = (ha * h[pos[anchors]]).sum(axis=1) / self.tau
                sn = np.einsum("ad,ard->ar", ha, ht[negs[anchors]]) / self.tau
                lh = float(_nce_rows(sp_, sn).sum())
        if self._use_community():
            acc = 0.0
            for c, pos, negs in zip(
                self.centroids,
                self.samples.community_positives,
                self.samples.community_negatives,
            ):
                sp_ = (h * c[pos]).sum(axis=1) / self.tau
                sn = np.einsum("nd,nrd->nr", h, c[negs]) / self.tau
                acc += float(_nce_rows(sp_, sn).sum())
            lc = acc / len(self.centroids)
        if self._use_temporal():
            tn = self.temporal_negatives
            if tn is None:
                tn = np.zeros((0,) + h.shape)
            sp_ = (h * self.prev_embedding).sum(axis=1) / self.tau
            sn = np.einsum("nd,rnd->nr", h, tn) / self.tau
            lt = float(_nce_rows(sp_, sn).sum())
        parts = LossParts(lf, lh, lc, lt)
        return total_from_parts(parts, self.weights), parts

    # -- reverse mode

    def gradients(self, params: ParameterSet) -> Dict[str, np.ndarray]:
        total, parts, grads = self.evaluate(params)
        return grads

    def evaluate(
        self, params: ParameterSet
    ) -> Tuple[float, LossParts, Dict[str, np.ndarray]]:
        """Shared forward + backward pass; returns (total, parts, gradients)."""
        f = self._features(params)
        learnable = params.features is not None
        h, cache_h = forward_layers(self.prop, f, params.layers)
        n, d_out = h.shape

        dh = np.zeros_like(h)
        grads = params.zeros_like()
        d_f_direct = np.zeros_like(f) if learnable else None
        lf = lh = lc = lt = 0.0

        if self._use_features_loss():
            w = self.weights.features
            neg = self.samples.feature_negatives
            s = h @ params.critic
            f_neg = f[neg]
            sp_ = (s * f).sum(axis=1) / self.tau
            sn = np.einsum("nd,nrd->nr", s, f_neg) / self.tau
            lf = float(_nce_rows(sp_, sn).sum())
            g = _softmax_minus_onehot(sp_, sn) * (w / self.tau)
            g0, gn = g[:, 0], g[:, 1:]
            ds = g0[:, None] * f + np.einsum("nr,nrd->nd", gn, f_neg)
            dh += ds @ params.critic.T
            grads["critic"] += h.T @ ds
            if learnable:
                d_f_direct += g0[:, None] * s
                np.add.at(d_f_direct, neg, gn[:, :, None] * s[:, None, :])

        ht = None
        cache_ht = None
        dht = None
        if self._use_homophily():
            w = self.weights.homophily
            ht, cache_ht = forward_layers(
                self.prop, f[self.samples.corruption], params.layers
            )
            dht = np.zeros_like(ht)
            pos = self.samples.homophily_positives
            negs = self.samples.homophily_negatives
            anchors = np.flatnonzero(pos >= 0)
            if anchors.size:
                ha = h[anchors]
                pa = pos[anchors]
                na = negs[anchors]
                hp = h[pa]
                hn = ht[na]
                sp_ = (ha * hp).sum(axis=1) / self.tau
                sn = np.einsum("ad,ard->ar", ha, hn) / self.tau
                lh = float(_nce_rows(sp_, sn).sum())
                g = _softmax_minus_onehot(sp_, sn) * (w / self.tau)
                g0, gn = g[:, 0], g[:, 1:]
                da = g0[:, None] * hp + np.einsum("ar,ard->ad", gn, hn)
                np.add.at(dh, anchors, da)
                np.add.at(dh, pa, g0[:, None] * ha)
                np.add.at(dht, na, gn[:, :, None] * ha[:, None, :])

        if self._use_community():
            w = self.weights.community / len(self.centroids)
            acc = 0.0
            for c, pos, negs in zip(
                self.centroids,
                self.samples.community_positives,
                self.samples.community_negatives,
            ):
                cp = c[pos]
                cn = c[negs]
                sp_ = (h * cp).sum(axis=1) / self.tau
                sn = np.einsum("nd,nrd->nr", h, cn) / self.tau
                acc += float(_nce_rows(sp_, sn).sum())
                g = _softmax_minus_onehot(sp_, sn) * (w / self.tau)
                dh += g[:, 0][:, None] * cp + np.einsum("nr,nrd->nd", g[:, 1:], cn)
            lc = acc / len(self.centroids)

        if self._use_temporal():
            w = self.weights.temporal
            tn = self.temporal_negatives
            if tn is None:
                tn = np.zeros((0,) + h.shape)
            sp_ = (h * self.prev_embedding).sum(axis=1) / self.tau
            sn = np.einsum("nd,rnd->nr", h, tn) / self.tau
            lt = float(_nce_rows(sp_, sn).sum())
            g = _softmax_minus_onehot(sp_, sn) * (w / self.tau)
            dh += g[:, 0][:, None] * self.prev_embedding
            dh += np.einsum("nr,rnd->nd", g[:, 1:], tn)

        d_layers, dx = backward_layers(self.prop_t, params.layers, cache_h, dh)
        for i, dw in enumerate(d_layers):
            grads[f"layer_{i}"] += dw
        if learnable:
            grads["features"] += dx + d_f_direct
        if dht is not None:
            d_layers_t, dxt = backward_layers(self.prop_t, params.layers, cache_ht, dht)
            for i, dw in enumerate(d_layers_t):
                grads[f"layer_{i}"] += dw
            if learnable:
                np.add.at(grads["features"], self.samples.corruption, dxt)

        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise RuntimeError(f"non-finite gradient in parameter '{name}'")

        parts = LossParts(lf, lh, lc, lt)
        return total_from_parts(parts, self.weights), parts, grads


def total_from_parts(parts: LossParts, weights: LossWeights) -> float:
    return (
        weights.features * parts.features
        + weights.homophily * parts.homophily
        + weights.community * parts.community
        + weights.temporal * parts.temporal
    )


def _softmax_minus_onehot(pos: np.ndarray, neg: np.ndarray) -> np.ndarray:
    """d(per-anchor InfoNCE)/d(scores), rows [positive | negatives]."""
    scores = np.concatenate([pos[:, None], neg], axis=1)
    m = scores.max(axis=1, keepdims=True)
    e = np.exp(scores - m)
    soft = e / e.sum(axis=1, keepdims=True)
    soft[:, 0] -= 1.0
    return soft


def backward(objective: ContrastiveObjective, params: ParameterSet) -> Dict[str, np.ndarray]:
    """Exact reverse-mode gradients of the objective at the given parameters."""
    return objective.gradients(params)


def finite_diff(
    loss_fn: Callable[[ParameterSet], float],
    params: ParameterSet,
    eps: float = 1e-5,
) -> Dict[str, np.ndarray]:
    """Central differences per scalar parameter; loss_fn must be deterministic."""
    work = params.copy()
    grads = {}
    for name, arr in work.named():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + eps
            f_plus = loss_fn(work)
            arr[idx] = orig - eps
            f_minus = loss_fn(work)
            arr[idx] = orig
            g[idx] = (f_plus - f_minus) / (2.0 * eps)
            it.iternext()
        grads[name] = g
    return grads


# ----------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    """First/second moment accumulators and the step count."""

    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def init(cls, params: ParameterSet) -> "AdamState":
        return cls(m=params.zeros_like(), v=params.zeros_like())

    def copy(self) -> "AdamState":
        return AdamState(
            {k: a.copy() for k, a in self.m.items()},
            {k: a.copy() for k, a in self.v.items()},
            self.step,
        )


def adam_step(
    params: ParameterSet,
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[ParameterSet, AdamState]:
    """One Adam update; weight decay enters as an additive L2 gradient term."""
    new_params = params.copy()
    new_state = state.copy()
    new_state.step += 1
    t = new_state.step
    for name, arr in new_params.named():
        g = grads[name] + weight_decay * arr
        m = new_state.m[name] = beta1 * new_state.m[name] + (1.0 - beta1) * g
        v = new_state.v[name] = beta2 * new_state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        arr -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return new_params, new_state
