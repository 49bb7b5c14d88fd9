"""Training loops: static clustering, stream segmentation, temporal tracking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .autograd import (
    AdamState,
    ContrastiveObjective,
    EpochSamples,
    ParameterSet,
    adam_step,
)
from .clustering import MultiLevelClustering, kmeans, refine_levels, soft_membership
from .encoder import (
    EncoderParams,
    decayed_propagation,
    encode_temporal,
    forward_layers,
    init_encoder_params,
    mean_propagation,
)
from .features import FeatureMatrix, svd_init
from .graph import (
    MergedGraph,
    Snapshot,
    StaticGraph,
    TemporalGraphStream,
    merge_all,
)
from .losses import LossWeights, draw_community_negatives, draw_feature_negatives, draw_homophily_samples

CONVERGENCE_WINDOW = 10


@dataclass
class TrainConfig:
    """All training knobs; defaults follow the static-graph profile."""

    n_clusters: int = 2
    cluster_levels: Optional[Tuple[int, ...]] = None  # default: (k, 5k, 25k) capped at n
    embedding_dim: int = 200
    n_layers: int = 1
    max_epoch: int = 200
    refine_every: int = 2
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    temperature: float = 0.65
    triangle_weight: float = 0.7
    decay: float = 0.99
    decay_unit: float = 1.0
    theta: float = 0.3
    n_neg_features: int = 30
    n_neg_neighbors: int = 10
    n_neg_centroids: int = 30
    n_neg_temporal: int = 10
    lambda_features: float = 1.0
    lambda_homophily: float = 1.0
    lambda_community: float = 1.0
    lambda_temporal: float = 0.0
    n_init: int = 10
    membership_temp: float = 1.0
    tol: float = 1e-6
    feature_dim: int = 32
    seed: Optional[int] = None

    def __post_init__(self):
        if self.refine_every < 1:
            raise ValueError("refine_every must be at least 1")
        if self.max_epoch < 1:
            raise ValueError("max_epoch must be at least 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if not (0.0 < self.decay <= 1.0):
            raise ValueError("decay must lie in (0, 1]")

    def weights(self) -> LossWeights:
        return LossWeights(
            features=self.lambda_features,
            homophily=self.lambda_homophily,
            community=self.lambda_community,
            temporal=self.lambda_temporal,
        )

    def levels_for(self, n: int) -> Tuple[int, ...]:
        if self.cluster_levels is not None:
            ks = tuple(int(k) for k in self.cluster_levels)
            if max(ks) > n:
                raise ValueError(f"cluster level {max(ks)} exceeds n={n}")
            return ks
        k = self.n_clusters
        raw = [k, 5 * k, 25 * k]
        capped = []
        for v in raw:
            v = min(v, n)
            if v not in capped:
                capped.append(v)
        return tuple(capped)


def temporal_config(**overrides) -> TrainConfig:
    """Defaults for temporal streams: smaller embeddings, homophily-led weights."""
    base = dict(
        embedding_dim=32,
        learning_rate=5e-3,
        max_epoch=50,
        lambda_features=0.0,
        lambda_homophily=1.0,
        lambda_community=0.2,
        lambda_temporal=0.2,
    )
    base.update(overrides)
    return TrainConfig(**base)


@dataclass
class TrainResult:
    membership: np.ndarray
    embedding: np.ndarray
    centroids: np.ndarray
    labels: np.ndarray
    loss_curve: List[float]
    n_epochs: int
    params: ParameterSet
    adam: AdamState
    features_learnable: bool


@dataclass
class TemporalContext:
    """Frozen history feeding the time-contrast term of the next span."""

    prop: sp.csr_matrix
    params: ParameterSet
    features: Optional[np.ndarray]  # None when features live in params
    embedding: np.ndarray


def _init_params(
    feat_dim: int, cfg: TrainConfig, rng: np.random.Generator, learnable_features: Optional[np.ndarray]
) -> ParameterSet:
    enc = init_encoder_params(feat_dim, cfg.embedding_dim, cfg.n_layers, rng)
    bound = 1.0 / np.sqrt(feat_dim)
    critic = rng.uniform(-bound, bound, size=(cfg.embedding_dim, feat_dim))
    return ParameterSet(enc.layers, critic, learnable_features)


def _temporal_negatives(
    ctx: TemporalContext, r: int, rng: np.random.Generator
) -> Optional[np.ndarray]:
    """One corrupted forward pass of the previous segment per negative."""
    if r == 0:
        return None
    feats = ctx.params.features if ctx.params.features is not None else ctx.features
    outs = []
    for _ in range(r):
        perm = rng.permutation(feats.shape[0])
        h, _ = forward_layers(ctx.prop, feats[perm], ctx.params.layers)
        outs.append(h)
    return np.stack(outs)


def _train(
    prop: sp.csr_matrix,
    static: StaticGraph,
    features: FeatureMatrix,
    cfg: TrainConfig,
    rng: np.random.Generator,
    params: Optional[ParameterSet] = None,
    adam: Optional[AdamState] = None,
    temporal_ctx: Optional[TemporalContext] = None,
) -> TrainResult:
    n = static.n
    ks = cfg.levels_for(n)
    learnable = features.learnable
    if params is None:
        params = _init_params(
            features.dim, cfg, rng, features.values.copy() if learnable else None
        )
    if adam is None:
        adam = AdamState.init(params)
    feats_const = None if learnable else features.values
    weights = cfg.weights()

    use_temporal = weights.temporal > 0 and temporal_ctx is not None
    losses: List[float] = []
    clustering: Optional[MultiLevelClustering] = None
    epochs_run = 0

    for epoch in range(cfg.max_epoch):
        f_now = params.features if learnable else feats_const
        h, _ = forward_layers(prop, f_now, params.layers)
        if epoch % cfg.refine_every == 0:
            clustering = refine_levels(
                h, ks, rng, restarts=cfg.n_init, tau_m=cfg.membership_temp
            )

        samples = EpochSamples()
        if weights.features > 0 and cfg.n_neg_features > 0:
            samples.feature_negatives = draw_feature_negatives(
                n, cfg.n_neg_features, rng
            )
        if weights.homophily > 0:
            pos, negs = draw_homophily_samples(
                static, cfg.triangle_weight, cfg.n_neg_neighbors, rng
            )
            samples.homophily_positives = pos
            samples.homophily_negatives = negs
            samples.corruption = rng.permutation(n)
        centroids = None
        if weights.community > 0:
            centroids = [lvl.centroids for lvl in clustering.levels]
            samples.community_positives = [
                np.argmax(lvl.memberships, axis=1) for lvl in clustering.levels
            ]
            samples.community_negatives = [
                draw_community_negatives(pos, lvl.k, cfg.n_neg_centroids, rng)
                for lvl, pos in zip(clustering.levels, samples.community_positives)
            ]
        temporal_negs = None
        prev_embedding = None
        if use_temporal:
            prev_embedding = temporal_ctx.embedding
            temporal_negs = _temporal_negatives(temporal_ctx, cfg.n_neg_temporal, rng)

        objective = ContrastiveObjective(
            prop,
            weights,
            cfg.temperature,
            samples,
            centroids=centroids,
            features_const=feats_const,
            prev_embedding=prev_embedding,
            temporal_negatives=temporal_negs,
        )
        total, _, grads = objective.evaluate(params)
        if not np.isfinite(total):
            raise RuntimeError(f"non-finite loss at epoch {epoch}")
        params, adam = adam_step(
            params, grads, adam, lr=cfg.learning_rate, weight_decay=cfg.weight_decay
        )
        losses.append(total)
        epochs_run = epoch + 1
        if epoch >= CONVERGENCE_WINDOW:
            ref = losses[epoch - CONVERGENCE_WINDOW]
            if abs(losses[epoch] - ref) / max(abs(ref), 1e-12) < cfg.tol:
                break

    f_now = params.features if learnable else feats_const
    h, _ = forward_layers(prop, f_now, params.layers)
    centroids, assign = kmeans(h, cfg.n_clusters, rng, restarts=cfg.n_init)
    phi = soft_membership(h, centroids, cfg.membership_temp)
    return TrainResult(
        membership=phi,
        embedding=h,
        centroids=centroids,
        labels=assign,
        loss_curve=losses,
        n_epochs=epochs_run,
        params=params,
        adam=adam,
        features_learnable=learnable,
    )


def contrastive_graph_clustering(
    g: Union[StaticGraph, MergedGraph],
    features: Optional[FeatureMatrix],
    cfg: TrainConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Alternating refinement/contrast loop; returns (membership, H, centroids).

    A MergedGraph input selects the time-decayed encoder. Missing features are
    initialized from the graph's SVD and treated as learnable.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if isinstance(g, MergedGraph):
        static = g.static
        prop = decayed_propagation(g, cfg.decay, cfg.decay_unit)
    else:
        static = g
        prop = mean_propagation(g)
    if features is None:
        features = svd_init(static, min(cfg.feature_dim, static.n))
    result = _train(prop, static, features, cfg, rng)
    return result.membership, result.embedding, result.centroids


# ----------------------------------------------------------------------------
# stream segmentation


def drift_distance(
    h_seg: np.ndarray, h_new: np.ndarray, shared: np.ndarray
) -> float:
    """Mean cosine distance between paired rows over the shared nodes.

    Rows with zero norm on either side count as maximally distant (1.0).
    """
    shared = np.asarray(shared, dtype=np.int64)
    if shared.size == 0:
        raise ValueError("no shared nodes")
    a = h_seg[shared]
    b = h_new[shared]
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na > 0) & (nb > 0)
    cos = np.ones(shared.size)
    cos[ok] = (a[ok] * b[ok]).sum(axis=1) / (na[ok] * nb[ok])
    dist = np.where(ok, 1.0 - cos, 1.0)
    return float(dist.mean())


@dataclass
class SegmentState:
    """Current stream segment plus the frozen encoder used for drift scoring."""

    n: int
    snapshots: List[Snapshot] = field(default_factory=list)
    encoder: Optional[EncoderParams] = None

    @property
    def spans(self) -> List[int]:
        return [s.span_index for s in self.snapshots]


def segment_step(
    state: SegmentState,
    snapshot: Snapshot,
    features: Union[FeatureMatrix, np.ndarray],
    theta: float,
) -> Tuple[SegmentState, bool]:
    """Extend the segment or start a new one; the flag marks a fresh segment.

    An empty incoming segment always starts fresh (stream start). Otherwise
    both the merged segment and the lone new snapshot are encoded with the
    frozen parameters in ``state`` and compared over the nodes active in both;
    an empty overlap also starts a new segment.
    """
    if not state.snapshots:
        return SegmentState(state.n, [snapshot], state.encoder), True
    if state.encoder is None:
        raise ValueError("a non-empty segment needs trained encoder parameters")
    seg_graph = merge_all(state.n, state.snapshots)
    new_graph = MergedGraph(state.n, snapshot.edges)
    h_seg = encode_temporal(seg_graph, features, state.encoder)
    h_new = encode_temporal(new_graph, features, state.encoder)
    shared = np.intersect1d(
        seg_graph.static.nodes_with_edges(), new_graph.static.nodes_with_edges()
    )
    if shared.size == 0 or drift_distance(h_seg, h_new, shared) > theta:
        return SegmentState(state.n, [snapshot], state.encoder), True
    return (
        SegmentState(state.n, state.snapshots + [snapshot], state.encoder),
        False,
    )


# ----------------------------------------------------------------------------
# the incremental stream loop


@dataclass
class SpanRecord:
    span: int
    segment_id: int
    segment_start: bool
    change_point: bool
    drift: Optional[float]
    loss_curve: List[float]
    membership: np.ndarray
    embedding: np.ndarray
    labels: np.ndarray
    segment_spans: List[int]


class StreamEngine:
    """Per-snapshot pipeline: segmentation, merge, warm-started training."""

    def __init__(self, n: int, cfg: TrainConfig, features: Optional[FeatureMatrix] = None):
        self.n = n
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.features = features
        self.params: Optional[ParameterSet] = None
        self.adam: Optional[AdamState] = None
        self.segment: List[Snapshot] = []
        self.segment_id = -1
        self.history: Optional[TemporalContext] = None
        self.records: List[SpanRecord] = []

    def _ensure_features(self, first_snapshot: Snapshot):
        if self.features is None:
            merged = MergedGraph(self.n, first_snapshot.edges)
            self.features = svd_init(
                merged.static, min(self.cfg.feature_dim, self.n)
            )

    def _encoder_view(self) -> EncoderParams:
        return EncoderParams(
            [w.copy() for w in self.params.layers],
            decay=self.cfg.decay,
            decay_unit=self.cfg.decay_unit,
        )

    def _drift_features(self) -> np.ndarray:
        if self.params is not None and self.params.features is not None:
            return self.params.features
        return self.features.values

    def step(self, snapshot: Snapshot) -> SpanRecord:
        cfg = self.cfg
        self._ensure_features(snapshot)
        first_ever = self.params is None

        drift = None
        if first_ever or not self.segment:
            started = True
        else:
            state = SegmentState(self.n, self.segment, self._encoder_view())
            seg_graph = merge_all(self.n, self.segment)
            new_graph = MergedGraph(self.n, snapshot.edges)
            h_seg = encode_temporal(seg_graph, self._drift_features(), state.encoder)
            h_new = encode_temporal(new_graph, self._drift_features(), state.encoder)
            shared = np.intersect1d(
                seg_graph.static.nodes_with_edges(),
                new_graph.static.nodes_with_edges(),
            )
            if shared.size == 0:
                started = True
            else:
                drift = drift_distance(h_seg, h_new, shared)
                started = drift > cfg.theta

        if started:
            self.segment = [snapshot]
            self.segment_id += 1
            self.history = None  # time-contrast anchors reset at boundaries
        else:
            self.segment.append(snapshot)

        merged = merge_all(self.n, self.segment)
        prop = decayed_propagation(merged, cfg.decay, cfg.decay_unit)
        if started:
            # A change point marks a break in the data distribution: the new
            # segment gets a fresh model (features re-derived from its first
            # snapshot when they are graph-initialized). Within a segment
            # training stays incremental (warm start span over span).
            if self.features.learnable:
                self.features = svd_init(
                    merged.static, min(self.cfg.feature_dim, self.n)
                )
            self.params = _init_params(
                self.features.dim,
                cfg,
                self.rng,
                self.features.values.copy() if self.features.learnable else None,
            )
            self.adam = AdamState.init(self.params)

        result = _train(
            prop,
            merged.static,
            self.features,
            cfg,
            self.rng,
            params=self.params,
            adam=self.adam,
            temporal_ctx=self.history,
        )
        self.params = result.params
        self.adam = result.adam
        if self.features.learnable and self.params.features is not None:
            self.features = FeatureMatrix(self.params.features.copy(), learnable=True)
        self.history = TemporalContext(
            prop=prop,
            params=self.params.copy(),
            features=None if self.features.learnable else self.features.values,
            embedding=result.embedding.copy(),
        )

        record = SpanRecord(
            span=snapshot.span_index,
            segment_id=self.segment_id,
            segment_start=started,
            change_point=started and not first_ever,
            drift=drift,
            loss_curve=result.loss_curve,
            membership=result.membership,
            embedding=result.embedding,
            labels=result.labels,
            segment_spans=[s.span_index for s in self.segment],
        )
        self.records.append(record)
        return record


def run_stream(
    stream: TemporalGraphStream,
    features: Optional[FeatureMatrix],
    cfg: TrainConfig,
) -> List[SpanRecord]:
    """Process every snapshot of the stream in order (segmentation + training)."""
    engine = StreamEngine(stream.n, cfg, features)
    for snap in stream.snapshots:
        engine.step(snap)
    return engine.records
