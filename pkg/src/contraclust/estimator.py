"""scikit-learn style estimators wrapping the static and stream trainers."""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator

from .features import FeatureMatrix
from .graph import MergedGraph, Snapshot, StaticGraph, TemporalGraphStream
from .trainer import StreamEngine, TrainConfig, _train, temporal_config
from .encoder import decayed_propagation, mean_propagation
from .features import svd_init

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(TrainConfig)}


def _as_feature_matrix(
    features: Union[FeatureMatrix, np.ndarray, None]
) -> Optional[FeatureMatrix]:
    if features is None or isinstance(features, FeatureMatrix):
        return features
    return FeatureMatrix(np.asarray(features, dtype=np.float64))


class ContrastiveGraphClustering(BaseEstimator):
    """Joint node-embedding and clustering on a static graph.

    The model alternates k-means refinement at several granularities with
    gradient steps on a weighted sum of feature-, neighbor-, and
    centroid-contrast losses, then reports the primary-level clustering.

    Parameters mirror :class:`contraclust.trainer.TrainConfig`; see there for
    semantics. After ``fit``: ``labels_``, ``membership_`` (row-stochastic),
    ``embedding_``, ``centroids_``, ``loss_curve_``, ``n_epochs_``.
    """

    def __init__(
        self,
        n_clusters=2,
        *,
        cluster_levels=None,
        embedding_dim=200,
        n_layers=1,
        max_epoch=200,
        refine_every=2,
        learning_rate=1e-3,
        weight_decay=1e-4,
        temperature=0.65,
        triangle_weight=0.7,
        n_neg_features=30,
        n_neg_neighbors=10,
        n_neg_centroids=30,
        lambda_features=1.0,
        lambda_homophily=1.0,
        lambda_community=1.0,
        n_init=10,
        membership_temp=1.0,
        tol=1e-6,
        feature_dim=32,
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.cluster_levels = cluster_levels
        self.embedding_dim = embedding_dim
        self.n_layers = n_layers
        self.max_epoch = max_epoch
        self.refine_every = refine_every
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.temperature = temperature
        self.triangle_weight = triangle_weight
        self.n_neg_features = n_neg_features
        self.n_neg_neighbors = n_neg_neighbors
        self.n_neg_centroids = n_neg_centroids
        self.lambda_features = lambda_features
        self.lambda_homophily = lambda_homophily
        self.lambda_community = lambda_community
        self.n_init = n_init
        self.membership_temp = membership_temp
        self.tol = tol
        self.feature_dim = feature_dim
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        kv = {k: v for k, v in self.get_params().items() if k in _CONFIG_FIELDS}
        kv["seed"] = self.random_state
        return TrainConfig(**kv)

    def fit(self, graph: Union[StaticGraph, MergedGraph], features=None):
        """Train on one graph; features default to a learnable SVD initialization."""
        cfg = self._config()
        rng = np.random.default_rng(cfg.seed)
        feats = _as_feature_matrix(features)
        if isinstance(graph, MergedGraph):
            static = graph.static
            prop = decayed_propagation(graph, cfg.decay, cfg.decay_unit)
        else:
            static = graph
            prop = mean_propagation(graph)
        if feats is None:
            feats = svd_init(static, min(cfg.feature_dim, static.n))
        result = _train(prop, static, feats, cfg, rng)
        self.labels_ = result.labels
        self.membership_ = result.membership
        self.embedding_ = result.embedding
        self.centroids_ = result.centroids
        self.loss_curve_ = result.loss_curve
        self.n_epochs_ = result.n_epochs
        self.params_ = result.params
        return self

    def fit_predict(self, graph, features=None) -> np.ndarray:
        return self.fit(graph, features).labels_


class ContrastiveStreamClustering(BaseEstimator):
    """Incremental clustering of a temporal graph stream with change points.

    Each arriving snapshot is first scored against the current stream segment
    (mean cosine drift of frozen-encoder embeddings); past the threshold a new
    segment starts. The merged segment is then re-clustered with warm-started
    parameters, adding a contrast term against the previous span.

    After ``fit`` (or repeated ``partial_fit``): ``records_`` with one entry
    per span, plus ``labels_``, ``memberships_``, ``change_points_``,
    ``segments_``.
    """

    def __init__(
        self,
        n_clusters=2,
        *,
        cluster_levels=None,
        embedding_dim=32,
        n_layers=1,
        max_epoch=50,
        refine_every=2,
        learning_rate=5e-3,
        weight_decay=1e-4,
        temperature=0.65,
        triangle_weight=0.7,
        decay=0.99,
        decay_unit=1.0,
        theta=0.3,
        n_neg_features=30,
        n_neg_neighbors=10,
        n_neg_centroids=30,
        n_neg_temporal=10,
        lambda_features=0.0,
        lambda_homophily=1.0,
        lambda_community=0.2,
        lambda_temporal=0.2,
        n_init=10,
        membership_temp=1.0,
        tol=1e-6,
        feature_dim=32,
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.cluster_levels = cluster_levels
        self.embedding_dim = embedding_dim
        self.n_layers = n_layers
        self.max_epoch = max_epoch
        self.refine_every = refine_every
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.temperature = temperature
        self.triangle_weight = triangle_weight
        self.decay = decay
        self.decay_unit = decay_unit
        self.theta = theta
        self.n_neg_features = n_neg_features
        self.n_neg_neighbors = n_neg_neighbors
        self.n_neg_centroids = n_neg_centroids
        self.n_neg_temporal = n_neg_temporal
        self.lambda_features = lambda_features
        self.lambda_homophily = lambda_homophily
        self.lambda_community = lambda_community
        self.lambda_temporal = lambda_temporal
        self.n_init = n_init
        self.membership_temp = membership_temp
        self.tol = tol
        self.feature_dim = feature_dim
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        kv = {k: v for k, v in self.get_params().items() if k in _CONFIG_FIELDS}
        kv["seed"] = self.random_state
        return TrainConfig(**kv)

    def _engine(self, n: int, features) -> StreamEngine:
        return StreamEngine(n, self._config(), _as_feature_matrix(features))

    def partial_fit(self, snapshot: Snapshot, features=None, n_nodes: Optional[int] = None):
        """Feed one snapshot; the first call fixes the node universe."""
        if not hasattr(self, "engine_"):
            if n_nodes is None:
                raise ValueError("the first partial_fit call needs n_nodes")
            self.engine_ = self._engine(n_nodes, features)
        self.engine_.step(snapshot)
        self._publish()
        return self

    def fit(self, stream: TemporalGraphStream, features=None):
        """Run the full stream from scratch."""
        self.engine_ = self._engine(stream.n, features)
        for snap in stream.snapshots:
            self.engine_.step(snap)
        self._publish()
        return self

    def _publish(self):
        records = self.engine_.records
        self.records_ = records
        self.memberships_ = [r.membership for r in records]
        self.embeddings_ = [r.embedding for r in records]
        self.labels_ = [r.labels for r in records]
        self.change_points_ = [r.span for r in records if r.change_point]
        segments: List[List[int]] = []
        for r in records:
            if r.segment_start:
                segments.append([r.span])
            else:
                segments[-1].append(r.span)
        self.segments_ = segments
        self.drifts_ = [r.drift for r in records]
