"""Contrastive graph clustering with temporal community tracking."""

from .graph import (
    MergedGraph,
    Snapshot,
    StaticGraph,
    TemporalGraphStream,
    build_static,
    latest_interaction,
    merge_all,
    merge_snapshots,
    triangle_neighbors,
)
from .features import FeatureMatrix, corrupt, svd_init
from .encoder import EncoderParams, encode, encode_temporal, init_encoder_params
from .losses import (
    LossParts,
    LossWeights,
    infonce_term,
    loss_community,
    loss_features,
    loss_homophily,
    loss_temporal,
    sample_homophily_positive,
    total_loss,
)
from .autograd import (
    AdamState,
    ContrastiveObjective,
    EpochSamples,
    ParameterSet,
    adam_step,
    backward,
    finite_diff,
)
from .clustering import (
    ClusterLevel,
    MultiLevelClustering,
    kmeans,
    refine_levels,
    soft_membership,
)
from .trainer import (
    SegmentState,
    SpanRecord,
    StreamEngine,
    TrainConfig,
    contrastive_graph_clustering,
    drift_distance,
    run_stream,
    segment_step,
    temporal_config,
)
from .metrics import (
    ClusteringScores,
    RankScores,
    clustering_metrics,
    combine_rank_metrics,
    link_score,
    match_labels,
    rank_metrics,
    sample_negative_edges,
)
from .synth import SynthSpec, gen_reorg, gen_sbm, gen_traveling
from .estimator import ContrastiveGraphClustering, ContrastiveStreamClustering

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ClusterLevel",
    "ClusteringScores",
    "ContrastiveGraphClustering",
    "ContrastiveObjective",
    "ContrastiveStreamClustering",
    "EncoderParams",
    "EpochSamples",
    "FeatureMatrix",
    "LossParts",
    "LossWeights",
    "MergedGraph",
    "MultiLevelClustering",
    "ParameterSet",
    "RankScores",
    "SegmentState",
    "Snapshot",
    "SpanRecord",
    "StaticGraph",
    "StreamEngine",
    "SynthSpec",
    "TemporalGraphStream",
    "TrainConfig",
    "adam_step",
    "backward",
    "build_static",
    "clustering_metrics",
    "combine_rank_metrics",
    "contrastive_graph_clustering",
    "corrupt",
    "drift_distance",
    "encode",
    "encode_temporal",
    "finite_diff",
    "gen_reorg",
    "gen_sbm",
    "gen_traveling",
    "infonce_term",
    "init_encoder_params",
    "kmeans",
    "latest_interaction",
    "link_score",
    "loss_community",
    "loss_features",
    "loss_homophily",
    "loss_temporal",
    "match_labels",
    "merge_all",
    "merge_snapshots",
    "rank_metrics",
    "refine_levels",
    "run_stream",
    "sample_homophily_positive",
    "sample_negative_edges",
    "segment_step",
    "soft_membership",
    "svd_init",
    "temporal_config",
    "total_loss",
    "triangle_neighbors",
]
