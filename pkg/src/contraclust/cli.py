"""Command-line entry points: cluster-static, cluster-stream, synth, eval."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io as cio
from .estimator import ContrastiveGraphClustering, ContrastiveStreamClustering
from .features import FeatureMatrix
from .graph import StaticGraph
from .metrics import (
    clustering_metrics,
    combine_rank_metrics,
    link_score,
    rank_metrics,
    sample_negative_edges,
)
from .synth import SynthSpec, gen_reorg, gen_sbm, gen_traveling
from .trainer import TrainConfig, temporal_config


def _ensure_out(outdir: Path, files: List[str], force: bool) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    if force:
        return
    clashes = [f for f in files if (outdir / f).exists()]
    if clashes:
        raise ValueError(
            f"output files already exist in {outdir}: {', '.join(clashes)} "
            "(pass --force to overwrite)"
        )


def _load_config(args, temporal: bool) -> TrainConfig:
    overrides = cio.read_config(args.config) if args.config else {}
    if getattr(args, "k", None) is not None:
        overrides["n_clusters"] = args.k
    if getattr(args, "theta", None) is not None:
        overrides["theta"] = args.theta
    if args.seed is not None:
        overrides["seed"] = args.seed
    if temporal:
        return temporal_config(**overrides)
    return TrainConfig(**overrides)


def _estimator_kwargs(cfg: TrainConfig, temporal: bool) -> dict:
    kv = dict(
        n_clusters=cfg.n_clusters,
        cluster_levels=cfg.cluster_levels,
        embedding_dim=cfg.embedding_dim,
        n_layers=cfg.n_layers,
        max_epoch=cfg.max_epoch,
        refine_every=cfg.refine_every,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        temperature=cfg.temperature,
        triangle_weight=cfg.triangle_weight,
        n_neg_features=cfg.n_neg_features,
        n_neg_neighbors=cfg.n_neg_neighbors,
        n_neg_centroids=cfg.n_neg_centroids,
        lambda_features=cfg.lambda_features,
        lambda_homophily=cfg.lambda_homophily,
        lambda_community=cfg.lambda_community,
        n_init=cfg.n_init,
        membership_temp=cfg.membership_temp,
        tol=cfg.tol,
        feature_dim=cfg.feature_dim,
        random_state=cfg.seed,
    )
    if temporal:
        kv.update(
            decay=cfg.decay,
            decay_unit=cfg.decay_unit,
            theta=cfg.theta,
            n_neg_temporal=cfg.n_neg_temporal,
            lambda_temporal=cfg.lambda_temporal,
        )
    return kv


def cmd_cluster_static(args) -> int:
    cfg = _load_config(args, temporal=False)
    if args.features is None:
        raise ValueError("static mode requires --features")
    edges = cio.read_edge_list(args.edges, temporal=False)
    features = cio.read_features(args.features)
    n = max(cio.infer_n(edges), features.shape[0])
    graph = StaticGraph(n, edges)
    if features.shape[0] != n:
        raise ValueError(
            f"feature rows ({features.shape[0]}) do not match node count ({n})"
        )
    outdir = Path(args.out)
    outputs = [
        "membership.csv",
        "embedding.csv",
        "centroids.csv",
        "loss_curve.csv",
        "labels_pred.txt",
        "metrics.csv",
    ]
    _ensure_out(outdir, outputs, args.force)

    model = ContrastiveGraphClustering(**_estimator_kwargs(cfg, temporal=False))
    model.fit(graph, FeatureMatrix(features))

    cio.write_matrix(outdir / "membership.csv", model.membership_)
    cio.write_matrix(outdir / "embedding.csv", model.embedding_)
    cio.write_matrix(outdir / "centroids.csv", model.centroids_)
    cio.write_matrix(outdir / "loss_curve.csv", np.asarray(model.loss_curve_))
    cio.write_labels(outdir / "labels_pred.txt", model.labels_)
    if args.labels:
        truth = cio.read_labels(args.labels)
        if truth.size != n:
            raise ValueError(
                f"label rows ({truth.size}) do not match node count ({n})"
            )
        scores = clustering_metrics(model.labels_, truth)
        with open(outdir / "metrics.csv", "w", encoding="utf-8") as fh:
            fh.write("acc,nmi,ari,f1\n")
            fh.write(f"{scores.acc!r},{scores.nmi!r},{scores.ari!r},{scores.f1!r}\n")
    return 0


def _span_label_file(labels_arg: str, span: int) -> Optional[Path]:
    p = Path(labels_arg)
    if p.is_dir():
        candidate = p / f"labels_span{span:03d}.txt"
        return candidate if candidate.exists() else None
    return p


def cmd_cluster_stream(args) -> int:
    cfg = _load_config(args, temporal=True)
    edges = cio.read_edge_list(args.edges, temporal=True)
    n = cio.infer_n(edges)
    features = None
    if args.features:
        features = FeatureMatrix(cio.read_features(args.features))
        n = max(n, features.n)
    stream = cio.build_stream(edges, n, args.span_length)

    outdir = Path(args.out)
    base_outputs = [
        "spans.jsonl",
        "segments.json",
        "change_points.txt",
        "metrics_clustering.csv",
        "metrics_linkpred.csv",
    ]
    span_outputs = [f"membership_span{s.span_index:03d}.csv" for s in stream.snapshots]
    _ensure_out(outdir, base_outputs + span_outputs, args.force)

    model = ContrastiveStreamClustering(**_estimator_kwargs(cfg, temporal=True))
    model.fit(stream, features)

    for rec in model.records_:
        cio.write_matrix(
            outdir / f"membership_span{rec.span:03d}.csv", rec.membership
        )
    with open(outdir / "change_points.txt", "w", encoding="utf-8") as fh:
        for span in model.change_points_:
            fh.write(f"{span}\n")
    with open(outdir / "segments.json", "w", encoding="utf-8") as fh:
        json.dump(model.segments_, fh)
        fh.write("\n")

    clustering_rows = []
    if args.labels:
        for rec in model.records_:
            label_file = _span_label_file(args.labels, rec.span)
            if label_file is None:
                continue
            truth = cio.read_labels(label_file)
            if truth.size != n:
                raise ValueError(
                    f"{label_file}: label rows ({truth.size}) != node count ({n})"
                )
            clustering_rows.append((rec.span, clustering_metrics(rec.labels, truth)))
        with open(outdir / "metrics_clustering.csv", "w", encoding="utf-8") as fh:
            fh.write("span,acc,nmi,ari,f1\n")
            for span, s in clustering_rows:
                fh.write(f"{span},{s.acc!r},{s.nmi!r},{s.ari!r},{s.f1!r}\n")
            if clustering_rows:
                means = np.mean([[s.acc, s.nmi, s.ari, s.f1] for _, s in clustering_rows], axis=0)
                fh.write(
                    "mean," + ",".join(repr(float(v)) for v in means) + "\n"
                )

    linkpred_rows = []
    eval_rng = np.random.default_rng(
        [0 if cfg.seed is None else int(cfg.seed), 0x1E6E]
    )
    for prev, rec in zip(model.records_, model.records_[1:]):
        snap = stream.snapshot(rec.span)
        pos = sorted({(min(u, v), max(u, v)) for u, v, _ in snap.edges if u != v})
        if not pos:
            continue
        neg = sample_negative_edges(pos, n, eval_rng)
        phi = prev.membership
        s_pos = [link_score(phi, u, v) for u, v in pos]
        s_neg = [link_score(phi, u, v) for u, v in neg]
        rm = rank_metrics(s_pos, s_neg)
        linkpred_rows.append((rec.span, rm.auc, rm.ap, len(pos) + len(neg)))
    with open(outdir / "metrics_linkpred.csv", "w", encoding="utf-8") as fh:
        fh.write("span,auc,ap,n_edges\n")
        for span, auc, ap, m in linkpred_rows:
            fh.write(f"{span},{auc!r},{ap!r},{m}\n")
        if linkpred_rows:
            combined = combine_rank_metrics([(a, p, m) for _, a, p, m in linkpred_rows])
            fh.write(f"weighted_mean,{combined.auc!r},{combined.ap!r},"
                     f"{sum(m for *_, m in linkpred_rows)}\n")

    metric_by_span = {span: s for span, s in clustering_rows}
    link_by_span = {span: (auc, ap) for span, auc, ap, _ in linkpred_rows}
    with open(outdir / "spans.jsonl", "w", encoding="utf-8") as fh:
        for rec in model.records_:
            entry = {
                "span": rec.span,
                "segment_id": rec.segment_id,
                "change_point": rec.change_point,
                "segment_start": rec.segment_start,
                "drift": rec.drift,
                "loss_curve": [float(x) for x in rec.loss_curve],
                "metrics": {},
            }
            if rec.span in metric_by_span:
                s = metric_by_span[rec.span]
                entry["metrics"].update(acc=s.acc, nmi=s.nmi, ari=s.ari, f1=s.f1)
            if rec.span in link_by_span:
                auc, ap = link_by_span[rec.span]
                entry["metrics"].update(auc=auc, ap=ap)
            fh.write(json.dumps(entry) + "\n")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_per_group=args.n_per_group,
        spans=args.spans,
        intra_p=args.intra_p,
        inter_p=args.inter_p,
        scenario=args.scenario,
        seed=0 if args.seed is None else args.seed,
        n_blocks=args.blocks,
        separation=args.separation,
        feat_dim=args.feat_dim,
    )
    outdir = Path(args.out)
    if args.scenario == "static-sbm":
        outputs = ["edges.txt", "labels.txt", "features.csv"]
    else:
        outputs = ["edges.txt"] + [
            f"labels_span{i:03d}.txt" for i in range(spec.spans)
        ]
    _ensure_out(outdir, outputs, args.force)

    if args.scenario == "static-sbm":
        g, labels, feats = gen_sbm(spec)
        cio.write_edge_list(outdir / "edges.txt", sorted(g.edges), temporal=False)
        cio.write_labels(outdir / "labels.txt", labels)
        cio.write_matrix(outdir / "features.csv", feats.values)
        return 0

    gen = gen_traveling if args.scenario == "traveling" else gen_reorg
    stream, labels = gen(spec)
    timed = [e for snap in stream.snapshots for e in snap.edges]
    cio.write_edge_list(outdir / "edges.txt", timed, temporal=True)
    for snap in stream.snapshots:
        cio.write_labels(
            outdir / f"labels_span{snap.span_index:03d}.txt", labels[snap.span_index]
        )
    return 0


def cmd_eval(args) -> int:
    phi = cio.read_matrix(args.membership)
    outdir = Path(args.out)
    _ensure_out(outdir, ["metrics.csv"], args.force)
    if args.labels:
        truth = cio.read_labels(args.labels)
        if truth.size != phi.shape[0]:
            raise ValueError(
                f"membership rows ({phi.shape[0]}) != label rows ({truth.size})"
            )
        pred = np.argmax(phi, axis=1)
        s = clustering_metrics(pred, truth)
        with open(outdir / "metrics.csv", "w", encoding="utf-8") as fh:
            fh.write("acc,nmi,ari,f1\n")
            fh.write(f"{s.acc!r},{s.nmi!r},{s.ari!r},{s.f1!r}\n")
        return 0
    if args.pos_edges and args.neg_edges:
        pos = cio.read_edge_list(args.pos_edges, temporal=False)
        neg = cio.read_edge_list(args.neg_edges, temporal=False)
        s_pos = [link_score(phi, u, v) for u, v in pos]
        s_neg = [link_score(phi, u, v) for u, v in neg]
        rm = rank_metrics(s_pos, s_neg)
        with open(outdir / "metrics.csv", "w", encoding="utf-8") as fh:
            fh.write("auc,ap\n")
            fh.write(f"{rm.auc!r},{rm.ap!r}\n")
        return 0
    raise ValueError("eval needs --labels or both --pos-edges and --neg-edges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contraclust",
        description="Contrastive graph clustering and temporal community tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite outputs")

    p = sub.add_parser("cluster-static", help="cluster one static graph")
    p.add_argument("--edges", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--config", default=None)
    common(p)
    p.set_defaults(func=cmd_cluster_static)

    p = sub.add_parser("cluster-stream", help="cluster a temporal edge stream")
    p.add_argument("--edges", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--labels", default=None, help="label file or per-span directory")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--span-length", type=float, default=1.0)
    p.add_argument("--config", default=None)
    common(p)
    p.set_defaults(func=cmd_cluster_stream)

    p = sub.add_parser("synth", help="generate synthetic fixtures")
    p.add_argument(
        "--scenario", required=True, choices=["traveling", "reorg", "static-sbm"]
    )
    p.add_argument("--n-per-group", type=int, default=50)
    p.add_argument("--spans", type=int, default=7)
    p.add_argument("--intra-p", type=float, default=0.15)
    p.add_argument("--inter-p", type=float, default=0.01)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--feat-dim", type=int, default=16)
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score stored memberships")
    p.add_argument("--membership", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--pos-edges", default=None)
    p.add_argument("--neg-edges", default=None)
    common(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
