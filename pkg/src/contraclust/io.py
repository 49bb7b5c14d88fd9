"""File formats: edge lists, feature/label files, CSV output, flat config files."""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .graph import Snapshot, TemporalGraphStream
from .trainer import TrainConfig


def read_edge_list(path: Union[str, Path], temporal: bool) -> List[tuple]:
    """Whitespace-separated `u v` (static) or `u v t` (temporal) lines."""
    want = 3 if temporal else 2
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != want:
                raise ValueError(
                    f"{path}:{lineno}: expected {want} fields, got {len(parts)}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
                if temporal:
                    t = float(parts[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            edges.append((u, v, t) if temporal else (u, v))
    return edges


def infer_n(edges: List[tuple]) -> int:
    if not edges:
        return 0
    return max(max(e[0], e[1]) for e in edges) + 1


def build_stream(
    edges: List[Tuple[int, int, float]], n: int, span_length: float = 1.0
) -> TemporalGraphStream:
    """Bucket timestamped edges into half-open spans of the given length.

    Span indices are 0-based from the earliest non-empty span; empty spans in
    between are skipped.
    """
    if span_length <= 0:
        raise ValueError("span length must be positive")
    if not edges:
        raise ValueError("temporal edge list is empty")
    spans: Dict[int, List[Tuple[int, int, float]]] = {}
    for u, v, t in edges:
        spans.setdefault(int(math.floor(t / span_length)), []).append((u, v, t))
    base = min(spans)
    snapshots = []
    for raw_idx in sorted(spans):
        snapshots.append(
            Snapshot(
                raw_idx - base,
                tuple(spans[raw_idx]),
                t_start=raw_idx * span_length,
                t_end=(raw_idx + 1) * span_length,
            )
        )
    return TemporalGraphStream(n, tuple(snapshots))


def write_edge_list(path: Union[str, Path], edges, temporal: bool) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in edges:
            if temporal:
                fh.write(f"{e[0]} {e[1]} {e[2]!r}\n")
            else:
                fh.write(f"{e[0]} {e[1]}\n")


def read_features(path: Union[str, Path]) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed feature CSV ({exc})") from None


def read_labels(path: Union[str, Path]) -> np.ndarray:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.strip()
            if not body:
                continue
            try:
                out.append(int(body))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected an integer label") from None
    return np.array(out, dtype=np.int64)


def write_labels(path: Union[str, Path], labels: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def write_matrix(path: Union[str, Path], arr: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(arr), delimiter=",", fmt="%.17g")


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)


# ----------------------------------------------------------------------------
# flat key = value config files


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(TrainConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "cluster_levels":
        if raw.lower() in ("none", ""):
            return None
        return tuple(int(x) for x in raw.replace(",", " ").split())
    if key == "seed":
        return None if raw.lower() == "none" else int(raw)
    if key in (
        "n_clusters",
        "embedding_dim",
        "n_layers",
        "max_epoch",
        "refine_every",
        "n_neg_features",
        "n_neg_neighbors",
        "n_neg_centroids",
        "n_neg_temporal",
        "n_init",
        "feature_dim",
    ):
        return int(raw)
    return float(raw)


def read_config(path: Union[str, Path]) -> Dict[str, object]:
    """Flat `key = value` lines with # comments; keys mirror TrainConfig."""
    out: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in body.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown config key '{key}'")
            try:
                out[key] = _parse_value(key, raw)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value for '{key}'") from None
    return out
