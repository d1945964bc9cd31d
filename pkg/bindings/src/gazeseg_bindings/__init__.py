"""Array-first bindings for ML data pipelines.

In-memory numpy arrays in, change points and report mappings out. Every
entry point delegates to the gazeseg library, so results are bit-identical
to the pipeline's; no arithmetic happens here. Input arrays are copied at
the boundary, never aliased.
"""
from __future__ import annotations

import dataclasses
from typing import Mapping, Sequence

import numpy as np

from gazeseg.core import DetectionConfig, FeatureSeries, GazeSeries
from gazeseg.detect import detect as _detect_scores
from gazeseg.pipeline import demo_scores as _demo_scores
from gazeseg.pipeline import segment_manifest as _segment_manifest
from gazeseg.refine import refine_dataset as _refine_dataset

__version__ = "0.1.0"

__all__ = ["detect", "refine_dataset", "segment_manifest", "__version__"]

_CONFIG_KEYS = {f.name for f in dataclasses.fields(DetectionConfig)}


def _build_config(config: Mapping | None, overrides: Mapping) -> DetectionConfig:
    merged = {**(config or {}), **overrides}
    unknown = sorted(set(merged) - _CONFIG_KEYS)
    if unknown:
        raise TypeError(f"unknown config key(s): {', '.join(unknown)}")
    return DetectionConfig(**merged)


def _gaze_series(gaze) -> GazeSeries:
    arr = np.array(gaze, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"gaze: expected an array of shape (T+1, 4), got {arr.shape}")
    return GazeSeries(arr)


def _feature_series(features) -> FeatureSeries | None:
    if features is None:
        return None
    arr = np.array(features, dtype=np.float64, copy=True)
    if arr.ndim != 3 or arr.shape[1] != 2:
        raise ValueError(
            f"features: expected an array of shape (T+1, 2, D), got {arr.shape}"
        )
    return FeatureSeries(arr)


def _unpack_demo(demo):
    if isinstance(demo, Mapping):
        extra = sorted(set(demo) - {"gaze", "features"})
        if extra:
            raise TypeError(f"unknown demo key(s): {', '.join(extra)}")
        return demo["gaze"], demo.get("features")
    if isinstance(demo, tuple):
        if len(demo) != 2:
            raise ValueError(f"demo tuple must be (gaze, features), got length {len(demo)}")
        return demo
    return demo, None


def detect(gaze, features=None, config: Mapping | None = None, **overrides) -> list[int]:
    """Run the filter-score-detect pipeline on one demonstration's arrays.

    `gaze` is (T+1, 4); `features` optionally (T+1, 2, D). Returns the
    detected change-point steps at the config's thresholds.
    """
    cfg = _build_config(config, overrides)
    scores = _demo_scores(_gaze_series(gaze), cfg, _feature_series(features))
    points = _detect_scores(scores, cfg.theta_pos, cfg.theta_feat, cfg.mode)
    return [int(p) for p in points]


def refine_dataset(
    demos: Sequence,
    config: Mapping | None = None,
    ids: Sequence[str] | None = None,
    task: str = "dataset",
    **overrides,
) -> dict:
    """Refine a whole task's demonstrations given as in-memory arrays.

    Each demo is a gaze array, a (gaze, features) tuple, or a mapping with
    "gaze" and optional "features". Returns the segmentation report as a
    plain mapping (same schema as the segmentation JSON).
    """
    if len(demos) == 0:
        raise ValueError("refine_dataset: empty dataset")
    cfg = _build_config(config, overrides)
    scores = []
    for demo in demos:
        gaze, features = _unpack_demo(demo)
        scores.append(_demo_scores(_gaze_series(gaze), cfg, _feature_series(features)))
    return _refine_dataset(scores, cfg, ids=ids).to_report_dict(task)


def segment_manifest(path, **config) -> dict:
    """Full pipeline for a dataset on disk; config keys mirror DetectionConfig."""
    return _segment_manifest(path, _build_config(None, config))
