"""Gaze-transition segmentation of teleoperated demonstrations.

Demonstrations are decomposed into sub-tasks by median-filtering the
recorded gaze, scoring per-step changes in gaze position and gaze-local
visual features, thresholding those scores into change points, and
refining thresholds per demonstration until the whole dataset shares a
consistent sub-task count.
"""
from .core import (
    MODES,
    STATUS_EXCLUDED,
    STATUS_OK,
    ChangePointSet,
    ChangeScores,
    ConfigError,
    DetectionConfig,
    FeatureFrame,
    FeatureSeries,
    GazeSample,
    GazeSegError,
    GazeSeries,
    Segmentation,
    ValidationError,
    derive_segments,
)
from .detect import detect, strict_exceedance_set
from .refine import DemoRefinement, RefinementReport, modal_count, refine_dataset, refine_demo
from .signal import compute_scores, median_filter, normalize_features, score_feat, score_pos

__version__ = "0.1.0"

__all__ = [
    "MODES",
    "STATUS_EXCLUDED",
    "STATUS_OK",
    "ChangePointSet",
    "ChangeScores",
    "ConfigError",
    "DemoRefinement",
    "DetectionConfig",
    "FeatureFrame",
    "FeatureSeries",
    "GazeSample",
    "GazeSegError",
    "GazeSeries",
    "RefinementReport",
    "Segmentation",
    "ValidationError",
    "__version__",
    "compute_scores",
    "derive_segments",
    "detect",
    "median_filter",
    "modal_count",
    "normalize_features",
    "refine_dataset",
    "refine_demo",
    "score_feat",
    "score_pos",
    "strict_exceedance_set",
]
