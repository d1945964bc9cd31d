"""Median filtering of gaze series and the per-step change scores."""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import ChangeScores, ConfigError, FeatureSeries, GazeSeries, ValidationError

# Floor applied to the log arguments in the feature score so antipodal
# vectors (inner product -1) yield a large finite score instead of -inf.
LOG_ARG_FLOOR = 1e-9

_LOG2 = math.log(2.0)


def median_filter(gaze: GazeSeries, window_w: int) -> GazeSeries:
    """Component-wise running median of a gaze series.

    The window at step t covers the samples with indices in
    [t - window_w/2, t + window_w/2], clipped to the series: windows shrink
    near the ends, no padding is invented. Even-count windows use the mean
    of the two middle values.
    """
    if not isinstance(window_w, (int, np.integer)) or isinstance(window_w, bool):
        raise ConfigError(f"window width must be an integer, got {window_w!r}")
    if window_w < 2:
        raise ConfigError(f"window width must be >= 2, got {window_w}")
    values = gaze.values
    n = values.shape[0]
    half = int(window_w) // 2
    out = np.empty_like(values)
    if n >= 2 * half + 1:
        full = sliding_window_view(values, 2 * half + 1, axis=0)
        out[half : n - half] = np.median(full, axis=-1)
    for t in range(min(half, n)):
        out[t] = np.median(values[: min(n, t + half + 1)], axis=0)
    for t in range(max(half, n - half), n):
        out[t] = np.median(values[max(0, t - half) :], axis=0)
    return GazeSeries(out, rate_hz=gaze.rate_hz)


def score_pos(filtered: GazeSeries) -> np.ndarray:
    """Step-to-step gaze displacement: Euclidean norm of the 4-D difference.

    Index 0 is defined as 0 (no previous step to difference against).
    """
    scores = np.zeros(len(filtered), dtype=np.float64)
    scores[1:] = np.linalg.norm(np.diff(filtered.values, axis=0), axis=1)
    return scores


def normalize_features(features: FeatureSeries, label: str = "") -> FeatureSeries:
    """L2-normalize every left/right vector to unit length.

    Raises ValidationError for zero-norm vectors, naming the step and eye
    (and `label`, when given, to identify the demonstration).
    """
    vectors = features.values
    norms = np.linalg.norm(vectors, axis=-1)
    if np.any(norms == 0.0):
        t, eye = (int(i) for i in np.argwhere(norms == 0.0)[0])
        where = f"{label}: " if label else ""
        raise ValidationError(
            f"{where}zero-norm feature vector at time step {t} ({'left' if eye == 0 else 'right'} eye)"
        )
    return FeatureSeries(vectors / norms[..., None])


def score_feat(features: FeatureSeries) -> np.ndarray:
    """Feature dissimilarity between consecutive steps, averaged over eyes.

    For unit vectors the score is log 2 - (log(ip_left + 1) + log(ip_right + 1)) / 2,
    which is 0 for identical frames, log 2 for orthogonal ones, and bounded
    above via the LOG_ARG_FLOOR clamp for antipodal ones. Index 0 is 0.

    The log argument is clipped to [LOG_ARG_FLOOR, 2]: unit vectors have
    inner products in [-1, 1] exactly, and the clip keeps float rounding
    from pushing scores below zero.
    """
    vectors = features.values
    n = vectors.shape[0]
    scores = np.zeros(n, dtype=np.float64)
    if n >= 2:
        inner = np.einsum("ted,ted->te", vectors[:-1], vectors[1:])
        args = np.clip(inner + 1.0, LOG_ARG_FLOOR, 2.0)
        scores[1:] = -(np.log(args[:, 0]) + np.log(args[:, 1])) / 2.0 + _LOG2
    return scores


def compute_scores(filtered: GazeSeries, features: FeatureSeries | None = None) -> ChangeScores:
    """Assemble both change-score series for one demonstration.

    `features` must be aligned with the gaze series; when absent, s_feat is
    identically zero (position-only detection).
    """
    s_pos = score_pos(filtered)
    if features is None:
        s_feat = np.zeros_like(s_pos)
    else:
        if len(features) != len(filtered):
            raise ValidationError(
                f"feature series length {len(features)} does not match gaze length {len(filtered)}"
            )
        s_feat = score_feat(features)
    return ChangeScores(s_pos=s_pos, s_feat=s_feat)
