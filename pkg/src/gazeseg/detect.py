"""Threshold-based change-point detection over score series."""
from __future__ import annotations

import math

import numpy as np

from .core import MODES, ChangePointSet, ChangeScores, ConfigError


def _exceedance_mask(
    scores: ChangeScores, theta_pos: float, theta_feat: float, mode: str
) -> np.ndarray:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    for name, theta in (("theta_pos", theta_pos), ("theta_feat", theta_feat)):
        if not (isinstance(theta, (int, float)) and math.isfinite(theta) and theta > 0):
            raise ConfigError(f"{name} must be a positive finite number, got {theta!r}")
    pos = scores.s_pos > theta_pos
    feat = scores.s_feat > theta_feat
    if mode == "pos_only":
        mask = pos
    elif mode == "feat_only":
        mask = feat
    else:
        mask = pos & feat
    mask = mask.copy()
    mask[0] = False  # step 0 is never a change point
    return mask


def strict_exceedance_set(
    scores: ChangeScores, theta_pos: float, theta_feat: float, mode: str = "both"
) -> set[int]:
    """Steps whose scores strictly exceed the thresholds, before run collapsing."""
    mask = _exceedance_mask(scores, theta_pos, theta_feat, mode)
    return set(int(t) for t in np.flatnonzero(mask))


def detect(
    scores: ChangeScores, theta_pos: float, theta_feat: float, mode: str = "both"
) -> ChangePointSet:
    """Detect change points: threshold exceedance with run collapsing.

    A step is a candidate when its scores strictly exceed the thresholds
    (both scores in mode "both", a single one in the single-score modes).
    Maximal runs of consecutive candidates collapse to one change point at
    the earliest step of the run. No candidates means a single-segment task.
    """
    mask = _exceedance_mask(scores, theta_pos, theta_feat, mode)
    previous = np.concatenate(([False], mask[:-1]))
    starts = np.flatnonzero(mask & ~previous)
    return ChangePointSet(points=tuple(int(t) for t in starts), refined=False)
