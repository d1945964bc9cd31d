"""Independent oracles used to freeze expected values.

Everything here is written from the operation definitions alone (literal
formulas, per-index brute force) and must stay independent of the package
implementations it checks.
"""
from __future__ import annotations

import math

import numpy as np

from gazeseg.core import ChangeScores


def naive_median_filter(values: np.ndarray, window_w: int) -> np.ndarray:
    """Per-index brute force: sort the clamped window, take the middle.

    Window for step t is the set of integer indices in [t - w/2, t + w/2]
    intersected with [0, T]; even-count windows average the two middle
    values.
    """
    n, dims = values.shape
    out = np.empty_like(values)
    for t in range(n):
        lo = max(0, math.ceil(t - window_w / 2))
        hi = min(n - 1, math.floor(t + window_w / 2))
        for d in range(dims):
            window = sorted(float(values[i, d]) for i in range(lo, hi + 1))
            m = len(window)
            if m % 2 == 1:
                out[t, d] = window[m // 2]
            else:
                out[t, d] = (window[m // 2 - 1] + window[m // 2]) / 2.0
    return out


def naive_run_starts(candidates: set[int]) -> list[int]:
    """Collapse a candidate step set to the minima of its maximal runs."""
    starts = []
    for t in sorted(candidates):
        if t - 1 not in candidates:
            starts.append(t)
    return starts


def naive_crop(image: np.ndarray, center: tuple[float, float], b: int) -> np.ndarray:
    """Per-pixel gather with bounds check; out-of-image pixels are zero."""
    cx = int(np.rint(center[0]))
    cy = int(np.rint(center[1]))
    out = np.zeros((b, b), dtype=image.dtype)
    for r in range(b):
        for c in range(b):
            src_r = cy - b // 2 + r
            src_c = cx - b // 2 + c
            if 0 <= src_r < image.shape[0] and 0 <= src_c < image.shape[1]:
                out[r, c] = image[src_r, src_c]
    return out


def scores_from_pos(s_pos) -> ChangeScores:
    s_pos = np.asarray(s_pos, dtype=float)
    return ChangeScores(s_pos=s_pos, s_feat=np.zeros_like(s_pos))


def random_scores(rng: np.random.Generator, n: int | None = None) -> ChangeScores:
    n = int(rng.integers(2, 40)) if n is None else n
    s_pos = rng.uniform(0.0, 100.0, size=n)
    s_feat = rng.uniform(0.0, 1.0, size=n)
    s_pos[0] = 0.0
    s_feat[0] = 0.0
    return ChangeScores(s_pos=s_pos, s_feat=s_feat)


def random_unit_features(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    vecs = rng.normal(size=(n, 2, dim))
    return vecs / np.linalg.norm(vecs, axis=-1, keepdims=True)
