"""Domain types shared across the toolkit.

Every type validates its invariants at construction time and is immutable
afterwards; numpy payloads are stored as read-only float64 arrays, so
instances are safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

MODES = ("pos_only", "feat_only", "both")

STATUS_OK = "ok"
STATUS_EXCLUDED = "excluded"

DEFAULT_WINDOW = 20
DEFAULT_PATCH = 256
DEFAULT_THETA_POS = 50.0
DEFAULT_THETA_FEAT = 0.03
DEFAULT_SCALE_DOWN = 0.99
DEFAULT_SCALE_UP = 1.01
DEFAULT_MAX_ITERS = 500


class GazeSegError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GazeSegError):
    """A value violates a domain-type invariant."""


class ConfigError(GazeSegError):
    """A hyperparameter or configuration value is out of range."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _float_array(values, name: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if shape is not None and arr.shape != shape:
        raise ValidationError(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name}: contains non-finite values")
    return _readonly(arr)


@dataclass(frozen=True)
class GazeSample:
    """One binocular gaze measurement, in image-pixel coordinates.

    (left_x, left_y) is the gaze point in the left camera image,
    (right_x, right_y) in the right one.
    """

    left_x: float
    left_y: float
    right_x: float
    right_y: float

    def __post_init__(self):
        for name in ("left_x", "left_y", "right_x", "right_y"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"GazeSample.{name}: not a number: {value!r}") from None
            if not math.isfinite(value):
                raise ValidationError(f"GazeSample.{name}: must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.left_x, self.left_y, self.right_x, self.right_y])


@dataclass(frozen=True)
class GazeSeries:
    """Dense gaze time series: row i is time step i, no gaps allowed."""

    values: np.ndarray  # (T+1, 4) float64, read-only
    rate_hz: float = 10.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValidationError(f"GazeSeries: expected shape (n, 4), got {arr.shape}")
        if arr.shape[0] < 2:
            raise ValidationError("GazeSeries: needs at least 2 samples")
        if not np.isfinite(arr).all():
            raise ValidationError("GazeSeries: contains non-finite values")
        if not (isinstance(self.rate_hz, (int, float)) and self.rate_hz > 0):
            raise ValidationError(f"GazeSeries: rate_hz must be positive, got {self.rate_hz!r}")
        object.__setattr__(self, "values", _readonly(arr))
        object.__setattr__(self, "rate_hz", float(self.rate_hz))

    @classmethod
    def from_samples(cls, samples: Sequence[GazeSample], rate_hz: float = 10.0) -> "GazeSeries":
        return cls(np.array([s.as_array() for s in samples]), rate_hz=rate_hz)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def last_step(self) -> int:
        """Index of the final time step (length minus one)."""
        return len(self) - 1

    def sample(self, t: int) -> GazeSample:
        row = self.values[t]
        return GazeSample(row[0], row[1], row[2], row[3])


@dataclass(frozen=True)
class FeatureFrame:
    """Per-step feature vectors for the left and right eye patches."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = _float_array(self.left, "FeatureFrame.left")
        right = _float_array(self.right, "FeatureFrame.right")
        if left.ndim != 1 or right.ndim != 1:
            raise ValidationError("FeatureFrame: vectors must be 1-D")
        if left.shape[0] < 1:
            raise ValidationError("FeatureFrame: dimension must be >= 1")
        if left.shape != right.shape:
            raise ValidationError(
                f"FeatureFrame: left/right dimension mismatch: {left.shape[0]} vs {right.shape[0]}"
            )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def dim(self) -> int:
        return self.left.shape[0]


@dataclass(frozen=True)
class FeatureSeries:
    """Feature vectors over time, aligned one-to-one with a gaze series."""

    values: np.ndarray  # (n, 2, D); stream 0 = left eye, 1 = right eye

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 3 or arr.shape[1] != 2:
            raise ValidationError(f"FeatureSeries: expected shape (n, 2, D), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[2] < 1:
            raise ValidationError(f"FeatureSeries: empty series or zero dimension: {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("FeatureSeries: contains non-finite values")
        object.__setattr__(self, "values", _readonly(arr))

    @classmethod
    def from_frames(cls, frames: Sequence[FeatureFrame]) -> "FeatureSeries":
        if not frames:
            raise ValidationError("FeatureSeries: no frames")
        dims = {frame.dim for frame in frames}
        if len(dims) != 1:
            raise ValidationError(f"FeatureSeries: inconsistent frame dimensions {sorted(dims)}")
        return cls(np.array([[f.left, f.right] for f in frames]))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def frame(self, t: int) -> FeatureFrame:
        return FeatureFrame(self.values[t, 0], self.values[t, 1])


@dataclass(frozen=True)
class ChangeScores:
    """Per-step change scores; index 0 is defined as 0 for both series.

    s_feat is identically zero when a demonstration has no feature data.
    """

    s_pos: np.ndarray
    s_feat: np.ndarray

    def __post_init__(self):
        s_pos = _float_array(self.s_pos, "ChangeScores.s_pos")
        s_feat = _float_array(self.s_feat, "ChangeScores.s_feat")
        if s_pos.ndim != 1 or s_feat.ndim != 1:
            raise ValidationError("ChangeScores: series must be 1-D")
        if s_pos.shape != s_feat.shape:
            raise ValidationError(
                f"ChangeScores: length mismatch: {s_pos.shape[0]} vs {s_feat.shape[0]}"
            )
        if s_pos.shape[0] < 1:
            raise ValidationError("ChangeScores: series must be non-empty")
        if s_pos[0] != 0.0 or s_feat[0] != 0.0:
            raise ValidationError("ChangeScores: index 0 must be 0 in both series")
        if np.any(s_pos < 0.0):
            raise ValidationError("ChangeScores: s_pos must be non-negative")
        object.__setattr__(self, "s_pos", s_pos)
        object.__setattr__(self, "s_feat", s_feat)

    def __len__(self) -> int:
        return self.s_pos.shape[0]


@dataclass(frozen=True)
class ChangePointSet:
    """Ordered change-point steps; refined=True marks refinement output."""

    points: tuple[int, ...]
    refined: bool = False

    def __post_init__(self):
        pts = []
        for p in self.points:
            if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
                raise ValidationError(f"ChangePointSet: point {p!r} is not an integer")
            pts.append(int(p))
        if any(p < 1 for p in pts):
            raise ValidationError(f"ChangePointSet: points must be >= 1, got {pts}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValidationError(f"ChangePointSet: points must be strictly increasing, got {pts}")
        object.__setattr__(self, "points", tuple(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[int]:
        return iter(self.points)


def derive_segments(points: Sequence[int], n_steps: int) -> tuple[tuple[int, int], ...]:
    """Half-open [start, end) segments covering [0, n_steps) split at `points`.

    Pure function of its inputs; re-deriving is idempotent.
    """
    bounds = [0, *points, n_steps]
    if any(b <= a for a, b in zip(bounds, bounds[1:])):
        raise ValidationError(
            f"derive_segments: points {list(points)} do not partition [0, {n_steps})"
        )
    return tuple((a, b) for a, b in zip(bounds, bounds[1:]))


@dataclass(frozen=True)
class Segmentation:
    """A demonstration split into contiguous sub-task step ranges."""

    boundaries: ChangePointSet
    segments: tuple[tuple[int, int], ...]
    status: str = STATUS_OK

    def __post_init__(self):
        if self.status not in (STATUS_OK, STATUS_EXCLUDED):
            raise ValidationError(f"Segmentation: unknown status {self.status!r}")
        segs = tuple((int(a), int(b)) for a, b in self.segments)
        if not segs or segs[0][0] != 0:
            raise ValidationError("Segmentation: segments must start at step 0")
        for (a, b), (c, _) in zip(segs, segs[1:]):
            if b != c:
                raise ValidationError("Segmentation: segments must be contiguous")
        if any(b <= a for a, b in segs):
            raise ValidationError("Segmentation: segments must be non-empty")
        if self.status == STATUS_OK and len(segs) != len(self.boundaries) + 1:
            raise ValidationError(
                f"Segmentation: expected {len(self.boundaries) + 1} segments, got {len(segs)}"
            )
        object.__setattr__(self, "segments", segs)

    @classmethod
    def from_boundaries(
        cls, boundaries: ChangePointSet, n_steps: int, status: str = STATUS_OK
    ) -> "Segmentation":
        return cls(boundaries, derive_segments(boundaries.points, n_steps), status)


@dataclass(frozen=True)
class DetectionConfig:
    """Detection and refinement hyperparameters.

    Defaults: window 20, patch 256 px, theta_pos 50 px, theta_feat 0.03,
    with per-iteration threshold scaling of 1% in either direction.
    """

    window_w: int = DEFAULT_WINDOW
    patch_b: int = DEFAULT_PATCH
    theta_pos: float = DEFAULT_THETA_POS
    theta_feat: float = DEFAULT_THETA_FEAT
    mode: str = "both"
    refine: bool = True
    scale_down: float = DEFAULT_SCALE_DOWN
    scale_up: float = DEFAULT_SCALE_UP
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not isinstance(self.window_w, (int, np.integer)) or isinstance(self.window_w, bool):
            raise ConfigError(f"window_w must be an integer, got {self.window_w!r}")
        if self.window_w < 2:
            raise ConfigError(f"window_w must be >= 2, got {self.window_w}")
        if not isinstance(self.patch_b, (int, np.integer)) or self.patch_b < 1:
            raise ConfigError(f"patch_b must be a positive integer, got {self.patch_b!r}")
        for name in ("theta_pos", "theta_feat"):
            theta = getattr(self, name)
            if not (isinstance(theta, (int, float)) and math.isfinite(theta) and theta > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {theta!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0.0 < self.scale_down < 1.0):
            raise ConfigError(f"scale_down must be in (0, 1), got {self.scale_down!r}")
        if not (isinstance(self.scale_up, (int, float)) and self.scale_up > 1.0):
            raise ConfigError(f"scale_up must be > 1, got {self.scale_up!r}")
        if not isinstance(self.max_iters, (int, np.integer)) or self.max_iters < 1:
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        object.__setattr__(self, "window_w", int(self.window_w))
        object.__setattr__(self, "patch_b", int(self.patch_b))
        object.__setattr__(self, "theta_pos", float(self.theta_pos))
        object.__setattr__(self, "theta_feat", float(self.theta_feat))
        object.__setattr__(self, "max_iters", int(self.max_iters))
