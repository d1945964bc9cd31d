"""Synthetic demonstrations with known transition steps.

A demonstration is modeled as a sequence of gaze landmarks: the gaze dwells
on landmark i (plus per-step Gaussian noise and occasional brief glances to
a random distant point), then jumps to landmark i+1. The first step of each
new landmark is a ground-truth boundary; glances never are. Feature vectors
give each landmark a distinct intensity band, so inner products are high
within a landmark and near zero across landmarks.

Everything is deterministic given the spec's seed; dataset generation
derives per-demonstration seeds from the spec seed and the demo index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import FeatureSeries, GazeSeries, ValidationError
from .features import write_gzft, write_pgm, frame_filename
from .io import write_gaze_csv, write_json, write_truth_json
from .signal import normalize_features

# Default horizontal offset between the two eyes' landmark positions.
DEFAULT_DISPARITY = 10.0


@dataclass(frozen=True)
class Landmark:
    """One fixation target: 4-D position (both eyes), dwell length, drift."""

    position: np.ndarray  # (4,): left_x, left_y, right_x, right_y
    dwell_steps: int
    drift_per_step: np.ndarray = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        pos = np.array(self.position, dtype=np.float64, copy=True)
        drift = np.array(self.drift_per_step, dtype=np.float64, copy=True)
        if pos.shape != (4,) or not np.isfinite(pos).all():
            raise ValidationError(f"Landmark: position must be 4 finite numbers, got {pos!r}")
        if drift.shape != (4,) or not np.isfinite(drift).all():
            raise ValidationError(f"Landmark: drift must be 4 finite numbers, got {drift!r}")
        if not isinstance(self.dwell_steps, (int, np.integer)) or self.dwell_steps < 1:
            raise ValidationError(f"Landmark: dwell_steps must be >= 1, got {self.dwell_steps!r}")
        pos.setflags(write=False)
        drift.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "drift_per_step", drift)
        object.__setattr__(self, "dwell_steps", int(self.dwell_steps))


def landmark_at(
    x: float,
    y: float,
    dwell_steps: int,
    disparity: float = DEFAULT_DISPARITY,
    drift: tuple[float, float] = (0.0, 0.0),
) -> Landmark:
    """Landmark whose right-eye position is the left one shifted by `disparity` px."""
    return Landmark(
        position=(x, y, x - disparity, y),
        dwell_steps=dwell_steps,
        drift_per_step=(drift[0], drift[1], drift[0], drift[1]),
    )


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters for one synthetic demonstration.

    glance_rate is the per-step probability that a 1-3 step excursion to a
    random distant point begins. Excursions model brief task-irrelevant
    looks during a fixation, so they start only glance_margin steps away
    from the dwell's ends, and consecutive excursions are separated by at
    least glance_gap clean steps; together this keeps every median window
    of up to 2 * glance_margin samples majority-clean. feature_profile
    optionally fixes each landmark's intensity band (lo, hi in 0..255); by
    default disjoint bands are assigned automatically.
    """

    landmarks: tuple[Landmark, ...]
    noise_sigma: float = 5.0
    glance_rate: float = 0.0
    glance_gap: int = 12
    glance_margin: int = 16
    glance_dist: tuple[float, float] = (200.0, 400.0)
    feature_profile: tuple[tuple[int, int], ...] | None = None
    feature_dim: int = 64
    feature_jitter: float = 0.01
    seed: int = 0

    def __post_init__(self):
        landmarks = tuple(self.landmarks)
        if len(landmarks) < 1:
            raise ValidationError("SynthSpec: at least one landmark required")
        if not all(isinstance(lm, Landmark) for lm in landmarks):
            raise ValidationError("SynthSpec: landmarks must be Landmark instances")
        if not (isinstance(self.noise_sigma, (int, float)) and self.noise_sigma >= 0):
            raise ValidationError(f"SynthSpec: noise_sigma must be >= 0, got {self.noise_sigma!r}")
        if not (0.0 <= self.glance_rate < 1.0):
            raise ValidationError(f"SynthSpec: glance_rate must be in [0, 1), got {self.glance_rate!r}")
        if self.glance_gap < 0:
            raise ValidationError(f"SynthSpec: glance_gap must be >= 0, got {self.glance_gap!r}")
        if self.glance_margin < 0:
            raise ValidationError(
                f"SynthSpec: glance_margin must be >= 0, got {self.glance_margin!r}"
            )
        lo, hi = self.glance_dist
        if not (0 < lo <= hi):
            raise ValidationError(f"SynthSpec: bad glance_dist {self.glance_dist!r}")
        if self.feature_dim < 2:
            raise ValidationError(f"SynthSpec: feature_dim must be >= 2, got {self.feature_dim!r}")
        if self.feature_jitter < 0:
            raise ValidationError(f"SynthSpec: feature_jitter must be >= 0, got {self.feature_jitter!r}")
        if self.feature_profile is not None:
            profile = tuple((int(a), int(b)) for a, b in self.feature_profile)
            if len(profile) != len(landmarks):
                raise ValidationError(
                    f"SynthSpec: feature_profile has {len(profile)} bands for "
                    f"{len(landmarks)} landmarks"
                )
            for a, b in profile:
                if not (0 <= a <= b <= 255):
                    raise ValidationError(f"SynthSpec: bad intensity band ({a}, {b})")
            object.__setattr__(self, "feature_profile", profile)
        object.__setattr__(self, "landmarks", landmarks)

    @property
    def n_steps(self) -> int:
        return sum(lm.dwell_steps for lm in self.landmarks)


@dataclass(frozen=True)
class SynthDemo:
    """Generated demonstration plus its ground truth."""

    gaze: GazeSeries
    features: FeatureSeries
    boundaries: tuple[int, ...]
    landmark_index: np.ndarray  # per-step index into the spec's landmarks

    def __post_init__(self):
        idx = np.array(self.landmark_index, dtype=np.int64, copy=True)
        idx.setflags(write=False)
        object.__setattr__(self, "landmark_index", idx)
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))


def _auto_bands(count: int) -> tuple[tuple[int, int], ...]:
    # Disjoint intensity bands, one per landmark, spread over 0..255.
    if count > 32:
        raise ValidationError(f"automatic banding supports up to 32 landmarks, got {count}")
    span = 256 // count
    bands = []
    for i in range(count):
        lo = i * span + max(1, span // 8)
        hi = min(lo + max(2, span // 3), i * span + span - 1, 255)
        bands.append((lo, hi))
    return tuple(bands)


def _band_vector(lo: int, hi: int, dim: int) -> np.ndarray:
    # Unit vector with mass on the histogram bins overlapping [lo, hi].
    edges = np.linspace(0.0, 255.0, dim + 1)
    mask = (edges[1:] >= lo) & (edges[:-1] <= hi)
    if not mask.any():
        mask[min(dim - 1, int(lo * dim // 256))] = True
    vec = mask.astype(np.float64)
    return vec / np.linalg.norm(vec)


def _base_positions(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Per-step landmark index, noiseless 4-D target positions, boundary steps.
    dwells = [lm.dwell_steps for lm in spec.landmarks]
    index = np.repeat(np.arange(len(dwells)), dwells)
    boundaries = np.cumsum(dwells)[:-1]
    base = np.empty((index.shape[0], 4), dtype=np.float64)
    start = 0
    for lm in spec.landmarks:
        steps = np.arange(lm.dwell_steps, dtype=np.float64)
        base[start : start + lm.dwell_steps] = lm.position + np.outer(steps, lm.drift_per_step)
        start += lm.dwell_steps
    return index, base, boundaries


def _spec_bands(spec: SynthSpec) -> tuple[tuple[int, int], ...]:
    return spec.feature_profile if spec.feature_profile is not None else _auto_bands(
        len(spec.landmarks)
    )


def generate_demo(spec: SynthSpec) -> SynthDemo:
    """Generate one demonstration: noisy gaze, features, ground truth."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    index, base, boundaries = _base_positions(spec)
    n = base.shape[0]
    if n < 2:
        raise ValidationError("SynthSpec: total dwell must be at least 2 steps")

    gaze = base + rng.normal(0.0, spec.noise_sigma, size=(n, 4))
    starts = np.concatenate(([0], np.cumsum([lm.dwell_steps for lm in spec.landmarks])))
    t = 0
    while t < n:
        if spec.glance_rate > 0 and rng.random() < spec.glance_rate:
            duration = int(rng.integers(1, 4))
            segment = index[t]
            lo = starts[segment] + spec.glance_margin
            hi = starts[segment + 1] - spec.glance_margin
            if t >= lo and t + duration <= hi:
                angle = rng.uniform(0.0, 2.0 * math.pi)
                dist = rng.uniform(*spec.glance_dist)
                offset = dist * np.array(
                    [math.cos(angle), math.sin(angle), math.cos(angle), math.sin(angle)]
                )
                end = t + duration
                gaze[t:end] += offset
                t = end + spec.glance_gap
                continue
        t += 1

    bands = _spec_bands(spec)
    bases = np.array([_band_vector(lo, hi, spec.feature_dim) for lo, hi in bands])
    jitter = rng.normal(0.0, spec.feature_jitter, size=(n, 2, spec.feature_dim))
    vectors = np.clip(bases[index][:, None, :] + jitter, 0.0, None)
    features = normalize_features(FeatureSeries(vectors))

    return SynthDemo(
        gaze=GazeSeries(gaze),
        features=features,
        boundaries=tuple(int(b) for b in boundaries),
        landmark_index=index,
    )


def render_demo(
    spec: SynthSpec,
    demo: SynthDemo,
    image_w: int = 320,
    image_h: int = 180,
    square: int = 96,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Rasterize a demonstration as per-step grayscale frames.

    Each landmark appears as a textured square (pixel intensities drawn
    from the landmark's band) centered at its current position; the rest of
    the frame is black. Returns (left frames, right frames).
    """
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 0xF)))
    index, base, _ = _base_positions(spec)
    bands = _spec_bands(spec)
    half = square // 2
    left_frames, right_frames = [], []
    for t in range(base.shape[0]):
        lo, hi = bands[index[t]]
        for eye, frames in ((0, left_frames), (1, right_frames)):
            cx, cy = base[t, 2 * eye], base[t, 2 * eye + 1]
            if not (0 <= cx < image_w and 0 <= cy < image_h):
                raise ValidationError(
                    f"render_demo: landmark center ({cx:.1f}, {cy:.1f}) outside "
                    f"{image_w}x{image_h} frame"
                )
            img = np.zeros((image_h, image_w), dtype=np.uint8)
            r0, c0 = int(round(cy)) - half, int(round(cx)) - half
            r_lo, r_hi = max(r0, 0), min(r0 + square, image_h)
            c_lo, c_hi = max(c0, 0), min(c0 + square, image_w)
            block = rng.integers(lo, hi + 1, size=(r_hi - r_lo, c_hi - c_lo), dtype=np.int64)
            img[r_lo:r_hi, c_lo:c_hi] = block.astype(np.uint8)
            frames.append(img)
    return left_frames, right_frames


def _derived_seed(seed: int, demo_index: int) -> int:
    return int(np.random.SeedSequence((seed, demo_index)).generate_state(1)[0])


def generate_dataset(
    specs: Sequence[SynthSpec],
    n_per_spec: int,
    out_dir,
    task: str = "synthetic",
    write_features: bool = True,
    render: bool = False,
    image_w: int = 320,
    image_h: int = 180,
    square: int = 96,
) -> Path:
    """Write a dataset to disk; returns the manifest path.

    Layout: one directory per demo with gaze.csv, truth.json and optionally
    features.gzft and frames_{left,right}/ directories, indexed by a
    manifest.json at the root.
    """
    if n_per_spec < 1:
        raise ValidationError(f"generate_dataset: n_per_spec must be >= 1, got {n_per_spec}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    total = len(specs) * n_per_spec
    width = max(3, len(str(max(total - 1, 0))))
    entries = []
    demo_index = 0
    for spec in specs:
        for rep in range(n_per_spec):
            demo_id = f"demo_{demo_index:0{width}d}"
            demo_dir = out / demo_id
            demo_dir.mkdir(exist_ok=True)
            seeded = replace(spec, seed=_derived_seed(spec.seed, rep))
            demo = generate_demo(seeded)
            write_gaze_csv(demo.gaze, demo_dir / "gaze.csv")
            write_truth_json(demo_id, demo.boundaries, demo_dir / "truth.json")
            entry = {
                "id": demo_id,
                "gaze": f"{demo_id}/gaze.csv",
                "features": None,
                "frames_left": None,
                "frames_right": None,
                "ground_truth": f"{demo_id}/truth.json",
            }
            if write_features:
                write_gzft(demo.features, demo_dir / "features.gzft")
                entry["features"] = f"{demo_id}/features.gzft"
            if render:
                left, right = render_demo(
                    seeded, demo, image_w=image_w, image_h=image_h, square=square
                )
                for eye, frames in (("left", left), ("right", right)):
                    frame_dir = demo_dir / f"frames_{eye}"
                    frame_dir.mkdir(exist_ok=True)
                    for t, img in enumerate(frames):
                        write_pgm(img, frame_dir / frame_filename(eye, t))
                    entry[f"frames_{eye}"] = f"{demo_id}/frames_{eye}"
            entries.append(entry)
            demo_index += 1
    manifest_path = out / "manifest.json"
    write_json({"task": task, "demos": entries}, manifest_path)
    return manifest_path


# --- Ready-made task geometries for experiments and tests -------------------


def weak_jump_distance(theta_pos: float = 50.0, factor: float = 0.7) -> float:
    """2-D landmark spacing whose displacement spike equals factor * theta_pos.

    Both eyes move together, so a 2-D jump of d produces a 4-D step of
    d * sqrt(2).
    """
    return factor * theta_pos / math.sqrt(2.0)


def demo_spec(
    seed: int,
    n_landmarks: int = 4,
    jump_range: tuple[float, float] = (150.0, 250.0),
    dwell_range: tuple[int, int] = (40, 60),
    noise_sigma: float = 5.0,
    glance_rate: float = 0.02,
    disparity: float = DEFAULT_DISPARITY,
    bounds: tuple[tuple[float, float], tuple[float, float]] = ((150.0, 1130.0), (120.0, 600.0)),
    feature_dim: int = 64,
) -> SynthSpec:
    """Random task geometry: a landmark chain with jumps in `jump_range` px.

    Geometry (positions and dwells) is derived from the seed, so distinct
    seeds yield distinct but reproducible demonstrations.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    x = rng.uniform(x_lo, x_hi)
    y = rng.uniform(y_lo, y_hi)
    landmarks = []
    for i in range(n_landmarks):
        dwell = int(rng.integers(dwell_range[0], dwell_range[1] + 1))
        landmarks.append(landmark_at(x, y, dwell, disparity=disparity))
        if i == n_landmarks - 1:
            break
        dist = rng.uniform(*jump_range)
        for _ in range(64):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            nx, ny = x + dist * math.cos(angle), y + dist * math.sin(angle)
            if x_lo <= nx <= x_hi and y_lo <= ny <= y_hi:
                break
        else:
            # Fall back to stepping toward the box center, keeping the
            # distance exact so spike magnitudes stay controlled.
            cx, cy = (x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0
            norm = math.hypot(cx - x, cy - y)
            nx, ny = x + dist * (cx - x) / norm, y + dist * (cy - y) / norm
        x, y = nx, ny
    return SynthSpec(
        landmarks=tuple(landmarks),
        noise_sigma=noise_sigma,
        glance_rate=glance_rate,
        feature_dim=feature_dim,
        seed=seed,
    )


def clean_dataset_specs(n_demos: int, seed: int, **kwargs) -> list[SynthSpec]:
    """One spec per demo, all with strong landmark jumps."""
    return [demo_spec(_derived_seed(seed, i), **kwargs) for i in range(n_demos)]


def heterogeneous_dataset_specs(
    seed: int,
    n_clean: int = 90,
    n_weak: int = 10,
    weak_factor: float = 0.7,
    theta_pos: float = 50.0,
    **kwargs,
) -> list[SynthSpec]:
    """Mostly strong demos plus a minority whose jumps sit below threshold.

    The weak demos' displacement spikes equal weak_factor * theta_pos, so
    they are invisible at the default threshold but recoverable by
    refinement. Noise defaults to 2 px here so the attenuated spikes stay
    sharp instead of smearing across neighboring steps.
    """
    kwargs.setdefault("noise_sigma", 2.0)
    weak_jump = weak_jump_distance(theta_pos, weak_factor)
    weak_kwargs = {**kwargs, "jump_range": (weak_jump, weak_jump)}
    clean = [demo_spec(_derived_seed(seed, i), **kwargs) for i in range(n_clean)]
    weak = [
        demo_spec(_derived_seed(seed, n_clean + i), **weak_kwargs) for i in range(n_weak)
    ]
    return clean + weak
