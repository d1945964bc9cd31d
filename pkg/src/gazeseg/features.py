"""Feature extraction around the gaze and the GZFT embedding container.

Feature vectors come from one of two sources: the built-in deterministic
patch extractor (intensity histogram of a square crop around the filtered
gaze) applied to stored image frames, or precomputed embeddings ingested
from a GZFT file. GZFT v1 layout, little-endian:

    magic 'GZFT' | u32 version=1 | u32 frame_count | u32 dim | u32 n_streams=2
    float32 payload [frame][stream(left=0, right=1)][dim], row-major
"""
from __future__ import annotations

import abc
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ConfigError, FeatureSeries, GazeSeries, GazeSegError, ValidationError
from .signal import normalize_features

GZFT_MAGIC = b"GZFT"
GZFT_VERSION = 1
_GZFT_HEADER = struct.Struct("<4sIIII")

_LUMA = np.array([0.299, 0.587, 0.114])


class GzftError(GazeSegError):
    """Malformed GZFT file; carries the byte offset of the problem."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        self.path = str(path) if path is not None else None
        self.offset = offset
        prefix = f"{self.path}: " if self.path else ""
        suffix = f" (byte offset {offset})" if offset is not None else ""
        super().__init__(f"{prefix}{message}{suffix}")


class ImageError(GazeSegError):
    """Malformed or unsupported image file."""


@dataclass(frozen=True)
class PatchSpec:
    """Geometry of the gaze crop: square side and source image size.

    Patches may overflow the image edges (the crop stays centered on the
    gaze and out-of-bounds pixels are zero-filled), but the side may not
    exceed twice the smaller image dimension.
    """

    patch_b: int
    image_w: int
    image_h: int

    def __post_init__(self):
        if not isinstance(self.patch_b, (int, np.integer)) or self.patch_b < 1:
            raise ValidationError(
                f"PatchSpec: patch_b must be a positive integer, got {self.patch_b!r}"
            )
        if self.image_w < 1 or self.image_h < 1:
            raise ValidationError(
                f"PatchSpec: image size must be positive, got {self.image_w}x{self.image_h}"
            )
        if self.patch_b > 2 * min(self.image_w, self.image_h):
            raise ValidationError(
                f"PatchSpec: patch side {self.patch_b} exceeds twice the smaller image side "
                f"({self.image_w}x{self.image_h})"
            )
        object.__setattr__(self, "patch_b", int(self.patch_b))
        object.__setattr__(self, "image_w", int(self.image_w))
        object.__setattr__(self, "image_h", int(self.image_h))


def crop_patch(image: np.ndarray, center: tuple[float, float], spec: PatchSpec) -> np.ndarray:
    """b x b window of a grayscale image centered at the rounded gaze point.

    `center` is (x, y) in pixel coordinates (x = column, y = row). Pixels
    falling outside the image are zero-filled, so the output is always
    exactly b x b and stays centered on the gaze.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValidationError(f"crop_patch: expected a 2-D grayscale image, got shape {image.shape}")
    if image.shape != (spec.image_h, spec.image_w):
        raise ValidationError(
            f"crop_patch: image shape {image.shape} does not match spec "
            f"{spec.image_h}x{spec.image_w}"
        )
    cx, cy = center
    if not (np.isfinite(cx) and np.isfinite(cy)):
        raise ValidationError(f"crop_patch: non-finite center {center!r}")
    col0 = int(np.rint(cx)) - spec.patch_b // 2
    row0 = int(np.rint(cy)) - spec.patch_b // 2
    b = spec.patch_b
    patch = np.zeros((b, b), dtype=image.dtype)
    r_lo, r_hi = max(row0, 0), min(row0 + b, image.shape[0])
    c_lo, c_hi = max(col0, 0), min(col0 + b, image.shape[1])
    if r_lo < r_hi and c_lo < c_hi:
        patch[r_lo - row0 : r_hi - row0, c_lo - col0 : c_hi - col0] = image[r_lo:r_hi, c_lo:c_hi]
    return patch


def intensity_histogram(patch: np.ndarray, bins: int = 64) -> np.ndarray:
    """L2-normalized intensity histogram of a patch, `bins` equal bins over [0, 255]."""
    if not isinstance(bins, (int, np.integer)) or bins < 2:
        raise ConfigError(f"intensity_histogram: bins must be an integer >= 2, got {bins!r}")
    patch = np.asarray(patch)
    if patch.size == 0:
        raise ValidationError("intensity_histogram: empty patch")
    counts = np.histogram(patch, bins=int(bins), range=(0.0, 255.0))[0].astype(np.float64)
    norm = np.linalg.norm(counts)
    if norm == 0.0:
        raise ValidationError("intensity_histogram: no pixel values inside [0, 255]")
    return counts / norm


class FeatureExtractor(abc.ABC):
    """Maps (image, gaze center) to a fixed-dimension feature vector.

    Implementations must be deterministic: identical inputs give
    bit-identical output.
    """

    dim: int

    @abc.abstractmethod
    def extract(self, image: np.ndarray, center: tuple[float, float]) -> np.ndarray:
        ...


class HistogramExtractor(FeatureExtractor):
    """Built-in extractor: intensity histogram of the gaze crop."""

    def __init__(self, spec: PatchSpec, bins: int = 64):
        if not isinstance(bins, (int, np.integer)) or bins < 2:
            raise ConfigError(f"HistogramExtractor: bins must be an integer >= 2, got {bins!r}")
        self.spec = spec
        self.bins = int(bins)
        self.dim = self.bins

    def extract(self, image: np.ndarray, center: tuple[float, float]) -> np.ndarray:
        return intensity_histogram(crop_patch(image, center, self.spec), self.bins)


def extract_series(
    images_left,
    images_right,
    filtered: GazeSeries,
    spec: PatchSpec,
    extractor: FeatureExtractor | None = None,
) -> FeatureSeries:
    """Extract per-step left/right feature vectors at the filtered gaze.

    Frame sequences must align one-to-one with the gaze series. The result
    is unit-normalized.
    """
    n = len(filtered)
    if len(images_left) != n or len(images_right) != n:
        raise ValidationError(
            f"extract_series: {len(images_left)}/{len(images_right)} frames for {n} gaze steps"
        )
    if extractor is None:
        extractor = HistogramExtractor(spec)
    gaze = filtered.values
    vectors = np.empty((n, 2, extractor.dim), dtype=np.float64)
    for t in range(n):
        vectors[t, 0] = extractor.extract(images_left[t], (gaze[t, 0], gaze[t, 1]))
        vectors[t, 1] = extractor.extract(images_right[t], (gaze[t, 2], gaze[t, 3]))
    return normalize_features(FeatureSeries(vectors))


def write_gzft(features: FeatureSeries, path) -> None:
    """Serialize a feature series to GZFT v1 (float32 payload)."""
    header = _GZFT_HEADER.pack(GZFT_MAGIC, GZFT_VERSION, len(features), features.dim, 2)
    Path(path).write_bytes(header + features.values.astype("<f4").tobytes())


def read_gzft(path) -> FeatureSeries:
    """Decode a GZFT v1 file as stored, without normalization."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _GZFT_HEADER.size:
        raise GzftError(
            f"truncated header: expected {_GZFT_HEADER.size} bytes, got {len(raw)}",
            path,
            offset=len(raw),
        )
    magic, version, frames, dim, streams = _GZFT_HEADER.unpack_from(raw, 0)
    if magic != GZFT_MAGIC:
        raise GzftError(f"bad magic {magic!r}, expected {GZFT_MAGIC!r}", path, offset=0)
    if version != GZFT_VERSION:
        raise GzftError(f"unsupported version {version}, expected {GZFT_VERSION}", path, offset=4)
    if frames < 1:
        raise GzftError(f"frame count must be >= 1, got {frames}", path, offset=8)
    if dim < 1:
        raise GzftError(f"dimension must be >= 1, got {dim}", path, offset=12)
    if streams != 2:
        raise GzftError(f"stream count must be 2, got {streams}", path, offset=16)
    expected = frames * 2 * dim * 4
    actual = len(raw) - _GZFT_HEADER.size
    if actual != expected:
        raise GzftError(
            f"payload has {actual} bytes, expected {expected}",
            path,
            offset=_GZFT_HEADER.size + min(actual, expected),
        )
    flat = np.frombuffer(raw, dtype="<f4", offset=_GZFT_HEADER.size)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise GzftError(
            "non-finite value in payload",
            path,
            offset=_GZFT_HEADER.size + int(bad[0]) * 4,
        )
    values = flat.astype(np.float64).reshape(frames, 2, dim)
    return FeatureSeries(values)


def ingest_embeddings(path) -> FeatureSeries:
    """Load a GZFT v1 file and return its unit-normalized feature series."""
    return normalize_features(read_gzft(path), label=str(path))


# --- PGM / PPM frame files (binary, 8-bit) ---------------------------------


def frame_filename(eye: str, t: int, ext: str = "pgm") -> str:
    """Canonical name of the frame file for one eye and time step."""
    if eye not in ("left", "right"):
        raise ValidationError(f"frame_filename: eye must be 'left' or 'right', got {eye!r}")
    return f"frame_{eye}_{t:06d}.{ext}"


def _parse_pnm_header(raw: bytes, path) -> tuple[bytes, int, int, int, int]:
    # Returns (magic, width, height, maxval, payload offset). Header tokens
    # may be separated by any whitespace; '#' starts a comment to end of line.
    if len(raw) < 2 or raw[:2] not in (b"P5", b"P6"):
        raise ImageError(f"{path}: not a binary PGM/PPM file")
    magic = raw[:2]
    tokens: list[int] = []
    i = 2
    while len(tokens) < 3:
        if i >= len(raw):
            raise ImageError(f"{path}: truncated header")
        c = raw[i : i + 1]
        if c == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < len(raw) and raw[j : j + 1].isdigit():
                j += 1
            tokens.append(int(raw[i:j]))
            i = j
        else:
            raise ImageError(f"{path}: unexpected byte {c!r} in header")
    if i >= len(raw) or not raw[i : i + 1].isspace():
        raise ImageError(f"{path}: missing whitespace after maxval")
    i += 1  # exactly one whitespace byte before the payload
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise ImageError(f"{path}: invalid image size {width}x{height}")
    if not (0 < maxval <= 255):
        raise ImageError(f"{path}: only 8-bit images supported, maxval {maxval}")
    return magic, width, height, maxval, i


def read_image(path) -> np.ndarray:
    """Read a binary PGM (P5) or PPM (P6) frame as grayscale uint8.

    Color frames are luma-converted with 0.299 R + 0.587 G + 0.114 B, rounded.
    """
    path = Path(path)
    raw = path.read_bytes()
    magic, width, height, _maxval, offset = _parse_pnm_header(raw, path)
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = raw[offset : offset + expected]
    if len(payload) != expected:
        raise ImageError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    if channels == 1:
        return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    rgb = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).astype(np.float64)
    gray = np.rint(rgb @ _LUMA)
    return np.clip(gray, 0, 255).astype(np.uint8)


def write_pgm(image: np.ndarray, path) -> None:
    """Write a grayscale uint8 image as binary PGM (P5)."""
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValidationError(f"write_pgm: expected a 2-D uint8 image, got {image.dtype} {image.shape}")
    h, w = image.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + image.tobytes())


def write_ppm(image: np.ndarray, path) -> None:
    """Write an RGB uint8 image as binary PPM (P6)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValidationError(f"write_ppm: expected an (h, w, 3) uint8 image, got {image.dtype} {image.shape}")
    h, w = image.shape[:2]
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + image.tobytes())


def read_frame_dir(directory, eye: str, expected: int) -> list[np.ndarray]:
    """Load the frame sequence for one eye: frame_{eye}_{t:06d}.pgm or .ppm."""
    directory = Path(directory)
    frames = []
    for t in range(expected):
        pgm = directory / frame_filename(eye, t, "pgm")
        ppm = directory / frame_filename(eye, t, "ppm")
        if pgm.exists():
            frames.append(read_image(pgm))
        elif ppm.exists():
            frames.append(read_image(ppm))
        else:
            raise ImageError(f"{directory}: missing frame file for eye {eye!r}, step {t}")
    return frames
