"""Dataset file formats: gaze CSV, manifests, ground truth and result JSON.

Readers reject malformed input instead of repairing it. Floats in the gaze
CSV are written with 17 significant digits so write-read round trips are
exact; JSON floats use Python's shortest round-trippable representation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import GazeSegError, GazeSeries, ValidationError
from .refine import RefinementReport

GAZE_HEADER = "t,left_x,left_y,right_x,right_y"

REPORT_KEYS = ("task", "s", "demos")
REPORT_DEMO_KEYS = (
    "id",
    "status",
    "change_points",
    "theta_pos_final",
    "theta_feat_final",
    "iterations",
)

_MANIFEST_KEYS = {"task", "demos"}
_MANIFEST_DEMO_KEYS = {"id", "gaze", "features", "frames_left", "frames_right", "ground_truth"}


class ParseError(GazeSegError):
    """Malformed text input; carries the file path and 1-based line number."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        prefix = f"{self.path}: " if self.path else ""
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{where}{message}")


class ManifestError(GazeSegError):
    """Manifest violates the strict dataset-index schema."""


def write_gaze_csv(series: GazeSeries, path) -> None:
    lines = [GAZE_HEADER]
    for t, row in enumerate(series.values):
        lines.append(f"{t},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{row[3]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_gaze_csv(path, rate_hz: float = 10.0) -> GazeSeries:
    """Parse a gaze CSV; time steps must run 0..T with no gaps."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != GAZE_HEADER:
        raise ParseError(f"missing or malformed header, expected {GAZE_HEADER!r}", path, line=1)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(f"expected 5 comma-separated fields, got {len(parts)}", path, lineno)
        try:
            t = int(parts[0])
        except ValueError:
            raise ParseError(f"time step is not an integer: {parts[0]!r}", path, lineno) from None
        if t != len(rows):
            raise ParseError(
                f"time step {t} breaks the dense 0..T sequence (expected {len(rows)})", path, lineno
            )
        try:
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {parts[1:]!r}", path, lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"non-finite coordinate in {parts[1:]!r}", path, lineno)
        rows.append(values)
    if len(rows) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(rows)}", path, len(lines))
    return GazeSeries(np.array(rows), rate_hz=rate_hz)


def write_json(obj, path) -> None:
    """UTF-8, 2-space indented, newline-terminated JSON."""
    Path(path).write_text(
        json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_truth_json(demo_id: str, boundaries: Sequence[int], path) -> None:
    write_json({"demo_id": demo_id, "boundaries": [int(b) for b in boundaries]}, path)


def read_truth_json(path) -> tuple[str, tuple[int, ...]]:
    obj = read_json(path)
    if not isinstance(obj, dict) or set(obj) != {"demo_id", "boundaries"}:
        raise ParseError("ground truth must have exactly the keys demo_id, boundaries", path)
    return str(obj["demo_id"]), tuple(int(b) for b in obj["boundaries"])


@dataclass(frozen=True)
class ManifestEntry:
    demo_id: str
    gaze: Path
    features: Path | None = None
    frames_left: Path | None = None
    frames_right: Path | None = None
    ground_truth: Path | None = None


@dataclass(frozen=True)
class Manifest:
    task: str
    demos: tuple[ManifestEntry, ...]


def _resolve(base: Path, value) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def read_manifest(path) -> Manifest:
    """Strict dataset index: unknown keys are rejected to catch typos.

    Relative paths resolve against the manifest's directory; absolute paths
    pass through unchanged.
    """
    path = Path(path)
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    unknown = set(obj) - _MANIFEST_KEYS
    if unknown:
        raise ManifestError(f"{path}: unknown manifest key(s): {sorted(unknown)}")
    if "task" not in obj or "demos" not in obj:
        raise ManifestError(f"{path}: manifest requires 'task' and 'demos'")
    base = path.parent
    entries = []
    for i, demo in enumerate(obj["demos"]):
        if not isinstance(demo, dict):
            raise ManifestError(f"{path}: demo entry {i} is not an object")
        unknown = set(demo) - _MANIFEST_DEMO_KEYS
        if unknown:
            raise ManifestError(f"{path}: demo entry {i}: unknown key(s): {sorted(unknown)}")
        if "id" not in demo or demo.get("gaze") is None:
            raise ManifestError(f"{path}: demo entry {i}: 'id' and 'gaze' are required")
        entries.append(
            ManifestEntry(
                demo_id=str(demo["id"]),
                gaze=_resolve(base, demo["gaze"]),
                features=_resolve(base, demo.get("features")),
                frames_left=_resolve(base, demo.get("frames_left")),
                frames_right=_resolve(base, demo.get("frames_right")),
                ground_truth=_resolve(base, demo.get("ground_truth")),
            )
        )
    return Manifest(task=str(obj["task"]), demos=tuple(entries))


def _check_report_schema(report: Mapping) -> None:
    if tuple(report.keys()) != REPORT_KEYS:
        raise ValidationError(
            f"segmentation report keys must be {REPORT_KEYS} in order, got {tuple(report.keys())}"
        )
    for demo in report["demos"]:
        if tuple(demo.keys()) != REPORT_DEMO_KEYS:
            raise ValidationError(
                f"segmentation demo keys must be {REPORT_DEMO_KEYS} in order, "
                f"got {tuple(demo.keys())}"
            )


def write_segmentation_json(report, path, task: str = "task") -> None:
    """Write a segmentation report (RefinementReport or schema-shaped mapping)."""
    if isinstance(report, RefinementReport):
        report = report.to_report_dict(task)
    _check_report_schema(report)
    write_json(report, path)


def read_segmentation_json(path) -> dict:
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise ParseError("segmentation report must be a JSON object", path)
    _check_report_schema(obj)
    return obj
