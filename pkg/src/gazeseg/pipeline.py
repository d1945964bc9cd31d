"""End-to-end segmentation pipeline shared by the CLI and the bindings.

The CLI is a thin shell over these functions; every behavior here is
reachable as a library call with identical results.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Mapping, Sequence

from .core import (
    STATUS_EXCLUDED,
    STATUS_OK,
    ChangeScores,
    ConfigError,
    DetectionConfig,
    FeatureSeries,
    GazeSegError,
    GazeSeries,
    ValidationError,
)
from .detect import detect
from .features import PatchSpec, extract_series, ingest_embeddings, read_frame_dir
from .io import Manifest, ManifestEntry, read_gaze_csv, read_manifest, read_truth_json
from .refine import modal_count, refine_dataset
from .signal import compute_scores, median_filter, normalize_features


class PipelineError(GazeSegError):
    """Error while processing a demonstration; names the demo and stage."""


def demo_scores(
    gaze: GazeSeries, config: DetectionConfig, features: FeatureSeries | None = None
) -> ChangeScores:
    """Median-filter a demonstration and compute both change-score series.

    Features are ignored in pos_only mode and unit-normalized otherwise.
    """
    filtered = median_filter(gaze, config.window_w)
    if config.mode == "pos_only" or features is None:
        return compute_scores(filtered, None)
    return compute_scores(filtered, normalize_features(features))


def _entry_scores(entry: ManifestEntry, config: DetectionConfig) -> ChangeScores:
    stage = "gaze"
    try:
        gaze = read_gaze_csv(entry.gaze)
        stage = "filter"
        filtered = median_filter(gaze, config.window_w)
        features = None
        if config.mode != "pos_only":
            stage = "features"
            if entry.features is not None:
                features = ingest_embeddings(entry.features)
            elif entry.frames_left is not None and entry.frames_right is not None:
                left = read_frame_dir(entry.frames_left, "left", len(gaze))
                right = read_frame_dir(entry.frames_right, "right", len(gaze))
                spec = PatchSpec(
                    patch_b=config.patch_b,
                    image_w=left[0].shape[1],
                    image_h=left[0].shape[0],
                )
                features = extract_series(left, right, filtered, spec)
            else:
                raise ConfigError(
                    f"mode {config.mode!r} needs feature or frame data; this demo has neither "
                    "(rerun with --mode pos-only or add features/frames to the manifest)"
                )
        stage = "scores"
        return compute_scores(filtered, features)
    except (GazeSegError, OSError) as exc:
        raise PipelineError(f"demo {entry.demo_id} [{stage}]: {exc}") from exc


def manifest_scores(
    manifest: Manifest, config: DetectionConfig, jobs: int = 1
) -> list[ChangeScores]:
    """Score every demonstration in manifest order; demos are independent."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda e: _entry_scores(e, config), manifest.demos))
    return [_entry_scores(entry, config) for entry in manifest.demos]


def segment_dataset(
    ids: Sequence[str],
    scores: Sequence[ChangeScores],
    config: DetectionConfig,
    task: str,
) -> dict:
    """Detect (and optionally refine) change points for a scored dataset.

    Returns the segmentation report as a schema-shaped mapping. Without
    refinement, every demo keeps its raw detection at the default
    thresholds and s is reported for information only.
    """
    if len(ids) != len(scores):
        raise ValidationError(f"segment_dataset: {len(ids)} ids for {len(scores)} score series")
    if len(scores) == 0:
        raise ValidationError("segment_dataset: empty dataset")
    if config.refine:
        return refine_dataset(scores, config, ids=ids).to_report_dict(task)
    detections = [detect(sc, config.theta_pos, config.theta_feat, config.mode) for sc in scores]
    s = modal_count(detections)
    return {
        "task": task,
        "s": int(s),
        "demos": [
            {
                "id": demo_id,
                "status": STATUS_OK,
                "change_points": [int(p) for p in points],
                "theta_pos_final": config.theta_pos,
                "theta_feat_final": config.theta_feat,
                "iterations": 0,
            }
            for demo_id, points in zip(ids, detections)
        ],
    }


def segment_manifest(manifest, config: DetectionConfig, jobs: int = 1) -> dict:
    """Full pipeline for a dataset on disk: filter, score, detect, refine."""
    if not isinstance(manifest, Manifest):
        manifest = read_manifest(manifest)
    scores = manifest_scores(manifest, config, jobs=jobs)
    ids = [entry.demo_id for entry in manifest.demos]
    return segment_dataset(ids, scores, config, manifest.task)


def count_excluded(report: Mapping) -> int:
    return sum(1 for demo in report["demos"] if demo["status"] == STATUS_EXCLUDED)


def load_truths(manifest) -> dict[str, tuple[int, ...]]:
    """Ground-truth boundary lists keyed by demo id."""
    if not isinstance(manifest, Manifest):
        manifest = read_manifest(manifest)
    truths: dict[str, tuple[int, ...]] = {}
    for entry in manifest.demos:
        if entry.ground_truth is None:
            raise ValidationError(f"demo {entry.demo_id}: no ground truth in manifest")
        demo_id, boundaries = read_truth_json(entry.ground_truth)
        if demo_id != entry.demo_id:
            raise ValidationError(
                f"ground truth id {demo_id!r} does not match manifest id {entry.demo_id!r}"
            )
        truths[entry.demo_id] = boundaries
    return truths


def evaluate_report(
    report: Mapping, truths: Mapping[str, Sequence[int]], tolerance_steps: int
) -> dict:
    """Compare a segmentation report against ground truth.

    A demo is correct when its status is ok, its change-point count matches
    the truth, and each point lies within tolerance_steps of its in-order
    truth partner. Boundary errors are collected from status-ok demos with
    matching counts.
    """
    if tolerance_steps < 0:
        raise ValidationError(f"tolerance_steps must be >= 0, got {tolerance_steps}")
    demos_out = []
    majority = minority = excluded = 0
    all_errors: list[int] = []
    for demo in report["demos"]:
        demo_id = demo["id"]
        if demo_id not in truths:
            raise ValidationError(f"no ground truth for demo {demo_id!r}")
        truth = list(truths[demo_id])
        points = list(demo["change_points"])
        status = demo["status"]
        errors = None
        correct = False
        if len(points) == len(truth):
            errors = [abs(int(p) - int(t)) for p, t in zip(points, truth)]
            correct = status == STATUS_OK and all(e <= tolerance_steps for e in errors)
            if status == STATUS_OK:
                all_errors.extend(errors)
        if status == STATUS_EXCLUDED:
            excluded += 1
        majority += correct
        minority += not correct
        demos_out.append(
            {"id": demo_id, "correct": bool(correct), "status": status, "errors": errors}
        )
    unmatched = set(truths) - {d["id"] for d in report["demos"]}
    if unmatched:
        raise ValidationError(f"ground truth for unknown demo ids: {sorted(unmatched)}")
    return {
        "n_demos": len(demos_out),
        "tolerance_steps": int(tolerance_steps),
        "majority": majority,
        "minority": minority,
        "excluded": excluded,
        "boundary_error_mean": (sum(all_errors) / len(all_errors)) if all_errors else 0.0,
        "boundary_error_max": max(all_errors) if all_errors else 0,
        "demos": demos_out,
    }


def sweep_tolerance(window_w: int) -> int:
    """Evaluation tolerance for a sweep cell: the filter's edge delay bound."""
    return max(1, (window_w + 1) // 2)


def sweep_grid(
    manifest,
    config: DetectionConfig,
    w_values: Sequence[int],
    theta_values: Sequence[float],
    refine: bool,
    jobs: int = 1,
) -> list[dict]:
    """Run segment+eval per (w, theta_pos) cell; failing cells record -1.

    Scores are computed once per window width and reused across thresholds;
    cells are logically independent and emitted in grid order.
    """
    if len(w_values) == 0 or len(theta_values) == 0:
        raise ValidationError("sweep_grid: empty grid")
    if not isinstance(manifest, Manifest):
        manifest = read_manifest(manifest)
    truths = load_truths(manifest)
    ids = [entry.demo_id for entry in manifest.demos]
    rows = []
    for w in w_values:
        try:
            scores = manifest_scores(manifest, replace(config, window_w=w), jobs=jobs)
            scores_err = None
        except Exception as exc:  # a cell failure is recorded, not raised
            scores, scores_err = None, exc
        for theta in theta_values:
            row = {"w": int(w), "theta_pos": float(theta), "refine": bool(refine)}
            try:
                if scores_err is not None:
                    raise scores_err
                cell_config = replace(
                    config, window_w=w, theta_pos=theta, refine=refine
                )
                report = segment_dataset(ids, scores, cell_config, manifest.task)
                metrics = evaluate_report(report, truths, sweep_tolerance(int(w)))
                row["n_correct"] = metrics["majority"]
                row["n_excluded"] = metrics["excluded"]
            except Exception:
                row["n_correct"] = -1
                row["n_excluded"] = -1
            rows.append(row)
    return rows
