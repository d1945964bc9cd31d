"""Dataset-consistency refinement of detected change points.

The dataset's modal change-point count is taken as the task's true number
of transitions; each demonstration's thresholds are then scaled
geometrically (down while too few points are found, then up while too
many) until its count matches, or the iteration budget runs out and the
demonstration is excluded.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

from .core import (
    STATUS_EXCLUDED,
    STATUS_OK,
    ChangePointSet,
    ChangeScores,
    ConfigError,
    DetectionConfig,
    ValidationError,
)
from .detect import detect


@dataclass(frozen=True)
class DemoRefinement:
    """Refinement outcome for a single demonstration."""

    demo_id: str
    points: ChangePointSet
    theta_pos: float
    theta_feat: float
    iterations: int
    status: str


@dataclass(frozen=True)
class RefinementReport:
    """Dataset-level refinement result.

    counts_histogram maps pre-refinement change-point counts to their
    frequency; s is the modal count every demonstration was driven toward.
    """

    s: int
    per_demo: tuple[DemoRefinement, ...]
    counts_histogram: dict[int, int]

    def __post_init__(self):
        for demo in self.per_demo:
            if demo.status == STATUS_OK and len(demo.points) != self.s:
                raise ValidationError(
                    f"RefinementReport: demo {demo.demo_id} has status ok with "
                    f"{len(demo.points)} points, expected s={self.s}"
                )

    def to_report_dict(self, task: str) -> dict:
        """Plain mapping matching the segmentation JSON schema."""
        return {
            "task": task,
            "s": int(self.s),
            "demos": [
                {
                    "id": demo.demo_id,
                    "status": demo.status,
                    "change_points": [int(p) for p in demo.points],
                    "theta_pos_final": demo.theta_pos,
                    "theta_feat_final": demo.theta_feat,
                    "iterations": demo.iterations,
                }
                for demo in self.per_demo
            ],
        }


def modal_count(detections: Sequence[ChangePointSet | int]) -> int:
    """Most frequent change-point count across demos; ties go to the smaller count."""
    if len(detections) == 0:
        raise ValidationError("modal_count: empty dataset")
    counts = Counter(
        len(d) if isinstance(d, ChangePointSet) else int(d) for d in detections
    )
    top = max(counts.values())
    return min(c for c, freq in counts.items() if freq == top)


def refine_demo(
    scores: ChangeScores, s: int, config: DetectionConfig, demo_id: str = "demo"
) -> DemoRefinement:
    """Scale thresholds for one demonstration until it has exactly s points.

    Starting from the config's default thresholds: while the detected count
    is below s, both thresholds shrink by scale_down per iteration; then,
    while it is above s, both grow by scale_up. Each loop runs at most
    max_iters iterations. If the count is not exactly s on exit the demo is
    marked excluded (its last-visited points are kept for inspection).
    """
    if not config.refine:
        raise ConfigError("refine_demo: refinement is disabled in this config")
    if not isinstance(s, int) or s < 0:
        raise ValidationError(f"refine_demo: target count must be a non-negative integer, got {s!r}")
    theta_pos = config.theta_pos
    theta_feat = config.theta_feat
    points = detect(scores, theta_pos, theta_feat, config.mode)
    lowered = 0
    while len(points) < s and lowered < config.max_iters:
        theta_pos *= config.scale_down
        theta_feat *= config.scale_down
        points = detect(scores, theta_pos, theta_feat, config.mode)
        lowered += 1
    raised = 0
    while len(points) > s and raised < config.max_iters:
        theta_pos *= config.scale_up
        theta_feat *= config.scale_up
        points = detect(scores, theta_pos, theta_feat, config.mode)
        raised += 1
    status = STATUS_OK if len(points) == s else STATUS_EXCLUDED
    return DemoRefinement(
        demo_id=demo_id,
        points=replace(points, refined=True),
        theta_pos=theta_pos,
        theta_feat=theta_feat,
        iterations=lowered + raised,
        status=status,
    )


def refine_dataset(
    demos: Sequence[ChangeScores],
    config: DetectionConfig,
    ids: Sequence[str] | None = None,
) -> RefinementReport:
    """Refine every demonstration of one task toward the dataset's modal count.

    Thresholds reset to the config defaults for each demonstration, so the
    outcome for a demo is independent of every other demo (only the modal
    count couples them).
    """
    if not config.refine:
        raise ConfigError("refine_dataset: refinement is disabled in this config")
    if len(demos) == 0:
        raise ValidationError("refine_dataset: empty dataset")
    if ids is None:
        ids = [f"demo_{i:03d}" for i in range(len(demos))]
    elif len(ids) != len(demos):
        raise ValidationError(
            f"refine_dataset: {len(ids)} ids for {len(demos)} demos"
        )
    initial = [detect(sc, config.theta_pos, config.theta_feat, config.mode) for sc in demos]
    histogram = dict(sorted(Counter(len(c) for c in initial).items()))
    s = modal_count(initial)
    per_demo = tuple(
        refine_demo(sc, s, config, demo_id=demo_id) for demo_id, sc in zip(ids, demos)
    )
    return RefinementReport(s=s, per_demo=per_demo, counts_histogram=histogram)
