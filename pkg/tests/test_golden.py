"""Byte-stability of the segmentation report on a pinned dataset.

The fixture under data/ was produced once by this pipeline at seed 0 and
frozen; any drift in filtering, scoring, refinement arithmetic, or JSON
formatting shows up as a byte difference.
"""
from pathlib import Path

from gazeseg.core import DetectionConfig
from gazeseg.io import write_segmentation_json
from gazeseg.pipeline import segment_manifest
from gazeseg.synth import generate_dataset, heterogeneous_dataset_specs

GOLDEN = Path(__file__).parent / "data" / "golden_segmentation.json"


def build_golden_report(tmp_path: Path) -> dict:
    specs = heterogeneous_dataset_specs(0, n_clean=4, n_weak=1, dwell_range=(25, 35))
    manifest = generate_dataset(
        specs, 1, tmp_path / "golden_ds", task="golden", write_features=False
    )
    return segment_manifest(manifest, DetectionConfig(mode="pos_only"))


def test_golden_segmentation_bytes(tmp_path):
    out = tmp_path / "seg.json"
    write_segmentation_json(build_golden_report(tmp_path), out)
    assert out.read_bytes() == GOLDEN.read_bytes()
