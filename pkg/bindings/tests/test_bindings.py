import json
import subprocess
import sys

import numpy as np
import pytest

import gazeseg_bindings as gb
from gazeseg.core import DetectionConfig
from gazeseg.detect import detect as lib_detect
from gazeseg.features import read_gzft
from gazeseg.io import read_gaze_csv, read_manifest, read_segmentation_json
from gazeseg.pipeline import demo_scores
from gazeseg.synth import demo_spec, generate_demo


def normalized(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def run_cli(*args) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "gazeseg.cli", *args],
        capture_output=True,
        text=True,
    )


class TestDetect:
    def test_constant_gaze_yields_no_points(self):
        gaze = np.tile([100.0, 100.0, 90.0, 100.0], (50, 1))
        assert gb.detect(gaze) == []

    def test_unknown_config_key_named(self):
        gaze = np.zeros((10, 4))
        with pytest.raises(TypeError, match="theta_poss"):
            gb.detect(gaze, theta_poss=10.0)

    def test_bad_shapes_named(self):
        with pytest.raises(ValueError, match="gaze"):
            gb.detect(np.zeros((10, 3)))
        with pytest.raises(ValueError, match="features"):
            gb.detect(np.zeros((10, 4)), features=np.zeros((10, 3, 2)))

    def test_matches_library_pipeline_bitwise(self):
        demo = generate_demo(demo_spec(77))
        config = DetectionConfig(mode="both")
        expected = lib_detect(
            demo_scores(demo.gaze, config, demo.features),
            config.theta_pos,
            config.theta_feat,
            config.mode,
        )
        result = gb.detect(demo.gaze.values, demo.features.values, mode="both")
        assert result == list(expected.points)

    def test_input_arrays_copied_not_aliased(self):
        demo = generate_demo(demo_spec(78))
        gaze = demo.gaze.values.copy()
        first = gb.detect(gaze, mode="pos_only")
        gaze[:] = 0.0
        assert gb.detect(demo.gaze.values.copy(), mode="pos_only") == first

    def test_config_mapping_and_overrides_merge(self):
        demo = generate_demo(demo_spec(79))
        base = {"mode": "pos_only", "theta_pos": 40.0}
        a = gb.detect(demo.gaze.values, config=base)
        b = gb.detect(demo.gaze.values, config={"mode": "pos_only"}, theta_pos=40.0)
        assert a == b


class TestRefineDataset:
    def test_homogeneous_dataset_all_ok(self):
        demos = [generate_demo(demo_spec(i, glance_rate=0.0)) for i in range(5)]
        report = gb.refine_dataset(
            [d.gaze.values for d in demos], mode="pos_only", task="t"
        )
        assert report["s"] == 3
        assert all(d["status"] == "ok" for d in report["demos"])
        for entry, demo in zip(report["demos"], demos):
            assert entry["change_points"] == list(demo.boundaries)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            gb.refine_dataset([], mode="pos_only")

    def test_accepts_tuples_and_mappings(self):
        demo = generate_demo(demo_spec(80, glance_rate=0.0))
        as_tuple = gb.refine_dataset(
            [(demo.gaze.values, demo.features.values)], mode="both"
        )
        as_mapping = gb.refine_dataset(
            [{"gaze": demo.gaze.values, "features": demo.features.values}], mode="both"
        )
        assert as_tuple["demos"] == as_mapping["demos"]

    def test_unknown_demo_key_rejected(self):
        demo = generate_demo(demo_spec(81))
        with pytest.raises(TypeError, match="gazee"):
            gb.refine_dataset([{"gaze": demo.gaze.values, "gazee": None}])


class TestCliParity:
    """Binding outputs must be byte-equal to CLI outputs after JSON normalization."""

    def test_refine_dataset_parity_on_a2(self, a2_manifest, tmp_path):
        out = tmp_path / "cli_seg.json"
        proc = run_cli(
            "segment", str(a2_manifest), "--mode", "pos-only", "--refine", "--out", str(out)
        )
        assert proc.returncode == 0, proc.stderr
        cli_report = read_segmentation_json(out)

        manifest = read_manifest(a2_manifest)
        demos = [read_gaze_csv(entry.gaze).values for entry in manifest.demos]
        ids = [entry.demo_id for entry in manifest.demos]
        report = gb.refine_dataset(
            demos, mode="pos_only", ids=ids, task=manifest.task
        )
        assert normalized(report) == normalized(cli_report)

    def test_detect_parity_on_a2(self, a2_manifest, tmp_path):
        out = tmp_path / "cli_seg.json"
        proc = run_cli(
            "segment", str(a2_manifest), "--mode", "pos-only", "--no-refine", "--out", str(out)
        )
        assert proc.returncode == 0, proc.stderr
        cli_points = {
            demo["id"]: demo["change_points"]
            for demo in read_segmentation_json(out)["demos"]
        }
        manifest = read_manifest(a2_manifest)
        for entry in manifest.demos:
            gaze = read_gaze_csv(entry.gaze).values
            points = gb.detect(gaze, mode="pos_only")
            assert normalized(points) == normalized(cli_points[entry.demo_id])

    def test_detect_parity_with_features_on_a2(self, a2_manifest, tmp_path):
        out = tmp_path / "cli_seg.json"
        proc = run_cli(
            "segment", str(a2_manifest), "--mode", "both", "--no-refine", "--out", str(out)
        )
        assert proc.returncode == 0, proc.stderr
        cli_points = {
            demo["id"]: demo["change_points"]
            for demo in read_segmentation_json(out)["demos"]
        }
        manifest = read_manifest(a2_manifest)
        for entry in manifest.demos[:10]:
            gaze = read_gaze_csv(entry.gaze).values
            features = read_gzft(entry.features).values
            points = gb.detect(gaze, features, mode="both")
            assert normalized(points) == normalized(cli_points[entry.demo_id])

    def test_segment_manifest_parity_on_a2(self, a2_manifest, tmp_path):
        out = tmp_path / "cli_seg.json"
        proc = run_cli(
            "segment", str(a2_manifest), "--mode", "pos-only", "--refine", "--out", str(out)
        )
        assert proc.returncode == 0, proc.stderr
        report = gb.segment_manifest(a2_manifest, mode="pos_only", refine=True)
        assert normalized(report) == normalized(read_segmentation_json(out))
