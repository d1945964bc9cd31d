import math

import numpy as np
import pytest

from gazeseg.core import DetectionConfig, ValidationError
from gazeseg.detect import detect
from gazeseg.io import read_gaze_csv, read_manifest, read_truth_json
from gazeseg.pipeline import demo_scores
from gazeseg.signal import median_filter, score_feat, score_pos
from gazeseg.synth import (
    Landmark,
    SynthSpec,
    clean_dataset_specs,
    demo_spec,
    generate_dataset,
    generate_demo,
    heterogeneous_dataset_specs,
    landmark_at,
    render_demo,
    weak_jump_distance,
)


class TestSpecs:
    def test_landmark_validation(self):
        with pytest.raises(ValidationError):
            Landmark(position=(1, 2, 3), dwell_steps=5)
        with pytest.raises(ValidationError):
            Landmark(position=(1, 2, 3, 4), dwell_steps=0)

    def test_spec_validation(self):
        lm = landmark_at(100, 100, 10)
        with pytest.raises(ValidationError):
            SynthSpec(landmarks=())
        with pytest.raises(ValidationError):
            SynthSpec(landmarks=(lm,), glance_rate=1.0)
        with pytest.raises(ValidationError):
            SynthSpec(landmarks=(lm,), noise_sigma=-1.0)
        with pytest.raises(ValidationError):
            SynthSpec(landmarks=(lm,), feature_profile=((0, 300),))

    def test_disparity_offsets_right_eye(self):
        lm = landmark_at(200, 150, 10, disparity=10.0)
        assert lm.position.tolist() == [200, 150, 190, 150]


class TestGenerateDemo:
    def test_single_landmark_degenerate_task(self):
        spec = SynthSpec(landmarks=(landmark_at(300, 200, 40),), noise_sigma=0.0)
        demo = generate_demo(spec)
        assert demo.boundaries == ()
        assert np.all(demo.gaze.values == demo.gaze.values[0])
        scores = score_pos(median_filter(demo.gaze, 20))
        assert np.all(scores == 0.0)

    def test_two_landmarks_boundary_and_spike(self):
        spec = SynthSpec(
            landmarks=(landmark_at(300, 200, 50), landmark_at(500, 200, 50)),
            noise_sigma=0.0,
        )
        demo = generate_demo(spec)
        assert demo.boundaries == (50,)
        scores = score_pos(median_filter(demo.gaze, 20))
        assert scores[50] == pytest.approx(200.0 * math.sqrt(2.0))

    def test_boundary_count_is_landmark_count_minus_one(self):
        rng = np.random.default_rng(60)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            spec = demo_spec(int(rng.integers(1 << 30)), n_landmarks=n)
            demo = generate_demo(spec)
            assert len(demo.boundaries) == n - 1
            assert len(np.unique(demo.landmark_index)) == n

    def test_noisy_demo_recovered_within_half_window(self):
        spec = demo_spec(99, noise_sigma=5.0, glance_rate=0.02)
        demo = generate_demo(spec)
        config = DetectionConfig(mode="pos_only")
        scores = demo_scores(demo.gaze, config)
        points = detect(scores, config.theta_pos, config.theta_feat, "pos_only")
        assert len(points) == len(demo.boundaries)
        for got, want in zip(points.points, demo.boundaries):
            assert abs(got - want) <= config.window_w // 2

    def test_deterministic_given_seed(self):
        spec = demo_spec(123)
        a = generate_demo(spec)
        b = generate_demo(spec)
        assert np.array_equal(a.gaze.values, b.gaze.values)
        assert np.array_equal(a.features.values, b.features.values)
        assert a.boundaries == b.boundaries

    def test_landmark_drift_moves_target(self):
        lm = landmark_at(100, 100, 10, drift=(2.0, 0.0))
        spec = SynthSpec(landmarks=(lm,), noise_sigma=0.0)
        demo = generate_demo(spec)
        assert demo.gaze.values[9, 0] == pytest.approx(118.0)
        # drift is slow relative to the jump threshold
        scores = score_pos(median_filter(demo.gaze, 4))
        assert np.all(scores < 5.0)

    def test_feature_bands_separate_landmarks(self):
        spec = SynthSpec(
            landmarks=(landmark_at(100, 100, 30), landmark_at(400, 300, 30)),
            noise_sigma=0.0,
        )
        demo = generate_demo(spec)
        scores = score_feat(demo.features)
        assert scores[30] > 0.5  # cross-band transition
        within = np.delete(scores, 30)
        assert np.max(within) < 0.03  # jitter stays below the default threshold

    def test_glances_respect_margin(self):
        spec = SynthSpec(
            landmarks=(landmark_at(300, 300, 60), landmark_at(600, 300, 60)),
            noise_sigma=0.0,
            glance_rate=0.2,
            glance_margin=16,
        )
        demo = generate_demo(spec)
        offsets = np.linalg.norm(
            demo.gaze.values - np.repeat([[300, 300, 290, 300], [600, 300, 590, 300]], 60, axis=0),
            axis=1,
        )
        glance_steps = np.flatnonzero(offsets > 100.0)
        assert glance_steps.size > 0, "glances should occur at rate 0.2"
        for t in glance_steps:
            segment_start = 0 if t < 60 else 60
            segment_end = 60 if t < 60 else 120
            assert t - segment_start >= 16
            assert segment_end - t > 16


class TestGenerateDataset:
    def test_dataset_layout_and_counts(self, tmp_path):
        spec = demo_spec(5, n_landmarks=3, dwell_range=(20, 25))
        manifest_path = generate_dataset([spec], 4, tmp_path / "ds", task="tiny")
        manifest = read_manifest(manifest_path)
        assert manifest.task == "tiny"
        assert len(manifest.demos) == 4
        for entry in manifest.demos:
            gaze = read_gaze_csv(entry.gaze)
            demo_id, boundaries = read_truth_json(entry.ground_truth)
            assert demo_id == entry.demo_id
            assert len(boundaries) == 2
            assert entry.features is not None and entry.features.exists()
            assert len(gaze) >= 40

    def test_rerun_byte_identical(self, tmp_path):
        spec = demo_spec(5, n_landmarks=3, dwell_range=(20, 25))
        first = generate_dataset([spec], 2, tmp_path / "a")
        second = generate_dataset([spec], 2, tmp_path / "b")
        for name in ("demo_000/gaze.csv", "demo_001/gaze.csv", "demo_000/features.gzft"):
            assert (first.parent / name).read_bytes() == (second.parent / name).read_bytes()

    def test_rendered_frames_consumable(self, tmp_path):
        spec = SynthSpec(
            landmarks=(landmark_at(100, 90, 20), landmark_at(220, 90, 20)),
            noise_sigma=0.0,
            seed=3,
        )
        manifest_path = generate_dataset(
            [spec], 1, tmp_path / "ds", write_features=False, render=True
        )
        manifest = read_manifest(manifest_path)
        entry = manifest.demos[0]
        assert entry.frames_left is not None and entry.frames_right is not None
        from gazeseg.features import read_frame_dir

        frames = read_frame_dir(entry.frames_left, "left", 40)
        assert frames[0].shape == (180, 320)

    def test_render_rejects_out_of_frame_landmarks(self):
        spec = SynthSpec(landmarks=(landmark_at(5000, 90, 4),), noise_sigma=0.0)
        demo = generate_demo(spec)
        with pytest.raises(ValidationError):
            render_demo(spec, demo)


class TestPresets:
    def test_weak_jump_distance_targets_spike(self):
        d = weak_jump_distance(50.0, 0.7)
        assert d * math.sqrt(2.0) == pytest.approx(35.0)

    def test_clean_specs_distinct_geometry(self):
        specs = clean_dataset_specs(5, seed=1)
        assert len({s.landmarks[0].position.tobytes() for s in specs}) == 5

    def test_heterogeneous_split(self):
        specs = heterogeneous_dataset_specs(1, n_clean=6, n_weak=2)
        assert len(specs) == 8
        strong_jump = np.linalg.norm(
            specs[0].landmarks[1].position[:2] - specs[0].landmarks[0].position[:2]
        )
        weak_jump = np.linalg.norm(
            specs[-1].landmarks[1].position[:2] - specs[-1].landmarks[0].position[:2]
        )
        assert strong_jump >= 150.0
        assert weak_jump == pytest.approx(weak_jump_distance(50.0, 0.7))
