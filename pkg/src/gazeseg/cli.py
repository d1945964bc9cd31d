"""Command-line surface: synthesize, segment, evaluate, sweep."""
from __future__ import annotations

import argparse
import csv
import sys

from .core import DetectionConfig, GazeSegError
from .io import (
    read_manifest,
    read_segmentation_json,
    write_json,
    write_segmentation_json,
)
from .pipeline import (
    count_excluded,
    evaluate_report,
    load_truths,
    segment_manifest,
    sweep_grid,
)
from .synth import clean_dataset_specs, generate_dataset, heterogeneous_dataset_specs

DEFAULT_W_GRID = (5, 10, 15, 20, 25, 30)
DEFAULT_THETA_GRID = (25.0, 50.0, 75.0, 100.0, 125.0, 150.0)

SWEEP_CSV_FIELDS = ("w", "theta_pos", "refine", "n_correct", "n_excluded")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", "-w", type=int, default=20, help="median filter window width")
    parser.add_argument("--patch-size", "-b", type=int, default=256, help="gaze crop side, pixels")
    parser.add_argument("--theta-pos", type=float, default=50.0, help="gaze displacement threshold, pixels")
    parser.add_argument("--theta-feat", type=float, default=0.03, help="feature dissimilarity threshold")
    parser.add_argument(
        "--mode",
        choices=("both", "pos-only", "feat-only"),
        default="both",
        help="which score streams gate detection",
    )
    parser.add_argument(
        "--refine",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="scale thresholds per demo until its count matches the dataset mode",
    )
    parser.add_argument("--max-iters", type=int, default=500, help="iteration budget per scaling loop")
    parser.add_argument("--scale-down", type=float, default=0.99, help="per-iteration shrink factor")
    parser.add_argument("--scale-up", type=float, default=1.01, help="per-iteration growth factor")
    parser.add_argument("--jobs", type=int, default=1, help="parallel demos (output order is unchanged)")
    parser.add_argument("--seed", type=int, default=0, help="random seed (synthesis only)")


def _config_from_args(args: argparse.Namespace) -> DetectionConfig:
    return DetectionConfig(
        window_w=args.window,
        patch_b=args.patch_size,
        theta_pos=args.theta_pos,
        theta_feat=args.theta_feat,
        mode=args.mode.replace("-", "_"),
        refine=args.refine,
        scale_down=args.scale_down,
        scale_up=args.scale_up,
        max_iters=args.max_iters,
    )


def _cmd_segment(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = segment_manifest(args.manifest, config, jobs=args.jobs)
    write_segmentation_json(report, args.out)
    excluded = count_excluded(report)
    if excluded:
        print(
            f"{excluded} of {len(report['demos'])} demonstrations excluded",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    report = read_segmentation_json(args.segmentation)
    truths = load_truths(read_manifest(args.manifest))
    metrics = evaluate_report(report, truths, args.tolerance)
    if args.out:
        write_json(metrics, args.out)
    print(
        f"majority {metrics['majority']}/{metrics['n_demos']}, "
        f"minority {metrics['minority']}, excluded {metrics['excluded']}, "
        f"boundary error mean {metrics['boundary_error_mean']:.2f} max {metrics['boundary_error_max']}"
    )
    return 0


def _parse_grid(text: str, cast):
    values = [cast(v) for v in text.split(",") if v.strip()]
    if not values:
        raise GazeSegError(f"empty grid: {text!r}")
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    rows = sweep_grid(
        args.manifest,
        config,
        w_values=_parse_grid(args.w_grid, int),
        theta_values=_parse_grid(args.theta_grid, float),
        refine=args.refine,
        jobs=args.jobs,
    )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row["w"],
                    f"{row['theta_pos']:g}",
                    "true" if row["refine"] else "false",
                    row["n_correct"],
                    row["n_excluded"],
                ]
            )
    print(f"wrote {len(rows)} cells to {args.out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.preset == "clean":
        specs = clean_dataset_specs(
            args.demos,
            args.seed,
            n_landmarks=args.landmarks,
            noise_sigma=args.noise_sigma,
            glance_rate=args.glance_rate,
        )
    else:
        specs = heterogeneous_dataset_specs(
            args.seed,
            n_clean=args.demos - args.weak,
            n_weak=args.weak,
            n_landmarks=args.landmarks,
            noise_sigma=args.noise_sigma,
            glance_rate=args.glance_rate,
        )
    manifest = generate_dataset(
        specs,
        n_per_spec=1,
        out_dir=args.out_dir,
        task=args.task or args.preset,
        write_features=args.features,
        render=args.render,
    )
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeseg",
        description="Segment teleoperated demonstrations at gaze-landmark transitions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_segment = sub.add_parser("segment", help="detect (and refine) change points for a dataset")
    p_segment.add_argument("manifest", help="dataset manifest JSON")
    p_segment.add_argument("--out", default="segmentation.json", help="output report path")
    _add_config_flags(p_segment)
    p_segment.set_defaults(func=_cmd_segment)

    p_eval = sub.add_parser("eval", help="compare a segmentation report against ground truth")
    p_eval.add_argument("segmentation", help="segmentation report JSON")
    p_eval.add_argument("manifest", help="dataset manifest JSON (for ground-truth paths)")
    p_eval.add_argument("--tolerance", type=int, default=10, help="max boundary error, steps")
    p_eval.add_argument("--out", default=None, help="optional metrics JSON path")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="grid sweep over window width and theta_pos")
    p_sweep.add_argument("manifest", help="dataset manifest JSON")
    p_sweep.add_argument("--out", default="sweep.csv", help="output CSV path")
    p_sweep.add_argument(
        "--w-grid", default=",".join(str(w) for w in DEFAULT_W_GRID), help="comma-separated window widths"
    )
    p_sweep.add_argument(
        "--theta-grid",
        default=",".join(f"{t:g}" for t in DEFAULT_THETA_GRID),
        help="comma-separated theta_pos values",
    )
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    p_synth.add_argument("out_dir", help="output dataset directory")
    p_synth.add_argument("--preset", choices=("clean", "heterogeneous"), default="clean")
    p_synth.add_argument("--demos", type=int, default=100, help="total demonstrations")
    p_synth.add_argument("--weak", type=int, default=10, help="attenuated demos (heterogeneous preset)")
    p_synth.add_argument("--landmarks", type=int, default=4, help="landmarks per demo")
    p_synth.add_argument("--noise-sigma", type=float, default=5.0, help="gaze noise std, pixels")
    p_synth.add_argument("--glance-rate", type=float, default=0.02, help="per-step glance probability")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument(
        "--features",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="write GZFT feature files",
    )
    p_synth.add_argument("--render", action="store_true", help="also render PGM frames")
    p_synth.add_argument("--task", default=None, help="task name in the manifest")
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GazeSegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
