"""Command-line interface: synth, train, predict, evaluate, distances.

Exit codes: 0 success, 1 usage error, 2 data/format error.  Every command is
deterministic given its flags; all randomness flows through --seed.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .datasetio import (DataFormatError, load_dataset, load_model, read_ppm,
                        save_model, write_pbm, write_pgm)
from .evaluation import (classification_accuracy, operating_point,
                         roc_below_horizon, write_roc_csv)
from .features import extract_features
from .forest import ForestParams
from .geometry import (Attitude, column_distances, horizon_field,
                       read_camera_config)
from .pipeline import (PipelineConfig, classification_map, spatial_filter,
                       split_dataset, threshold_map, train_pipeline,
                       uncertainty_map)
from .synthgen import default_intrinsics, default_scene_spec, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hobs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--frames", type=int, required=True, help="number of frames (>= 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=float, default=0.0,
                   help="attitude jitter std applied to the recorded attitude, radians")

    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--trees", type=int, default=20)
    p.add_argument("--min-leaf", type=int, default=10)
    p.add_argument("--samples-per-frame", type=int, default=1000)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--percentile", type=float, default=25.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("predict", help="maps for one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True, help="input ppm image")
    p.add_argument("--roll", type=float, required=True, help="radians")
    p.add_argument("--pitch", type=float, required=True, help="radians")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--threshold", type=float, default=None,
                   help="entropy threshold (default: the model's calibrated value)")
    p.add_argument("--dump-features", action="store_true",
                   help="also write the 13 feature channels as graymaps")

    p = sub.add_parser("evaluate", help="below-horizon ROC on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--roc", required=True, help="output ROC csv file")
    p.add_argument("--op-threshold", type=float, default=None)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("distances", help="per-column obstacle distances")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--roll", type=float, required=True)
    p.add_argument("--pitch", type=float, required=True)
    p.add_argument("--height", type=float, required=True, help="camera height, meters")
    p.add_argument("--camera", default=None,
                   help="camera.cfg with the intrinsics (default: the synthetic "
                        "camera at the image's size)")
    p.add_argument("--out", required=True, help="output csv file")
    return parser


def _cmd_synth(args) -> int:
    if args.frames < 2:
        raise _UsageError("--frames must be at least 2")
    base = replace(default_scene_spec(), attitude_jitter_std=args.jitter)
    generate_dataset(args.out, args.frames, base, default_intrinsics(),
                     variation_seed=args.seed)
    print(f"frames = {args.frames}")
    print(f"dataset = {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    frames, intrinsics = load_dataset(args.data)
    config = PipelineConfig(
        forest=ForestParams(n_trees=args.trees, min_samples_leaf=args.min_leaf,
                            seed=args.seed),
        samples_per_frame=args.samples_per_frame,
        train_fraction=args.train_fraction,
        threshold_percentile=args.percentile,
        split_seed=args.seed)
    model = train_pipeline(frames, intrinsics, config)
    save_model(model, args.model)
    _, test_frames = split_dataset(frames, config.train_fraction, config.split_seed)
    accuracy = classification_accuracy(model, test_frames, intrinsics)
    print(f"accuracy = {accuracy!r}")
    print(f"entropy_threshold = {float(model.entropy_threshold)!r}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    image = read_ppm(args.image).astype(float) / 255.0
    Attitude(roll=args.roll, pitch=args.pitch)  # maps are attitude-free; validate only
    threshold = model.entropy_threshold if args.threshold is None else args.threshold
    umap = uncertainty_map(model, image)
    omap = spatial_filter(threshold_map(umap, threshold))
    write_pbm(f"{args.out_prefix}.class.pbm", classification_map(model, image))
    write_pgm(f"{args.out_prefix}.uncert.pgm",
              np.rint(umap.entropy * 255.0).astype(np.uint8))
    write_pbm(f"{args.out_prefix}.obst.pbm", omap.obstacle)
    if args.dump_features:
        _dump_feature_channels(image, args.out_prefix)
    print(f"threshold = {float(threshold)!r}")
    return EXIT_OK


def _dump_feature_channels(image, prefix) -> None:
    channels = extract_features(image).channels
    for c in range(channels.shape[2]):
        chan = channels[..., c]
        low, high = float(chan.min()), float(chan.max())
        scale = (chan - low) / (high - low) if high > low else np.zeros_like(chan)
        write_pgm(f"{prefix}.feat{c:02d}.pgm", np.rint(scale * 255.0).astype(np.uint8))


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    frames, intrinsics = load_dataset(args.data)
    _, test_frames = split_dataset(frames, args.train_fraction, args.seed)
    missing = [f.frame_id for f in test_frames if f.gt_mask is None]
    if missing:
        raise DataFormatError(
            f"cannot evaluate: frames without ground-truth masks: {', '.join(missing)}")
    umaps = [uncertainty_map(model, f.image).entropy for f in test_frames]
    masks = [f.gt_mask for f in test_frames]
    fields = [horizon_field(intrinsics, f.attitude) for f in test_frames]
    curve = roc_below_horizon(umaps, masks, fields)
    write_roc_csv(curve, args.roc)
    print(f"auc = {curve.auc!r}")
    if args.op_threshold is not None:
        fpr, tpr = operating_point(curve, args.op_threshold)
        print(f"threshold = {args.op_threshold!r}")
        print(f"fpr = {fpr!r}")
        print(f"tpr = {tpr!r}")
    return EXIT_OK


def _cmd_distances(args) -> int:
    if args.height <= 0:
        raise _UsageError("--height must be positive")
    model = load_model(args.model)
    image = read_ppm(args.image).astype(float) / 255.0
    attitude = Attitude(roll=args.roll, pitch=args.pitch)
    if args.camera is not None:
        intrinsics = read_camera_config(args.camera)
        if (intrinsics.width, intrinsics.height) != (image.shape[1], image.shape[0]):
            raise DataFormatError(
                f"{args.camera} says {intrinsics.width}x{intrinsics.height}, "
                f"image is {image.shape[1]}x{image.shape[0]}")
    else:
        intrinsics = default_intrinsics(width=image.shape[1], height=image.shape[0])
    field = horizon_field(intrinsics, attitude)
    umap = uncertainty_map(model, image)
    omap = spatial_filter(threshold_map(umap, model.entropy_threshold))
    dists = column_distances(omap, field, args.height)
    lines = ["column,distance_m"]
    lines += [f"{c},{'inf' if np.isinf(d) else repr(float(d))}"
              for c, d in enumerate(dists)]
    tmp = args.out + ".tmp"
    with open(tmp, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp, args.out)
    print(f"columns = {dists.size}")
    print(f"detected = {int(np.isfinite(dists).sum())}")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "distances": _cmd_distances,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
