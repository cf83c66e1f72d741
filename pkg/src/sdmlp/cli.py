"""Command-line entry point.

Subcommands: synth, train, evaluate, predict, gradcheck.  Flags are the only
configuration mechanism.  Stable stdout lines use ``key=value`` form for
scripting; exit codes are 0 (success), 1 (runtime error), 2 (usage error).
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import export
from .data import (
    GENERATORS,
    DatasetSplit,
    count_frames,
    load_dataset_frame,
    split_frames,
    synth_dataset,
    write_synth_dataset,
)
from .gradcheck import analytic_gradients, max_relative_error, numerical_gradients
from .nn import DenseLayer, Network, RELU, LINEAR
from .numerics import SeededRng
from .pipeline import (
    PointCloud,
    TrainConfig,
    evaluate,
    load_checkpoint,
    predict_frame,
    save_checkpoint,
    train,
)

GRADCHECK_THRESHOLD = 1e-6


def _size(text: str):
    try:
        w, h = text.lower().split("x")
        width, height = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 64x64, got {text!r}")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError(f"size must be positive, got {text!r}")
    return width, height


def _indices(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"indices must be comma-separated ints: {text!r}")


def _add_split_flags(p):
    p.add_argument("--train-frames", type=int, default=20,
                   help="number of leading frames used for training (default 20)")
    p.add_argument("--train-indices", type=_indices, default=None,
                   help="explicit training frame indices, overriding --train-frames")


def cmd_synth(args) -> int:
    rng = SeededRng(args.seed)
    width, height = args.size
    frames = synth_dataset(
        rng, args.frames, width, height, args.generator, args.mask_fraction
    )
    write_synth_dataset(frames, args.out)
    print(f"generator={args.generator}")
    print(f"frames={args.frames}")
    print(f"size={width}x{height}")
    print(f"seed={args.seed}")
    print(f"mask_fraction={args.mask_fraction!r}")
    return 0


def cmd_train(args) -> int:
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        dropout_rate=args.dropout,
        l2_lambda=args.l2_lambda,
        seed=args.seed,
        optimizer=args.optimizer,
        rho=args.rho,
        eps=args.eps,
        learning_rate=args.lr,
        n_train_frames=args.train_frames,
        train_indices=args.train_indices,
        zero_bias_init=args.zero_bias_init,
    )
    net, report = train(config, args.data_dir)
    save_checkpoint(net, args.out)
    export.write_csv_losses(report, args.losses)
    print(f"final_mse={report.epoch_mse[-1]!r}")
    return 0


def cmd_evaluate(args) -> int:
    net = load_checkpoint(args.model)
    n_frames = count_frames(args.data_dir)
    if args.train_indices is not None:
        train_set = set(args.train_indices)
        split = DatasetSplit(
            train=sorted(train_set),
            test=[i for i in range(n_frames) if i not in train_set],
        )
    else:
        split = split_frames(n_frames, args.train_frames)
    result = evaluate(
        net,
        split,
        args.data_dir,
        n_bins=args.bins,
        conventional=args.conventional_rmse,
        threads=args.threads,
    )
    export.write_csv_eval(
        result.records, (result.hist_edges, result.hist_counts),
        args.records, args.hist,
    )
    print(f"mean_rmse={result.mean_rmse!r}")
    if args.conventional_rmse:
        print(f"mean_rmse_euclidean={result.mean_euclidean!r}")
    return 0


def cmd_predict(args) -> int:
    net = load_checkpoint(args.model)
    frame, depth = load_dataset_frame(args.data_dir, args.frame)
    pred_depth, cloud = predict_frame(net, frame)
    if args.mask_by_gt:
        mask = depth.valid.reshape(-1)
        cloud = PointCloud(points=cloud.points[mask], colors=cloud.colors[mask])
    export.write_ply(cloud, args.out_ply)
    if args.gt_ply is not None:
        mask = depth.valid
        gt_cloud = PointCloud(
            points=depth.xyz[mask], colors=frame.left[mask]
        )
        export.write_ply(gt_cloud, args.gt_ply)
    if args.depth_png is not None:
        export.write_depth_png(pred_depth, args.depth_png)
    print(f"points={cloud.points.shape[0]}")
    return 0


def cmd_gradcheck(args) -> int:
    rng = SeededRng(args.seed)
    net = Network(
        [
            DenseLayer(6, 5, RELU, rng),
            DenseLayer(5, 3, LINEAR, rng),
        ]
    )
    x = rng.uniform(-1.0, 1.0, 6 * args.batch).reshape(6, args.batch)
    y = rng.uniform(-2.0, 2.0, 3 * args.batch).reshape(3, args.batch)
    analytic = analytic_gradients(net, x, y)
    numerical = numerical_gradients(net, x, y, eps=args.eps)
    if args.sabotage:
        analytic[0].reshape(-1)[0] += 1.0
    err, (param_idx, flat_idx) = max_relative_error(analytic, numerical)
    print(f"max_rel_err={err!r}")
    if err < GRADCHECK_THRESHOLD:
        return 0
    shape = analytic[param_idx].shape
    coords = np.unravel_index(flat_idx, shape)
    print(
        f"worst parameter: index {param_idx} shape {shape} entry {tuple(coords)}",
        file=sys.stderr,
    )
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdmlp",
        description="Stereo pixel-intensity to 3D coordinate regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--size", type=_size, required=True, help="frame size, e.g. 64x64")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--generator", choices=GENERATORS, default="linear")
    p.add_argument("--mask-fraction", type=float, default=0.0,
                   help="fraction of pixels marked invalid (default 0)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the network on a dataset directory")
    p.add_argument("--data-dir", type=Path, required=True)
    _add_split_flags(p)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--l2-lambda", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--optimizer", choices=("adadelta", "sgd"), default="adadelta")
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--lr", type=float, default=0.1, help="sgd learning rate")
    p.add_argument("--zero-bias-init", action="store_true",
                   help="zero biases instead of the normalized initialization")
    p.add_argument("--out", type=Path, required=True, help="checkpoint path")
    p.add_argument("--losses", type=Path, required=True, help="loss curve CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="per-image RMSE over the test split")
    p.add_argument("--data-dir", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    _add_split_flags(p)
    p.add_argument("--records", type=Path, required=True, help="per-frame CSV path")
    p.add_argument("--hist", type=Path, required=True, help="histogram CSV path")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--conventional-rmse", action="store_true",
                   help="record sqrt(mean squared distance) instead of the "
                        "mean Euclidean distance")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="export point cloud for one frame")
    p.add_argument("--data-dir", type=Path, required=True)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--out-ply", type=Path, required=True)
    p.add_argument("--gt-ply", type=Path, default=None,
                   help="also export the ground-truth cloud")
    p.add_argument("--depth-png", type=Path, default=None,
                   help="also export the predicted Z channel as grayscale PNG")
    p.add_argument("--mask-by-gt", action="store_true",
                   help="restrict the predicted cloud to valid GT pixels")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck", help="verify backprop against finite differences")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--sabotage", action="store_true",
                   help="perturb one analytic gradient (negative control)")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
