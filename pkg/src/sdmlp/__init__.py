"""Stereo pixel-intensity to 3D coordinate regression, built from scratch.

A small numpy library implementing the full pipeline: dense network with
backpropagation, Adadelta optimization, stereo/depth dataset handling,
per-image RMSE evaluation, and point-cloud export.
"""

from .data import (
    DatasetSplit,
    DepthMap,
    SampleBatch,
    StereoFrame,
    extract_samples,
    load_depth_map,
    load_frame_pair,
    save_depth_map,
    split_frames,
    synth_dataset,
)
from .errors import FormatError, NoValidPixelsError
from .metrics import EvalRecord, histogram, mse, rmse_conventional, rmse_per_image
from .nn import (
    DenseLayer,
    DropoutLayer,
    Network,
    build_reference_network,
    glorot_init,
    l2_penalty,
    relu,
)
from .numerics import SeededRng, add_bias, matmul
from .optim import SGD, Adadelta
from .pipeline import (
    EvalResult,
    PointCloud,
    TrainConfig,
    TrainReport,
    evaluate,
    load_checkpoint,
    predict_columns,
    predict_frame,
    save_checkpoint,
    train,
    train_on_samples,
)

__version__ = "0.1.0"

__all__ = [
    "Adadelta",
    "DatasetSplit",
    "DenseLayer",
    "DepthMap",
    "DropoutLayer",
    "EvalRecord",
    "EvalResult",
    "FormatError",
    "Network",
    "NoValidPixelsError",
    "PointCloud",
    "SGD",
    "SampleBatch",
    "SeededRng",
    "StereoFrame",
    "TrainConfig",
    "TrainReport",
    "add_bias",
    "build_reference_network",
    "evaluate",
    "extract_samples",
    "glorot_init",
    "histogram",
    "l2_penalty",
    "load_checkpoint",
    "load_depth_map",
    "load_frame_pair",
    "matmul",
    "mse",
    "predict_columns",
    "predict_frame",
    "relu",
    "rmse_conventional",
    "rmse_per_image",
    "save_checkpoint",
    "save_depth_map",
    "split_frames",
    "synth_dataset",
    "train",
    "train_on_samples",
]
