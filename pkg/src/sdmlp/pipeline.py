"""Training, evaluation, per-frame prediction, and model checkpoints.

Randomness: every run descends from one 64-bit seed.  ``SeededRng(seed)`` is
the root; ``split(1)`` initializes parameters (the network builder splits
further for its dropout layers), ``split(3)`` drives the per-epoch shuffle.
"""

import logging
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DepthMap, extract_samples, load_dataset_frame
from .errors import FormatError, NoValidPixelsError
from .metrics import EvalRecord, histogram, mse, rmse_conventional, rmse_per_image
from .nn import (
    LINEAR,
    RELU,
    DenseLayer,
    DropoutLayer,
    Network,
    build_reference_network,
    l2_penalty,
)
from .numerics import SeededRng
from .optim import SGD, Adadelta

log = logging.getLogger(__name__)

OPTIMIZERS = ("adadelta", "sgd")

# All inference-path forwards run at this fixed batch width (inputs are padded
# up to a multiple of it).  Keeping the width constant keeps BLAS kernel
# selection constant, so a given input column always yields the same bits no
# matter how it is batched.
PREDICT_CHUNK = 8192


@dataclass
class TrainConfig:
    """Hyperparameters and bookkeeping for one training run."""

    epochs: int = 20
    batch_size: int = 128
    dropout_rate: float = 0.5
    l2_lambda: float = 1e-4
    seed: int = 42
    optimizer: str = "adadelta"
    rho: float = 0.95
    eps: float = 1e-6
    learning_rate: float = 0.1
    n_train_frames: int = 20
    train_indices: list | None = None
    zero_bias_init: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(
                f"unknown optimizer {self.optimizer!r}, want one of {OPTIMIZERS}"
            )


@dataclass
class TrainReport:
    """Per-epoch training curve; entries line up one per epoch.

    ``epoch_mse`` is the sample-count-weighted mean of batch MSE values and
    excludes the regularization term, which is tracked in ``epoch_l2``.
    """

    epoch_mse: list = field(default_factory=list)
    epoch_l2: list = field(default_factory=list)
    epoch_wall_ms: list = field(default_factory=list)


@dataclass
class PointCloud:
    """(n, 3) XYZ points with optional per-point RGB."""

    points: np.ndarray
    colors: np.ndarray | None = None


@dataclass
class EvalResult:
    """Per-frame records plus aggregates over the evaluated frames.

    ``mean_rmse`` averages the records (whichever RMSE variant they carry);
    the mean-Euclidean and conventional (root outside the mean) figures are
    always both available.  Frames without any valid pixel are listed in
    ``skipped``.
    """

    records: list
    mean_rmse: float
    mean_euclidean: float
    mean_conventional: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    skipped: list = field(default_factory=list)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "adadelta":
        return Adadelta(rho=config.rho, eps=config.eps)
    return SGD(learning_rate=config.learning_rate)


def train_on_samples(
    net: Network, x, y, config: TrainConfig, shuffle_rng: SeededRng
) -> TrainReport:
    """Mini-batch training loop over a pooled sample matrix.

    Per batch: training-mode forward, MSE + L2, backward, optimizer step.
    The last batch of an epoch may be short.  Leaves the network in
    inference mode.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[1]
    if n == 0:
        raise NoValidPixelsError("training pool is empty")
    if y.shape[1] != n:
        raise ValueError(f"sample/target count mismatch: {n} vs {y.shape[1]}")
    opt = make_optimizer(config)
    report = TrainReport()
    net.train()
    for _ in range(config.epochs):
        t0 = time.perf_counter()
        perm = shuffle_rng.permutation(n)
        xs, ys = x[:, perm], y[:, perm]
        mse_sum = 0.0
        l2_sum = 0.0
        for start in range(0, n, config.batch_size):
            xb = xs[:, start : start + config.batch_size]
            yb = ys[:, start : start + config.batch_size]
            pred = net.forward(xb)
            batch_mse, grad_out = mse(pred, yb)
            net.backward(grad_out)
            batch_l2 = l2_penalty(net, config.l2_lambda)
            opt.step(net.parameters(), net.gradients())
            k = xb.shape[1]
            mse_sum += batch_mse * k
            l2_sum += batch_l2 * k
        report.epoch_mse.append(mse_sum / n)
        report.epoch_l2.append(l2_sum / n)
        report.epoch_wall_ms.append((time.perf_counter() - t0) * 1000.0)
    net.eval()
    return report


def pool_training_samples(data_dir, indices):
    """Concatenate the valid-pixel samples of the given frames column-wise."""
    xs, ys = [], []
    for idx in indices:
        frame, depth = load_dataset_frame(data_dir, idx)
        batch = extract_samples(frame, depth)
        if len(batch):
            xs.append(batch.x)
            ys.append(batch.target)
    if not xs:
        raise NoValidPixelsError("no valid pixels in any training frame")
    return np.concatenate(xs, axis=1), np.concatenate(ys, axis=1)


def train(config: TrainConfig, data_dir):
    """Train the reference network on a dataset directory.

    Returns ``(network, report)``.  Training frames are ``train_indices`` if
    given, otherwise the first ``n_train_frames`` indices.
    """
    indices = (
        list(config.train_indices)
        if config.train_indices is not None
        else list(range(config.n_train_frames))
    )
    x, y = pool_training_samples(data_dir, indices)
    root = SeededRng(config.seed)
    net = build_reference_network(
        root.split(1), config.dropout_rate, config.zero_bias_init
    )
    report = train_on_samples(net, x, y, config, root.split(3))
    return net, report


def predict_columns(net: Network, x) -> np.ndarray:
    """Inference-mode forward at the fixed PREDICT_CHUNK batch width.

    The input is padded (repeating its last column) to a multiple of the
    chunk width, run chunk by chunk, and sliced back, so outputs do not
    depend on how many columns were asked for at once.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[1]
    if n == 0:
        return np.zeros((net.output_dim, 0))
    pad = (-n) % PREDICT_CHUNK
    if pad:
        x = np.concatenate([x, np.repeat(x[:, -1:], pad, axis=1)], axis=1)
    was_training = net.training
    net.eval()
    try:
        outs = [
            net.forward(x[:, s : s + PREDICT_CHUNK])
            for s in range(0, x.shape[1], PREDICT_CHUNK)
        ]
    finally:
        net.training = was_training
    return np.concatenate(outs, axis=1)[:, :n]


def predict_frame(net: Network, frame):
    """Predict XYZ for every pixel of a stereo frame.

    Returns ``(DepthMap, PointCloud)``: the depth map marks all pixels valid,
    and the cloud has one point per pixel colored from the left image.
    """
    if net.input_dim != 6:
        raise ValueError(
            f"frame prediction needs a 6-input network, got {net.input_dim}"
        )
    h, w = frame.height, frame.width
    stacked = np.concatenate([frame.left, frame.right], axis=2)
    x = stacked.reshape(-1, 6).T.astype(np.float64) / 255.0
    pred = predict_columns(net, x)
    xyz = np.ascontiguousarray(pred.T).reshape(h, w, 3)
    depth = DepthMap(xyz=xyz, valid=np.ones((h, w), dtype=bool))
    cloud = PointCloud(
        points=xyz.reshape(-1, 3), colors=frame.left.reshape(-1, 3).copy()
    )
    return depth, cloud


def _evaluate_one(net, data_dir, idx):
    frame, depth = load_dataset_frame(data_dir, idx)
    if not depth.valid.any():
        return idx, None
    pred_depth, _ = predict_frame(net, frame)
    pred = pred_depth.xyz[depth.valid].T
    gt = depth.xyz[depth.valid].T
    return idx, (
        rmse_per_image(pred, gt),
        rmse_conventional(pred, gt),
        int(depth.valid.sum()),
    )


def evaluate(
    net: Network,
    split,
    data_dir,
    n_bins: int = 20,
    conventional: bool = False,
    threads: int = 1,
) -> EvalResult:
    """Per-image RMSE over the test frames of a split.

    ``conventional`` selects which RMSE variant the records (and histogram)
    carry; both per-frame figures are computed either way.  Frames with no
    valid ground truth are skipped and logged.  The network is only read.
    """
    indices = list(split.test)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: _evaluate_one(net, data_dir, i), indices))
    else:
        results = [_evaluate_one(net, data_dir, i) for i in indices]
    results.sort(key=lambda r: r[0])

    records = []
    skipped = []
    eucl = []
    conv = []
    for idx, res in results:
        if res is None:
            log.warning("frame %d has no valid ground truth, skipping", idx)
            skipped.append(idx)
            continue
        mean_dist, root_mean, n_pixels = res
        eucl.append(mean_dist)
        conv.append(root_mean)
        records.append(
            EvalRecord(
                frame_index=idx,
                rmse=root_mean if conventional else mean_dist,
                n_pixels=n_pixels,
            )
        )
    if not records:
        raise NoValidPixelsError("no test frame has any valid ground truth")
    values = [r.rmse for r in records]
    edges, counts = histogram(values, n_bins)
    return EvalResult(
        records=records,
        mean_rmse=float(np.mean(values)),
        mean_euclidean=float(np.mean(eucl)),
        mean_conventional=float(np.mean(conv)),
        hist_edges=edges,
        hist_counts=counts,
        skipped=skipped,
    )


# Checkpoint layout, all little-endian: magic "SDMLP", version u32, layer
# count u32, then per layer a kind byte — dense (0): out u32, in u32,
# activation u8 (0 linear, 1 relu), W float64 row-major, b float64;
# dropout (1): rate float64.
CHECKPOINT_MAGIC = b"SDMLP"
CHECKPOINT_VERSION = 1
_KIND_DENSE = 0
_KIND_DROPOUT = 1
_ACT_TO_CODE = {LINEAR: 0, RELU: 1}
_CODE_TO_ACT = {0: LINEAR, 1: RELU}


def save_checkpoint(net: Network, path) -> None:
    buf = bytearray()
    buf += CHECKPOINT_MAGIC
    buf += struct.pack("<II", CHECKPOINT_VERSION, len(net.layers))
    for layer in net.layers:
        if isinstance(layer, DenseLayer):
            buf += struct.pack(
                "<BIIB", _KIND_DENSE, layer.n_out, layer.n_in,
                _ACT_TO_CODE[layer.activation],
            )
            buf += layer.w.astype("<f8").tobytes()
            buf += layer.b.astype("<f8").tobytes()
        else:
            buf += struct.pack("<Bd", _KIND_DROPOUT, layer.rate)
    Path(path).write_bytes(bytes(buf))


def load_checkpoint(path, rng: SeededRng | None = None) -> Network:
    """Rebuild a network from a checkpoint; inference-ready on return.

    Pass ``rng`` to also arm the dropout layers for further training (they
    get ``rng.split(100 + i)`` in layer order, mirroring the builder).
    """
    raw = Path(path).read_bytes()
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path}: bad checkpoint magic")
    off = len(CHECKPOINT_MAGIC)

    def take(fmt):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(raw):
            raise FormatError(f"{path}: truncated checkpoint")
        vals = struct.unpack_from(fmt, raw, off)
        off += size
        return vals

    (version, n_layers) = take("<II")
    if version != CHECKPOINT_VERSION:
        raise FormatError(
            f"{path}: unsupported checkpoint version {version}"
        )
    layers = []
    n_dropout = 0
    for _ in range(n_layers):
        (kind,) = take("<B")
        if kind == _KIND_DENSE:
            n_out, n_in, act_code = take("<IIB")
            if act_code not in _CODE_TO_ACT:
                raise FormatError(f"{path}: unknown activation code {act_code}")
            layer = DenseLayer(n_in, n_out, _CODE_TO_ACT[act_code])
            count = n_out * n_in
            if off + (count + n_out) * 8 > len(raw):
                raise FormatError(f"{path}: truncated checkpoint")
            layer.w = (
                np.frombuffer(raw, dtype="<f8", count=count, offset=off)
                .reshape(n_out, n_in)
                .copy()
            )
            off += count * 8
            layer.b = np.frombuffer(raw, dtype="<f8", count=n_out, offset=off).copy()
            off += n_out * 8
            layers.append(layer)
        elif kind == _KIND_DROPOUT:
            (rate,) = take("<d")
            child = rng.split(100 + n_dropout) if rng is not None else None
            layers.append(DropoutLayer(rate, child))
            n_dropout += 1
        else:
            raise FormatError(f"{path}: unknown layer kind {kind}")
    if off != len(raw):
        raise FormatError(
            f"{path}: {len(raw) - off} trailing bytes after last layer"
        )
    return Network(layers).eval()
