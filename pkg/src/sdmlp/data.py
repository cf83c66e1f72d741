"""Stereo frame and depth ground-truth ingestion, sampling, and synthesis.

On-disk dataset layout (one directory, indices contiguous from 0):

    left_%06d.png     8-bit RGB, any size; PNG or binary PPM (P6)
    right_%06d.png    same size as the left frame
    depth_%06d.xyz    raw little-endian float32, row-major, 3 floats (X, Y, Z)
                      per pixel; a NaN anywhere in a triple marks the pixel
                      invalid (canonical quiet NaN written for such pixels)

Depth values live in memory as float64 but the file format is float32, so
anything round-tripped through disk carries float32 precision.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError
from .numerics import SeededRng

LEFT_PATTERN = "left_%06d.png"
RIGHT_PATTERN = "right_%06d.png"
DEPTH_PATTERN = "depth_%06d.xyz"

# Fixed generator constants for the synthetic datasets.  The linear map is
# target = LINEAR_A @ x + LINEAR_C for the normalized 6-vector x; the radial
# map adds RADIAL_Q * |x|^2.  The scale is deliberately modest: targets a
# Glorot-initialized network can reach within a short desk-scale run.
LINEAR_A = np.array(
    [
        [0.25, -0.125, 0.0625, 0.1875, -0.25, 0.125],
        [0.125, 0.25, -0.1875, -0.0625, 0.125, 0.25],
        [-0.25, 0.125, 0.25, 0.125, -0.125, 0.0625],
    ]
)
LINEAR_C = np.array([0.2, -0.15, 0.25])
RADIAL_Q = np.array([0.05, -0.025, 0.0625])

GENERATORS = ("linear", "radial")


@dataclass
class StereoFrame:
    """A left/right RGB image pair, 8 bits per channel, shape (h, w, 3)."""

    index: int
    left: np.ndarray
    right: np.ndarray

    @property
    def height(self) -> int:
        return self.left.shape[0]

    @property
    def width(self) -> int:
        return self.left.shape[1]


@dataclass
class DepthMap:
    """Per-pixel XYZ ground truth with a validity mask.

    ``xyz`` is (h, w, 3) float64 and is finite wherever ``valid`` is True;
    invalid pixels hold NaN.
    """

    xyz: np.ndarray
    valid: np.ndarray

    @property
    def height(self) -> int:
        return self.xyz.shape[0]

    @property
    def width(self) -> int:
        return self.xyz.shape[1]


@dataclass
class SampleBatch:
    """Training vectors extracted from one frame, stored column-wise.

    Column k holds the normalized intensity 6-vector ``x[:, k]`` (left RGB
    then right RGB, each in [0, 1]), its XYZ target ``target[:, k]``, and the
    (row, col) pixel it came from in ``pixels[k]``.
    """

    x: np.ndarray
    target: np.ndarray
    pixels: np.ndarray

    def __len__(self) -> int:
        return self.x.shape[1]


@dataclass
class DatasetSplit:
    """Disjoint train/test frame indices covering all loaded frames."""

    train: list = field(default_factory=list)
    test: list = field(default_factory=list)


def _load_rgb(path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode != "RGB":
            raise FormatError(
                f"{path}: expected an 8-bit RGB image, got mode {img.mode!r}"
            )
        return np.asarray(img, dtype=np.uint8)


def load_frame_pair(left_path, right_path, index: int = 0) -> StereoFrame:
    """Load a stereo pair; both images must be RGB and the same size."""
    left = _load_rgb(left_path)
    right = _load_rgb(right_path)
    if left.shape != right.shape:
        raise FormatError(
            f"stereo pair size mismatch: left {left.shape[1]}x{left.shape[0]} "
            f"vs right {right.shape[1]}x{right.shape[0]}"
        )
    return StereoFrame(index=index, left=left, right=right)


def save_frame_pair(frame: StereoFrame, data_dir) -> None:
    data_dir = Path(data_dir)
    Image.fromarray(frame.left, "RGB").save(data_dir / (LEFT_PATTERN % frame.index))
    Image.fromarray(frame.right, "RGB").save(data_dir / (RIGHT_PATTERN % frame.index))


def load_depth_map(path, width: int, height: int) -> DepthMap:
    """Read a raw float32 depth file; NaN triples become invalid pixels."""
    raw = Path(path).read_bytes()
    expected = width * height * 3 * 4
    if len(raw) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for {width}x{height}x3 float32, "
            f"got {len(raw)}"
        )
    xyz32 = np.frombuffer(raw, dtype="<f4").reshape(height, width, 3)
    valid = ~np.isnan(xyz32).any(axis=2)
    xyz = xyz32.astype(np.float64)
    xyz[~valid] = np.nan
    return DepthMap(xyz=xyz, valid=valid)


def save_depth_map(depth: DepthMap, path) -> None:
    """Write the float32 file form; invalid pixels become canonical NaN."""
    xyz32 = depth.xyz.astype("<f4")
    xyz32[~depth.valid] = np.float32(np.nan)
    Path(path).write_bytes(xyz32.tobytes())


def extract_samples(frame: StereoFrame, depth: DepthMap) -> SampleBatch:
    """One sample per valid pixel, in reading order (row-major).

    x = (L_r, L_g, L_b, R_r, R_g, R_b) / 255 at the pixel; 255 maps to
    exactly 1.0.  Invalid pixels are skipped.
    """
    if frame.left.shape[:2] != depth.xyz.shape[:2]:
        raise ValueError(
            f"frame size {frame.left.shape[:2]} does not match "
            f"depth size {depth.xyz.shape[:2]}"
        )
    rows, cols = np.nonzero(depth.valid)
    left = frame.left[rows, cols].astype(np.float64) / 255.0
    right = frame.right[rows, cols].astype(np.float64) / 255.0
    x = np.concatenate([left, right], axis=1).T
    target = depth.xyz[rows, cols].T.copy()
    pixels = np.stack([rows, cols], axis=1)
    return SampleBatch(x=x, target=target, pixels=pixels)


def split_frames(n_frames: int, n_train: int) -> DatasetSplit:
    """First n_train frame indices train, the rest test."""
    if not 0 < n_train < n_frames:
        raise ValueError(
            f"n_train must be in (0, n_frames), got n_train={n_train} "
            f"n_frames={n_frames}"
        )
    return DatasetSplit(
        train=list(range(n_train)), test=list(range(n_train, n_frames))
    )


def synth_targets(x: np.ndarray, generator: str) -> np.ndarray:
    """Ground-truth map from normalized intensity vectors to XYZ.

    ``x`` has 6-vectors along the last axis.  linear: A @ x + c.  radial:
    additionally q * |x|^2 per coordinate.
    """
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}, want one of {GENERATORS}")
    target = x @ LINEAR_A.T + LINEAR_C
    if generator == "radial":
        target = target + np.sum(x * x, axis=-1, keepdims=True) * RADIAL_Q
    return target


def synth_dataset(
    rng: SeededRng,
    n_frames: int,
    width: int,
    height: int,
    generator: str = "linear",
    mask_fraction: float = 0.0,
):
    """Random stereo pairs with exactly learnable ground truth.

    Draw order per frame is fixed (left image, right image, validity mask) so
    one seed reproduces the whole dataset.  Returns a list of
    (StereoFrame, DepthMap) pairs.
    """
    if width < 1 or height < 1:
        raise ValueError(f"frame size must be positive, got {width}x{height}")
    if not 0.0 <= mask_fraction < 1.0:
        raise ValueError(f"mask_fraction must be in [0, 1), got {mask_fraction!r}")
    frames = []
    for idx in range(n_frames):
        left = rng.integers(0, 256, (height, width, 3))
        right = rng.integers(0, 256, (height, width, 3))
        x = np.concatenate([left, right], axis=2).astype(np.float64) / 255.0
        xyz = synth_targets(x, generator)
        if mask_fraction > 0.0:
            valid = rng.random((height, width)) >= mask_fraction
        else:
            valid = np.ones((height, width), dtype=bool)
        xyz = xyz.copy()
        xyz[~valid] = np.nan
        frames.append(
            (
                StereoFrame(index=idx, left=left, right=right),
                DepthMap(xyz=xyz, valid=valid),
            )
        )
    return frames


def write_synth_dataset(frames, data_dir) -> list:
    """Write (frame, depth) pairs in the standard layout; returns the paths."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for frame, depth in frames:
        save_frame_pair(frame, data_dir)
        depth_path = data_dir / (DEPTH_PATTERN % frame.index)
        save_depth_map(depth, depth_path)
        paths.extend(
            [
                data_dir / (LEFT_PATTERN % frame.index),
                data_dir / (RIGHT_PATTERN % frame.index),
                depth_path,
            ]
        )
    return paths


def count_frames(data_dir) -> int:
    """Number of contiguous frame indices from 0 present in the directory."""
    data_dir = Path(data_dir)
    indices = set()
    for p in data_dir.glob("left_*.png"):
        m = re.fullmatch(r"left_(\d{6})\.png", p.name)
        if m:
            indices.add(int(m.group(1)))
    n = 0
    while n in indices:
        n += 1
    return n


def load_dataset_frame(data_dir, index: int):
    """Load one (StereoFrame, DepthMap) pair from the standard layout."""
    data_dir = Path(data_dir)
    frame = load_frame_pair(
        data_dir / (LEFT_PATTERN % index),
        data_dir / (RIGHT_PATTERN % index),
        index=index,
    )
    depth = load_depth_map(
        data_dir / (DEPTH_PATTERN % index), frame.width, frame.height
    )
    return frame, depth
