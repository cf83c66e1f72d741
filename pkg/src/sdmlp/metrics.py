"""Loss and evaluation metrics.

Two different error figures appear here, and the distinction matters:

* :func:`mse` is the training loss — mean over samples of the summed squared
  coordinate errors.
* :func:`rmse_per_image` is the evaluation figure — the mean over a frame's
  pixels of the Euclidean distance between predicted and true 3D points.
  :func:`rmse_conventional` puts the root outside the mean instead
  (sqrt of the mean squared distance); by Jensen's inequality the mean
  Euclidean distance never exceeds it.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoValidPixelsError
from .numerics import as_matrix


@dataclass
class EvalRecord:
    """Per-frame evaluation result."""

    frame_index: int
    rmse: float
    n_pixels: int


def _check_pair(pred, gt):
    pred = as_matrix(pred)
    gt = as_matrix(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    return pred, gt


def mse(pred, gt):
    """Mean squared error over batch columns, plus its gradient wrt pred.

    Returns ``(value, grad)`` where value = sum(|pred - gt|^2) / N for N
    columns and grad = (2/N) * (pred - gt).
    """
    pred, gt = _check_pair(pred, gt)
    n = pred.shape[1]
    if n < 1:
        raise ValueError("mse needs at least one column")
    diff = pred - gt
    value = float(np.sum(diff * diff) / n)
    return value, (2.0 / n) * diff


def rmse_per_image(pred, gt) -> float:
    """Mean per-pixel Euclidean distance between predicted and true points."""
    pred, gt = _check_pair(pred, gt)
    if pred.shape[1] < 1:
        raise NoValidPixelsError("no valid pixels to evaluate")
    dist = np.sqrt(np.sum((pred - gt) ** 2, axis=0))
    return float(dist.mean())

def rmse_conventional(pred, gt) -> float:
    """Root of the mean squared per-pixel distance (root outside the mean)."""
    pred, gt = _check_pair(pred, gt)
    if pred.shape[1] < 1:
        raise NoValidPixelsError("no valid pixels to evaluate")
    return math.sqrt(float(np.sum((pred - gt) ** 2) / pred.shape[1]))


def histogram(values, n_bins: int):
    """Equal-width histogram over [min, max]; last bin right-closed.

    Returns ``(edges, counts)`` with len(edges) == len(counts) + 1.  A
    degenerate range (all values equal) yields a single bin of width 1.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("histogram needs at least one value")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return np.array([lo, lo + 1.0]), np.array([values.size])
    counts, edges = np.histogram(values, bins=int(n_bins), range=(lo, hi))
    return edges, counts
