"""Finite-difference verification of backpropagation.

The numerical side only ever calls the forward pass, so it is independent of
the analytic backward path it checks.  Dropout must be inactive (no dropout
layers, or rate 0 with the loss evaluated in inference mode) for the loss to
be a deterministic function of the parameters.
"""

import numpy as np

from .metrics import mse
from .nn import Network, l2_penalty


def loss_value(net: Network, x, y, l2_lambda: float = 0.0) -> float:
    """MSE plus the L2 penalty term, from an inference-mode forward only."""
    was_training = net.training
    net.eval()
    try:
        value, _ = mse(net.forward(x), y)
    finally:
        net.training = was_training
    if l2_lambda != 0.0:
        for layer in net.dense_layers():
            value += 0.5 * l2_lambda * float(np.sum(layer.w * layer.w))
    return value


def analytic_gradients(net: Network, x, y, l2_lambda: float = 0.0):
    """Backprop gradients for the same loss, as a flat list of arrays."""
    net.train()
    pred = net.forward(x)
    _, grad_out = mse(pred, y)
    net.backward(grad_out)
    l2_penalty(net, l2_lambda)
    net.eval()
    return [g.copy() for g in net.gradients()]


def numerical_gradients(net: Network, x, y, l2_lambda: float = 0.0, eps: float = 1e-5):
    """Central finite differences of the loss for every parameter."""
    grads = []
    for p in net.parameters():
        num = np.zeros_like(p)
        flat = p.reshape(-1)
        nflat = num.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            plus = loss_value(net, x, y, l2_lambda)
            flat[i] = orig - eps
            minus = loss_value(net, x, y, l2_lambda)
            flat[i] = orig
            nflat[i] = (plus - minus) / (2.0 * eps)
        grads.append(num)
    return grads


def max_relative_error(analytic, numerical, floor: float = 1e-10):
    """Worst |a - n| / max(|a|, |n|, floor) over all parameters.

    Returns (error, location) where location is (parameter index, flat offset)
    of the worst entry.
    """
    worst = 0.0
    where = (0, 0)
    for k, (a, n) in enumerate(zip(analytic, numerical)):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        rel = np.abs(a - n) / denom
        i = int(np.argmax(rel))
        if rel.reshape(-1)[i] >= worst:
            worst = float(rel.reshape(-1)[i])
            where = (k, i)
    return worst, where


def check_gradients(net: Network, x, y, l2_lambda: float = 0.0, eps: float = 1e-5):
    """Compare backprop against central differences; returns (max_rel_err, loc)."""
    analytic = analytic_gradients(net, x, y, l2_lambda)
    numerical = numerical_gradients(net, x, y, l2_lambda, eps)
    return max_relative_error(analytic, numerical)
