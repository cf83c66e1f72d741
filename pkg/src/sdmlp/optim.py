"""Optimizers: Adadelta (the training method) and plain SGD (baseline/oracle).

Both step over flat lists of parameter arrays in place, paired with gradient
arrays of the same shapes (see ``Network.parameters`` / ``Network.gradients``).
"""

import numpy as np


class Adadelta:
    """Adaptive per-dimension step sizes from decayed squared accumulators.

    Per scalar parameter, in this fixed order:

        E[g2]  <- rho * E[g2] + (1 - rho) * g^2
        delta  <- -sqrt(E[dx2] + eps) / sqrt(E[g2] + eps) * g
        E[dx2] <- rho * E[dx2] + (1 - rho) * delta^2
        x      <- x + delta

    Accumulators start at zero, are created lazily on the first step, and
    persist for the lifetime of the optimizer (never reset between epochs).
    """

    def __init__(self, rho: float = 0.95, eps: float = 1e-6):
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must be in (0, 1), got {rho!r}")
        if eps <= 0.0:
            raise ValueError(f"eps must be positive, got {eps!r}")
        self.rho = float(rho)
        self.eps = float(eps)
        self.acc_grad = None
        self.acc_update = None

    def step(self, params, grads):
        if len(params) != len(grads):
            raise ValueError(
                f"got {len(params)} params but {len(grads)} gradients"
            )
        if self.acc_grad is None:
            self.acc_grad = [np.zeros_like(p) for p in params]
            self.acc_update = [np.zeros_like(p) for p in params]
        if len(self.acc_grad) != len(params):
            raise ValueError("parameter set changed size under the optimizer")
        rho, eps = self.rho, self.eps
        for p, g, eg, ex in zip(params, grads, self.acc_grad, self.acc_update):
            if p.shape != g.shape or p.shape != eg.shape:
                raise ValueError(
                    f"shape mismatch: param {p.shape}, grad {g.shape}, "
                    f"accumulator {eg.shape}"
                )
            eg *= rho
            eg += (1.0 - rho) * g * g
            delta = -(np.sqrt(ex + eps) / np.sqrt(eg + eps)) * g
            ex *= rho
            ex += (1.0 - rho) * delta * delta
            p += delta


class SGD:
    """Plain gradient descent: x <- x - learning_rate * g."""

    def __init__(self, learning_rate: float):
        if learning_rate <= 0.0:
            raise ValueError(f"learning rate must be positive, got {learning_rate!r}")
        self.learning_rate = float(learning_rate)

    def step(self, params, grads):
        if len(params) != len(grads):
            raise ValueError(
                f"got {len(params)} params but {len(grads)} gradients"
            )
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}")
            p -= self.learning_rate * g
