"""Dense network with ReLU activations, inverted dropout and backpropagation.

The reference architecture maps a 6-vector of normalized stereo pixel
intensities to predicted (X, Y, Z) coordinates:

    Dense(6 -> 500, relu), Dropout, Dense(500 -> 500, relu), Dropout,
    Dense(500 -> 3, linear)

Weights and biases are drawn from the normalized uniform initialization with
bound sqrt(6) / sqrt(n_in + n_out).  Dropout is the inverted variant: at
training time survivors are scaled by 1/(1-rate) so inference is a plain
unscaled forward pass.
"""

import math

import numpy as np

from .numerics import SeededRng, add_bias, as_matrix, matmul

RELU = "relu"
LINEAR = "linear"

INPUT_DIM = 6
HIDDEN_DIM = 500
OUTPUT_DIM = 3


def relu(m) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(np.asarray(m, dtype=np.float64), 0.0)


def glorot_init(n_in: int, n_out: int, rng: SeededRng) -> np.ndarray:
    """(n_out, n_in) matrix with entries uniform in +-sqrt(6)/sqrt(n_in+n_out)."""
    if n_in < 1 or n_out < 1:
        raise ValueError(f"glorot_init needs positive dims, got ({n_in}, {n_out})")
    bound = glorot_bound(n_in, n_out)
    return rng.uniform(-bound, bound, n_out * n_in).reshape(n_out, n_in)


def glorot_bound(n_in: int, n_out: int) -> float:
    return math.sqrt(6.0) / math.sqrt(n_in + n_out)


class DenseLayer:
    """Affine transform W @ x + b followed by relu or identity.

    A training-mode forward caches its input and preactivation; backward
    consumes those caches and populates grad_w / grad_b by assignment.  The
    caches survive backward, so several backward calls after one forward all
    see the same batch.
    """

    def __init__(self, n_in, n_out, activation=RELU, rng=None, zero_bias=False):
        if activation not in (RELU, LINEAR):
            raise ValueError(f"unknown activation {activation!r}")
        if rng is not None:
            self.w = glorot_init(n_in, n_out, rng)
            if zero_bias:
                self.b = np.zeros(n_out)
            else:
                bound = glorot_bound(n_in, n_out)
                self.b = rng.uniform(-bound, bound, n_out)
        else:
            self.w = np.zeros((n_out, n_in))
            self.b = np.zeros(n_out)
        self.activation = activation
        self.grad_w = np.zeros_like(self.w)
        self.grad_b = np.zeros_like(self.b)
        self._x = None
        self._z = None

    @property
    def n_in(self) -> int:
        return self.w.shape[1]

    @property
    def n_out(self) -> int:
        return self.w.shape[0]

    def forward(self, x, training=False) -> np.ndarray:
        x = as_matrix(x)
        if x.shape[0] != self.n_in:
            raise ValueError(
                f"dense layer expects {self.n_in} input rows, got {x.shape}"
            )
        z = add_bias(matmul(self.w, x), self.b)
        if training:
            self._x = x
            self._z = z
        return relu(z) if self.activation == RELU else z

    def backward(self, grad_out) -> np.ndarray:
        """Given dL/d(output), set grad_w and grad_b; return dL/d(input).

        The relu subgradient at exactly 0 is taken as 0.  No batch averaging
        happens here: the loss gradient passed in already carries any 1/N.
        """
        if self._x is None:
            raise RuntimeError("backward called before a training-mode forward")
        grad_out = as_matrix(grad_out)
        if grad_out.shape != (self.n_out, self._x.shape[1]):
            raise ValueError(
                f"grad shape {grad_out.shape} does not match cached "
                f"output shape ({self.n_out}, {self._x.shape[1]})"
            )
        dz = grad_out * (self._z > 0.0) if self.activation == RELU else grad_out
        self.grad_w = dz @ self._x.T
        self.grad_b = dz.sum(axis=1)
        return self.w.T @ dz


class DropoutLayer:
    """Inverted dropout: zero entries with probability rate, scale survivors.

    The mask built by a training-mode forward has entries that are exactly 0
    or 1/(1-rate) and is cached for backward.  Inference mode is the identity.
    """

    def __init__(self, rate, rng: SeededRng | None = None):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate!r}")
        self.rate = float(rate)
        self.rng = rng
        self._mask = None

    def forward(self, x, training=False) -> np.ndarray:
        x = as_matrix(x)
        if not training:
            return x
        if self.rate == 0.0:
            self._mask = np.ones_like(x)
            return x
        if self.rng is None:
            raise RuntimeError("dropout layer has no random source for training")
        keep = 1.0 - self.rate
        self._mask = (self.rng.random(x.shape) >= self.rate) / keep
        return x * self._mask

    def backward(self, grad_out) -> np.ndarray:
        if self._mask is None:
            raise RuntimeError("backward called before a training-mode forward")
        return as_matrix(grad_out) * self._mask


class Network:
    """An ordered stack of dense and dropout layers.

    ``training`` selects the mode: training-mode forwards build caches and
    dropout masks and are single-owner; an inference-mode network is read-only
    and safe to share across threads.
    """

    def __init__(self, layers):
        self.layers = list(layers)
        self.training = False
        prev_out = None
        for layer in self.layers:
            if isinstance(layer, DenseLayer):
                if prev_out is not None and layer.n_in != prev_out:
                    raise ValueError(
                        f"layer input dim {layer.n_in} does not match "
                        f"previous output dim {prev_out}"
                    )
                prev_out = layer.n_out

    def train(self) -> "Network":
        self.training = True
        return self

    def eval(self) -> "Network":
        self.training = False
        return self

    @property
    def input_dim(self) -> int:
        return self.dense_layers()[0].n_in

    @property
    def output_dim(self) -> int:
        return self.dense_layers()[-1].n_out

    def dense_layers(self):
        return [l for l in self.layers if isinstance(l, DenseLayer)]

    def parameters(self):
        """Flat list of parameter arrays, updated in place by optimizers."""
        params = []
        for layer in self.dense_layers():
            params.extend([layer.w, layer.b])
        return params

    def gradients(self):
        """Gradient arrays in the same order as :meth:`parameters`."""
        grads = []
        for layer in self.dense_layers():
            grads.extend([layer.grad_w, layer.grad_b])
        return grads

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x) -> np.ndarray:
        out = as_matrix(x)
        for layer in self.layers:
            out = layer.forward(out, training=self.training)
        return out

    def backward(self, grad_out) -> np.ndarray:
        """Backpropagate a loss gradient through the stack.

        Requires a preceding training-mode forward on the same batch; reuses
        that forward's caches and dropout masks.  Returns dL/d(input).
        """
        if not self.training:
            raise RuntimeError("backward requires training mode")
        g = as_matrix(grad_out)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g


def l2_penalty(net: Network, lam: float) -> float:
    """Tikhonov penalty (lam/2) * sum of squared Frobenius norms of all W.

    Adds lam * W into each dense layer's grad_w (biases excluded), so call it
    after backward, which assigns the grads it increments.
    """
    if lam < 0.0:
        raise ValueError(f"l2 lambda must be nonnegative, got {lam!r}")
    total = 0.0
    for layer in net.dense_layers():
        total += float(np.sum(layer.w * layer.w))
        if lam != 0.0:
            layer.grad_w += lam * layer.w
    return 0.5 * lam * total


def build_reference_network(
    rng: SeededRng, dropout_rate: float = 0.5, zero_bias_init: bool = False
) -> Network:
    """Build the reference 6 -> 500 -> 500 -> 3 stack with dropout.

    Parameters are drawn sequentially from ``rng`` (weights then bias, layer
    by layer), so one seed fixes every parameter.  Dropout layers get child
    generators ``rng.split(100)`` and ``rng.split(101)`` for their masks.
    """
    layers = [
        DenseLayer(INPUT_DIM, HIDDEN_DIM, RELU, rng, zero_bias_init),
        DropoutLayer(dropout_rate, rng.split(100)),
        DenseLayer(HIDDEN_DIM, HIDDEN_DIM, RELU, rng, zero_bias_init),
        DropoutLayer(dropout_rate, rng.split(101)),
        DenseLayer(HIDDEN_DIM, OUTPUT_DIM, LINEAR, rng, zero_bias_init),
    ]
    return Network(layers)
