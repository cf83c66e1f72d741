#!/usr/bin/env python3
"""Build a small dense network, run forward/backward, and check the gradients.

The backward pass is verified against central finite differences of the loss,
which only ever uses the forward pass.
"""

import numpy as np

from sdmlp import DenseLayer, Network, SeededRng, mse
from sdmlp.gradcheck import analytic_gradients, max_relative_error, numerical_gradients

rng = SeededRng(42)

# a 6 -> 5 -> 3 stack: hidden relu, linear output
net = Network(
    [
        DenseLayer(6, 5, "relu", rng),
        DenseLayer(5, 3, "linear", rng),
    ]
)
print("parameters:", net.parameter_count())

# a batch of 10 random samples (columns) with random targets
x = rng.uniform(-1.0, 1.0, 6 * 10).reshape(6, 10)
y = rng.uniform(-2.0, 2.0, 3 * 10).reshape(3, 10)

net.train()
pred = net.forward(x)
loss, grad_out = mse(pred, y)
print("loss:", loss)

# backward fills every layer's grad_w / grad_b
net.backward(grad_out)
net.eval()
for i, layer in enumerate(net.dense_layers()):
    print(f"layer {i}: |grad_w| max = {np.abs(layer.grad_w).max():.4f}")

# the same gradients, from finite differences of the loss alone
analytic = analytic_gradients(net, x, y)
numeric = numerical_gradients(net, x, y, eps=1e-5)
err, _ = max_relative_error(analytic, numeric)
print(f"max relative error vs finite differences: {err:.2e}")
assert err < 1e-6
print("gradcheck OK")
