#!/usr/bin/env python3
"""Step the two optimizers by hand on toy problems.

Shows the Adadelta recurrences on a single scalar (including the closed-form
first step) and compares descent against plain SGD on f(x) = x^2.
"""

import math

import numpy as np

from sdmlp import SGD, Adadelta

# --- first Adadelta step on a unit gradient, by the recurrences ---
opt = Adadelta(rho=0.95, eps=1e-6)
p = [np.array([0.0])]
opt.step(p, [np.array([1.0])])
print("after one step with g=1:")
print("  E[g^2]  =", opt.acc_grad[0][0])          # 0.05
print("  delta   =", p[0][0])                     # ~ -4.4721e-3
print("  E[dx^2] =", opt.acc_update[0][0])        # ~ 1e-6
closed = -math.sqrt(1e-6) / math.sqrt(0.05 * 1.0 + 1e-6)
print("  closed form:", closed)

# --- both optimizers on the quadratic f(x) = x^2 ---
for name, opt in [("sgd(0.1)", SGD(0.1)), ("adadelta", Adadelta())]:
    x = [np.array([1.0])]
    trace = []
    for step in range(100):
        opt.step(x, [2.0 * x[0]])      # gradient of x^2
        trace.append(x[0][0] ** 2)
    print(f"{name:10s} f after 1/10/100 steps: "
          f"{trace[0]:.4f} {trace[9]:.4f} {trace[99]:.6f}")
