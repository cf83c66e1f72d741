import math

import numpy as np
import pytest

from sdmlp.numerics import SeededRng
from sdmlp.optim import SGD, Adadelta


def reference_adadelta(grads, rho, eps):
    """Straight-line restatement of the recurrences for one scalar.

    Written independently of the optimizer class on purpose: this is the
    oracle the vectorized implementation is checked against.
    """
    eg = 0.0
    ex = 0.0
    x = 0.0
    xs = []
    for g in grads:
        eg = rho * eg + (1.0 - rho) * g * g
        delta = -(math.sqrt(ex + eps) / math.sqrt(eg + eps)) * g
        ex = rho * ex + (1.0 - rho) * delta * delta
        x = x + delta
        xs.append(x)
    return xs


class TestAdadelta:
    def test_first_step_hand_values(self):
        opt = Adadelta(rho=0.95, eps=1e-6)
        p = [np.array([0.0])]
        g = [np.array([1.0])]
        opt.step(p, g)
        assert opt.acc_grad[0][0] == pytest.approx(0.05)
        assert p[0][0] == pytest.approx(-4.4721e-3, rel=1e-4)
        assert opt.acc_update[0][0] == pytest.approx(1.0e-6, rel=1e-4)

    def test_zero_gradient_decays_accumulators(self):
        opt = Adadelta(rho=0.95, eps=1e-6)
        p = [np.array([1.0])]
        opt.step(p, [np.array([2.0])])
        eg_before = opt.acc_grad[0][0].copy()
        ex_before = opt.acc_update[0][0].copy()
        x_before = p[0][0].copy()
        opt.step(p, [np.array([0.0])])
        assert p[0][0] == x_before
        assert opt.acc_grad[0][0] == pytest.approx(0.95 * eg_before, rel=1e-15)
        assert opt.acc_update[0][0] == pytest.approx(0.95 * ex_before, rel=1e-15)

    def test_update_opposes_gradient(self):
        rng = SeededRng(5)
        opt = Adadelta()
        p = [np.zeros(64)]
        for _ in range(10):
            g = rng.uniform(-3.0, 3.0, 64)
            before = p[0].copy()
            opt.step(p, [g])
            moved = p[0] - before
            nz = g != 0.0
            assert (np.sign(moved[nz]) == -np.sign(g[nz])).all()

    def test_matches_scalar_reference(self):
        rng = SeededRng(17)
        for _ in range(50):
            grads = rng.uniform(-2.0, 2.0, 30)
            opt = Adadelta(rho=0.95, eps=1e-6)
            p = [np.array([0.0])]
            ref = reference_adadelta(grads, 0.95, 1e-6)
            for g, expected in zip(grads, ref):
                opt.step(p, [np.array([g])])
                assert abs(p[0][0] - expected) <= 1e-12

    def test_first_step_closed_form(self):
        # with zeroed accumulators the first update is
        # -sqrt(eps) * g / sqrt((1-rho) g^2 + eps)
        rho, eps = 0.95, 1e-6
        gs = SeededRng(23).uniform(-5.0, 5.0, 10)
        for g in gs:
            opt = Adadelta(rho=rho, eps=eps)
            p = [np.array([0.0])]
            opt.step(p, [np.array([g])])
            closed = -math.sqrt(eps) * g / math.sqrt((1 - rho) * g * g + eps)
            assert p[0][0] == pytest.approx(closed, rel=1e-12)
            assert abs(p[0][0]) <= math.sqrt(eps) / math.sqrt((1 - rho) * g * g) * abs(g)

    def test_shape_mismatch(self):
        opt = Adadelta()
        with pytest.raises(ValueError, match="shape mismatch"):
            opt.step([np.zeros((2, 2))], [np.zeros(3)])

    def test_invalid_hyperparameters(self):
        with pytest.raises(ValueError):
            Adadelta(rho=1.0)
        with pytest.raises(ValueError):
            Adadelta(eps=0.0)


class TestSGD:
    def test_hand_step(self):
        opt = SGD(learning_rate=0.1)
        p = [np.array([1.0])]
        opt.step(p, [np.array([2.0])])
        assert p[0][0] == pytest.approx(0.8)

    def test_zero_gradient_no_move(self):
        opt = SGD(learning_rate=0.1)
        p = [np.array([1.0, -2.0])]
        opt.step(p, [np.zeros(2)])
        assert np.array_equal(p[0], [1.0, -2.0])

    def test_linear_in_rate(self):
        g = [np.array([3.0])]
        p_half = [np.array([1.0])]
        half = SGD(learning_rate=0.05)
        half.step(p_half, g)
        half.step(p_half, g)
        p_full = [np.array([1.0])]
        SGD(learning_rate=0.1).step(p_full, g)
        assert p_half[0][0] == pytest.approx(p_full[0][0])

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError, match="positive"):
            SGD(learning_rate=0.0)


class TestDescentOnQuadratic:
    def test_both_optimizers_descend(self):
        # f(x) = x^2, gradient 2x, start at 1
        for opt in (SGD(learning_rate=0.1), Adadelta()):
            p = [np.array([1.0])]
            prev = p[0][0] ** 2
            for _ in range(100):
                opt.step(p, [2.0 * p[0]])
                f = p[0][0] ** 2
                assert f <= prev
                prev = f
