"""Optimizer arithmetic, training contracts, grad_check, checkpoint round trip."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsv.nnkit import (AdamState, Dense, Network, NnkitError, NonFiniteGradient,
                       Relu, Sigmoid, TrainConfig, adam_step, grad_check,
                       load_checkpoint, save_checkpoint, train)


def make_params(values):
    return [np.array(v, dtype=np.float64) for v in values]


def test_adam_zero_gradient_is_identity():
    params = make_params([[1.0, -2.0], [0.5]])
    state = AdamState.for_params(params)
    before = [p.copy() for p in params]
    adam_step(params, [np.zeros_like(p) for p in params], state)
    assert all(np.array_equal(a, b) for a, b in zip(params, before))
    assert state.t == 1


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8))
@settings(max_examples=50, deadline=None)
def test_adam_zero_gradient_identity_property(values):
    params = make_params([values])
    state = AdamState.for_params(params)
    before = [p.copy() for p in params]
    adam_step(params, [np.zeros_like(p) for p in params], state)
    assert all(np.array_equal(a, b) for a, b in zip(params, before))


def test_adam_first_step_hand_arithmetic():
    # m_hat = g, v_hat = g^2 after bias correction, so the step is ~lr * sign(g)
    params = make_params([[1.0]])
    state = AdamState.for_params(params, lr=1e-3)
    adam_step(params, make_params([[0.5]]), state)
    assert state.t == 1
    assert params[0][0] == pytest.approx(0.9990, abs=1e-6)


def test_adam_constant_gradient_step_magnitudes():
    # closed-form moment recursion: constant g gives m_hat = g, v_hat = g^2
    # at every t, so successive step magnitudes are equal up to epsilon.
    params = make_params([[1.0]])
    state = AdamState.for_params(params, lr=1e-3)
    g = make_params([[0.5]])
    adam_step(params, g, state)
    step1 = abs(1.0 - params[0][0])
    w1 = params[0][0]
    adam_step(params, g, state)
    step2 = abs(w1 - params[0][0])
    assert step2 <= step1 * (1 + 1e-6)


def test_adam_refuses_nonfinite_gradient():
    params = make_params([[1.0, 2.0]])
    state = AdamState.for_params(params)
    before = params[0].copy()
    with pytest.raises(NonFiniteGradient):
        adam_step(params, make_params([[np.nan, 0.0]]), state)
    assert np.array_equal(params[0], before)
    assert state.t == 0


def linear_scalar_net(w0=0.0):
    layer = Dense(1, 1)
    layer.weight[...] = w0
    return Network((1,), [layer])


def test_train_converges_on_convex_quadratic():
    # y = w * x with data {(1, 2)}: unique minimum at w = 2
    net = linear_scalar_net(0.0)
    train(net, np.array([[1.0]]), np.array([[2.0]]),
          TrainConfig(epochs=4000, batch_size=1, lr=1e-2))
    # bias also trains; w + b must land on 2
    pred = net.predict(np.array([1.0]))[0]
    assert abs(pred - 2.0) < 1e-3


def test_train_same_seed_identical_curves():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((16, 3))
    y = rng.standard_normal((16, 2))

    def run():
        net = Network((3,), [Dense(3, 4, np.random.default_rng(1)), Relu(),
                             Dense(4, 2, np.random.default_rng(2))])
        return train(net, x, y, TrainConfig(epochs=5, batch_size=4, seed=9))

    assert run() == run()


def test_train_zero_lr_constant_curve():
    rng = np.random.default_rng(6)
    net = Network((2,), [Dense(2, 1, rng)])
    x = rng.standard_normal((8, 2))
    y = rng.standard_normal((8, 1))
    curve = train(net, x, y, TrainConfig(epochs=3, batch_size=8, lr=0.0, shuffle=False))
    assert curve[0] == curve[1] == curve[2]


def test_train_rejects_empty_samples():
    net = linear_scalar_net()
    with pytest.raises(ValueError):
        train(net, np.zeros((0, 1)), np.zeros((0, 1)), TrainConfig())


def test_grad_check_dense_relu_dense():
    rng = np.random.default_rng(13)
    net = Network((4,), [Dense(4, 6, rng), Relu(), Dense(6, 2, rng)])
    x = rng.standard_normal((3, 4)) + 0.05
    assert grad_check(net, x) < 1e-4


def test_grad_check_linear_net_near_exact():
    # the loss is exactly quadratic in the parameters, so central
    # differences are exact up to rounding
    rng = np.random.default_rng(14)
    net = Network((3,), [Dense(3, 2, rng)])
    x = rng.standard_normal((4, 3))
    assert grad_check(net, x) < 1e-7


def test_grad_check_zero_weights_relu_away_from_kinks():
    # all-zero weights put every relu input exactly at the 0 kink unless the
    # bias shifts it; inputs bounded away from kinks keep the check clean
    net = Network((2,), [Dense(2, 3), Relu(), Dense(3, 1)])
    net.params()[1][...] = 0.5  # first bias: relu inputs at 0.5, off the kink
    x = np.array([[0.3, -0.4]])
    assert grad_check(net, x) < 1e-7


def test_checkpoint_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(21)
    net = Network((4,), [Dense(4, 8, rng), Sigmoid(), Dense(8, 4, rng)])
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, optimizer={"lr": 1e-3, "beta1": 0.9},
                    seed=21, meta={"note": "round trip"})
    loaded, header = load_checkpoint(path)
    for a, b in zip(net.params(), loaded.params()):
        assert np.array_equal(a, b) and a.dtype == b.dtype
    assert header["seed"] == 21
    assert header["optimizer"]["lr"] == 1e-3
    x = np.random.default_rng(3).standard_normal(4)
    assert np.array_equal(net.predict(x), loaded.predict(x))


def test_checkpoint_truncated_blob_rejected(tmp_path):
    rng = np.random.default_rng(22)
    net = Network((4,), [Dense(4, 4, rng)])
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(NnkitError, match="truncated"):
        load_checkpoint(path)
