import numpy as np
import pytest

from mcmo.nn import (IDENTITY, TANH, AdamState, DenseNetwork, adam_step, gradients,
                     init_network, load_network, save_network)


def numeric_param_grad(net, x, upstream, eps=1e-6):
    g = np.zeros(net.n_params)
    for i in range(net.n_params):
        old = net.params[i]
        net.params[i] = old + eps
        up = np.sum(net.forward(x) * upstream)
        net.params[i] = old - eps
        down = np.sum(net.forward(x) * upstream)
        net.params[i] = old
        g[i] = (up - down) / (2 * eps)
    return g


def numeric_input_grad(net, x, upstream, eps=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += eps
        xm[idx] -= eps
        g[idx] = (np.sum(net.forward(xp) * upstream) - np.sum(net.forward(xm) * upstream)) / (2 * eps)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


@pytest.mark.parametrize("activation", [TANH, IDENTITY])
def test_gradients_match_finite_differences(rng, activation):
    net = init_network((4, 7, 5, 3), activation, rng)
    x = rng.normal(size=(6, 4))
    upstream = rng.normal(size=(6, 3))
    g_params, g_in = gradients(net, x, upstream)
    assert rel_err(g_params, numeric_param_grad(net, x, upstream)) < 1e-6
    assert rel_err(g_in, numeric_input_grad(net, x, upstream)) < 1e-6


def test_single_vector_input_keeps_shape(rng):
    net = init_network((3, 4, 2), TANH, rng)
    y = net.forward(np.zeros(3))
    assert y.shape == (2,)
    assert np.all(np.abs(net.forward(rng.normal(size=(5, 3)) * 100)) <= 1.0)


def test_leaky_relu_passes_negative_slope(rng):
    net = DenseNetwork((1, 1, 1), IDENTITY, negative_slope=0.01)
    net.weights[0][:] = 1.0
    net.weights[1][:] = 1.0
    assert net.forward(np.array([-2.0]))[0] == pytest.approx(-0.02)
    assert net.forward(np.array([3.0]))[0] == pytest.approx(3.0)


def test_init_is_fan_in_uniform(rng):
    net = init_network((50, 400, 1), IDENTITY, rng)
    bound = 1 / np.sqrt(50)
    assert np.abs(net.weights[0]).max() <= bound
    assert np.abs(net.weights[0]).max() > 0.95 * bound


def test_bad_construction():
    with pytest.raises(ValueError):
        DenseNetwork((3,))
    with pytest.raises(ValueError):
        DenseNetwork((3, 2), "relu")
    with pytest.raises(ValueError):
        DenseNetwork((3, 2), negative_slope=1.5)
    with pytest.raises(ValueError):
        DenseNetwork((3, 2)).forward(np.zeros(4))


def test_adam_matches_reference_update():
    params = np.array([1.0, -2.0])
    state = AdamState(2, learning_rate=0.1)
    grads = [np.array([0.5, -1.0]), np.array([0.2, 0.3])]
    m = v = np.zeros(2)
    expected = params.copy()
    for t, g in enumerate(grads, start=1):
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        expected = expected - 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        adam_step(params, g, state)
    assert np.allclose(params, expected, rtol=1e-12)
    assert state.step == 2


def test_adam_rejects_nonfinite_gradients():
    with pytest.raises(FloatingPointError):
        adam_step(np.zeros(2), np.array([np.nan, 0.0]), AdamState(2))


def test_checkpoint_round_trip_is_bit_exact(rng, tmp_path):
    net = init_network((5, 8, 2), TANH, rng)
    adam = AdamState(net.n_params)
    adam_step(net.params, rng.normal(size=net.n_params), adam)
    save_network(net, tmp_path / "net.npz", adam)
    loaded, loaded_adam = load_network(tmp_path / "net.npz")
    x = rng.normal(size=(10, 5))
    assert np.array_equal(loaded.forward(x), net.forward(x))
    assert loaded.widths == net.widths and loaded.output_activation == TANH
    assert np.array_equal(loaded_adam.m, adam.m) and loaded_adam.step == 1
