"""Dense feed-forward networks with hand-written backprop and Adam, in float64.

Parameters of a network live in one flat vector; per-layer weight and bias
arrays are views into it, so the optimizer updates everything in one shot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_rng

TANH = "tanh"
IDENTITY = "identity"
CHECKPOINT_VERSION = 1


class DenseNetwork:
    """Multilayer perceptron: affine layers, Leaky-ReLU hidden units.

    Args:
        widths: layer widths ``(n_in, hidden..., n_out)``.
        output_activation: ``"tanh"`` or ``"identity"``.
        negative_slope: Leaky-ReLU slope for negative pre-activations.
        params: optional flat parameter vector to adopt (copied).
    """

    def __init__(self, widths, output_activation: str = IDENTITY,
                 negative_slope: float = 0.01, params=None):
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or min(widths) < 1:
            raise ValueError(f"invalid layer widths {widths}")
        if output_activation not in (TANH, IDENTITY):
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.widths = widths
        self.output_activation = output_activation
        if not 0.0 <= negative_slope < 1.0:
            raise ValueError(f"negative_slope must lie in [0, 1), got {negative_slope}")
        self.negative_slope = float(negative_slope)
        self.params = np.zeros(self.n_params)
        if params is not None:
            params = np.asarray(params, dtype=np.float64)
            if params.shape != (self.n_params,):
                raise ValueError(f"expected {self.n_params} parameters, got {params.shape}")
            self.params[:] = params
        self._bind_views()
        self._grad = None

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in zip(self.widths[:-1], self.widths[1:]))

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    def _bind_views(self):
        self.weights, self.biases = _views(self.params, self.widths)

    def copy(self) -> "DenseNetwork":
        return DenseNetwork(self.widths, self.output_activation, self.negative_slope, self.params)

    def _check_input(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.widths[0]:
            raise ValueError(f"network expects {self.widths[0]} inputs, got {x.shape[1]}")
        return x, single

    def forward(self, x, return_cache: bool = False):
        """Evaluate the network on one input vector or a batch of rows."""
        h, single = self._check_input(x)
        slope = self.negative_slope
        acts = [h]
        masks = []
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w
            z += b
            if i < last:
                mask = z > 0
                h = np.maximum(z, slope * z)
                masks.append(mask)
            elif self.output_activation == TANH:
                h = np.tanh(z, out=z)
            else:
                h = z
            acts.append(h)
        out = h[0] if single else h
        if return_cache:
            return out, (acts, masks)
        return out

    __call__ = forward

    def backward(self, cache, upstream, param_grads: bool = True):
        """Gradients of ``sum(output * upstream)`` w.r.t. parameters and input.

        ``cache`` comes from ``forward(..., return_cache=True)``. Returns the
        flat parameter gradient (``None`` if ``param_grads`` is false) and the
        input gradient with the batch shape of the forward input. The
        parameter gradient is a buffer owned by the network and is
        overwritten by the next call.
        """
        acts, masks = cache
        out = acts[-1]
        g = np.asarray(upstream, dtype=np.float64).reshape(out.shape)
        if self.output_activation == TANH:
            g = g * (1.0 - out * out)
        slope = self.negative_slope
        grads = None
        if param_grads:
            if self._grad is None:
                self._grad = np.zeros(self.n_params)
                self._grad_views = _views(self._grad, self.widths)
            grads = self._grad
            gw_views, gb_views = self._grad_views
        for i in range(self.n_layers - 1, -1, -1):
            if param_grads:
                np.matmul(acts[i].T, g, out=gw_views[i])
                np.sum(g, axis=0, out=gb_views[i])
            g = g @ self.weights[i].T
            if i > 0:
                g = np.where(masks[i - 1], g, slope * g)
        return grads, g


def _views(flat, widths):
    ws, bs = [], []
    offset = 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        ws.append(flat[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out))
        offset += fan_in * fan_out
        bs.append(flat[offset:offset + fan_out])
        offset += fan_out
    return ws, bs


def init_network(widths, output_activation: str = IDENTITY, rng=None,
                 negative_slope: float = 0.01) -> DenseNetwork:
    """New network with ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))`` weights and zero biases."""
    rng = check_rng(rng)
    net = DenseNetwork(widths, output_activation, negative_slope)
    for w in net.weights:
        bound = 1.0 / np.sqrt(w.shape[0])
        w[:] = rng.uniform(-bound, bound, size=w.shape)
    return net


def forward(net: DenseNetwork, x) -> np.ndarray:
    return net.forward(x)


def gradients(net: DenseNetwork, x, upstream) -> tuple[np.ndarray, np.ndarray]:
    """Reverse-mode gradients of ``output . upstream`` for input ``x``."""
    out, cache = net.forward(x, return_cache=True)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != np.shape(out):
        raise ValueError(f"upstream shape {upstream.shape} does not match output {np.shape(out)}")
    grads, g_in = net.backward(cache, upstream)
    return grads.copy(), g_in.reshape(np.shape(x))


@dataclass
class AdamState:
    """Moment accumulators and hyperparameters for one parameter vector."""

    n_params: int
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.n_params)
        if self.v is None:
            self.v = np.zeros(self.n_params)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """Bias-corrected Adam update applied to ``params`` in place (also returned)."""
    if grads.shape != params.shape:
        raise ValueError(f"gradient shape {grads.shape} does not match parameters {params.shape}")
    if not np.all(np.isfinite(grads)):
        bad = np.nonzero(~np.isfinite(grads))[0]
        raise FloatingPointError(
            f"non-finite gradient in {bad.size} component(s), first index {bad[0]}"
        )
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    state.m *= b1
    state.m += (1.0 - b1) * grads
    state.v *= b2
    state.v += (1.0 - b2) * (grads * grads)
    denom = np.sqrt(state.v / (1.0 - b2 ** state.step))
    denom += state.epsilon
    step = state.m * (state.learning_rate / (1.0 - b1 ** state.step))
    step /= denom
    params -= step
    return params


def save_network(net: DenseNetwork, path, adam: AdamState | None = None) -> Path:
    """Write a versioned ``.npz`` checkpoint that reloads bit-for-bit."""
    path = Path(path)
    payload = {
        "version": np.array(CHECKPOINT_VERSION),
        "widths": np.array(net.widths, dtype=np.int64),
        "output_activation": np.array(net.output_activation),
        "negative_slope": np.array(net.negative_slope),
        "params": net.params,
    }
    if adam is not None:
        payload.update(adam_m=adam.m, adam_v=adam.v, adam_step=np.array(adam.step),
                       adam_hyper=np.array([adam.learning_rate, adam.beta1, adam.beta2, adam.epsilon]))
    with open(path, "wb") as fh:
        np.savez(fh, **payload)
    return path


def load_network(path) -> tuple[DenseNetwork, AdamState | None]:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        net = DenseNetwork(tuple(data["widths"].tolist()), str(data["output_activation"]),
                           float(data["negative_slope"]), data["params"])
        adam = None
        if "adam_m" in data:
            lr, b1, b2, eps = data["adam_hyper"].tolist()
            adam = AdamState(net.n_params, lr, b1, b2, eps, int(data["adam_step"]),
                             data["adam_m"].copy(), data["adam_v"].copy())
    return net, adam
