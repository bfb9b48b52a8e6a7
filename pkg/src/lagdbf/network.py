"""Small feed-forward network used as the learned update rule.

The network maps the real-stacked WSR gradient to a real-stacked precoder
update.  All parameters live in one flat vector ``theta`` so Adam can act
on it directly; the per-layer weight matrices and biases are views into it.

Two encodings are supported:

``"flat"``
    the whole gradient vector (length ``2MN``) is one input sample.
``"coordinate"``
    every real coordinate is fed separately through a scalar-in,
    scalar-out network with shared parameters, so one net works for any
    ``M`` and ``N``.
"""

from dataclasses import dataclass

import numpy as np

from .baselines import AdamState
from .exceptions import ConfigurationError, DimensionError

ENCODINGS = ("flat", "coordinate")
ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
    "relu": (lambda z: np.maximum(z, 0.0), lambda a: (a > 0).astype(float)),
    "identity": (lambda z: z, lambda a: np.ones_like(a)),
}


def parse_arch(spec):
    """Parse a hidden-layer spec such as ``"40,40"`` into ``(40, 40)``.

    An empty string (or ``"0"``) means no hidden layer, i.e. an affine map.
    """
    if isinstance(spec, (list, tuple)):
        sizes = tuple(int(s) for s in spec)
    else:
        text = str(spec).strip().replace("x", ",").replace(" ", "")
        sizes = tuple(int(s) for s in text.split(",") if s) if text not in ("", "0") else ()
    if any(s <= 0 for s in sizes):
        raise ConfigurationError(f"hidden layer sizes must be positive, got {spec!r}")
    return sizes


def format_arch(hidden):
    return ",".join(str(h) for h in hidden) if hidden else "0"


@dataclass
class ForwardTape:
    """Activations retained from one forward pass.

    ``activations[0]`` is the (batched) input and ``activations[l]`` the
    output of layer ``l``; the last entry is the network output.
    """

    activations: list
    layer_dims: tuple


class UpdateNet:
    """Fully connected network with a flat parameter vector and Adam state.

    Parameters
    ----------
    layer_dims : sequence of int
        ``[d_0, d_1, ..., d_L]``; the output width must equal the input width.
    activation : str
        Hidden-layer nonlinearity, the output layer is linear.
    encoding : {"flat", "coordinate"}
        How a gradient vector is presented to the network.
    lr : float
        Adam learning rate for ``theta``.
    """

    def __init__(self, layer_dims, activation="tanh", encoding="flat", lr=1e-4,
                 beta1=0.9, beta2=0.999, eps=1e-8):
        layer_dims = tuple(int(d) for d in layer_dims)
        if len(layer_dims) < 2 or any(d <= 0 for d in layer_dims):
            raise ConfigurationError(f"invalid layer dims {layer_dims}")
        if layer_dims[0] != layer_dims[-1]:
            raise ConfigurationError(
                f"input and output widths must match, got {layer_dims[0]} and {layer_dims[-1]}")
        if activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {activation!r}")
        if encoding not in ENCODINGS:
            raise ConfigurationError(f"unknown encoding {encoding!r}")
        if encoding == "coordinate" and layer_dims[0] != 1:
            raise ConfigurationError("coordinate encoding needs scalar input and output")
        self.layer_dims = layer_dims
        self.activation = activation
        self.encoding = encoding
        self.theta = np.zeros(self.n_params)
        self.weights, self.biases = self._views(self.theta)
        self.adam = AdamState(self.n_params, lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    @property
    def n_params(self):
        dims = self.layer_dims
        return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))

    @property
    def n_layers(self):
        return len(self.layer_dims) - 1

    def _views(self, flat):
        weights, biases = [], []
        offset = 0
        for fan_in, fan_out in zip(self.layer_dims[:-1], self.layer_dims[1:]):
            weights.append(flat[offset:offset + fan_in * fan_out].reshape(fan_out, fan_in))
            offset += fan_in * fan_out
            biases.append(flat[offset:offset + fan_out])
            offset += fan_out
        return weights, biases

    def set_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.theta.shape:
            raise DimensionError(f"expected {self.n_params} parameters, got shape {theta.shape}")
        self.theta[:] = theta

    def copy(self):
        other = UpdateNet(self.layer_dims, self.activation, self.encoding, self.adam.lr,
                          self.adam.beta1, self.adam.beta2, self.adam.eps)
        other.theta[:] = self.theta
        other.adam.m[:] = self.adam.m
        other.adam.v[:] = self.adam.v
        other.adam.t = self.adam.t
        return other

    def __call__(self, x):
        return self.forward(x)[0]

    def _batch(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionError(f"input must be a vector, got shape {x.shape}")
        if self.encoding == "coordinate":
            return x[:, np.newaxis]
        if x.shape[0] != self.layer_dims[0]:
            raise DimensionError(f"input has length {x.shape[0]}, expected {self.layer_dims[0]}")
        return x[np.newaxis, :]

    def forward(self, x):
        """Evaluate the network; returns ``(output, tape)``."""
        act, _ = ACTIVATIONS[self.activation]
        a = self._batch(x)
        activations = [a]
        last = self.n_layers - 1
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W.T + b
            a = z if l == last else act(z)
            activations.append(a)
        return a.reshape(-1), ForwardTape(activations, self.layer_dims)

    def backward_params(self, tape, upstream):
        """Gradient of ``<upstream, forward(x)>`` with respect to ``theta``.

        The input is treated as a constant.
        """
        if tape.layer_dims != self.layer_dims:
            raise ValueError("tape was recorded with a different architecture")
        _, dact = ACTIVATIONS[self.activation]
        out = tape.activations[-1]
        upstream = np.asarray(upstream, dtype=float)
        if upstream.size != out.size:
            raise DimensionError(f"upstream has length {upstream.size}, expected {out.size}")
        delta = upstream.reshape(out.shape)
        grad = np.empty(self.n_params)
        gW, gb = self._views(grad)
        for l in range(self.n_layers - 1, -1, -1):
            a_in = tape.activations[l]
            gW[l][...] = delta.T @ a_in
            gb[l][...] = delta.sum(axis=0)
            if l > 0:
                delta = (delta @ self.weights[l]) * dact(a_in)
        return grad

    def apply_theta_update(self, grad_theta):
        """Adam ascent step ``theta <- theta + Adam(grad_theta)``."""
        self.theta += self.adam.step(grad_theta)
        return self


def init_net(config, hidden=(40, 40), rng=None, lr=1e-4, encoding="flat",
             activation="tanh", output_scale=1e-2):
    """Randomly initialised update network for a problem of size ``config``.

    Hidden layers use Glorot-uniform weights and zero biases; the output
    layer's Glorot weights are multiplied by ``output_scale`` (and its bias
    is zero) so the first updates are small.
    """
    rng = np.random.default_rng(rng)
    width = config.n_real if encoding == "flat" else 1
    dims = (width, *parse_arch(hidden), width)
    net = UpdateNet(dims, activation=activation, encoding=encoding, lr=lr)
    for l, W in enumerate(net.weights):
        fan_out, fan_in = W.shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        W[...] = rng.uniform(-limit, limit, size=W.shape)
        if l == net.n_layers - 1:
            W *= output_scale
    return net


def forward(net, x):
    return net.forward(x)


def backward_params(net, tape, upstream):
    return net.backward_params(tape, upstream)


def apply_theta_update(net, grad_theta):
    return net.apply_theta_update(grad_theta)
