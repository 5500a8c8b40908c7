"""Minimal dense networks with hand-rolled backprop.

Everything here is plain numpy on float64. The networks are small enough
(a few hundred units per layer) that vectorised matmuls are all the speed
we need, and owning the backward pass keeps the actor-through-projection
gradient chain explicit instead of hidden inside an autograd tape.

Gradient convention: ``backward`` consumes dL/dy for the batch produced by
the most recent ``forward`` call and returns dL/dx. Parameter gradients are
summed over the batch rows, so a caller wanting a mean loss folds the 1/B
factor into dL/dy.
"""

from __future__ import annotations

import json

import numpy as np

_ACTIVATIONS = ("linear", "tanh")


class DenseNet:
    """Fully connected net, ReLU hidden layers, linear or tanh output."""

    def __init__(self, layer_sizes, output_activation="linear", final_scale=None,
                 rng=None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if output_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        rng = np.random.default_rng() if rng is None else rng
        self.layer_sizes = tuple(int(n) for n in layer_sizes)
        self.output_activation = output_activation
        self.weights = []
        self.biases = []
        n_layers = len(self.layer_sizes) - 1
        for i in range(n_layers):
            fan_in, fan_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            bound = 1.0 / np.sqrt(fan_in)
            if final_scale is not None and i == n_layers - 1:
                bound = float(final_scale)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))
        self._cache = None
        self.weight_grads = [np.zeros_like(w) for w in self.weights]
        self.bias_grads = [np.zeros_like(b) for b in self.biases]

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def output_dim(self):
        return self.layer_sizes[-1]

    def forward(self, x):
        """Run the net on ``x`` of shape (B, in) or (in,), caching for backward."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        activations = [x]
        pre = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            if i < last:
                h = np.maximum(z, 0.0)
            elif self.output_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
            activations.append(h)
        self._cache = (activations, pre)
        return h[0] if squeeze else h

    def backward(self, grad_out):
        """Backprop dL/dy through the cached forward pass; returns dL/dx."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        activations, pre = self._cache
        grad = np.asarray(grad_out, dtype=np.float64)
        if grad.ndim == 1:
            grad = grad[None, :]
        if grad.shape != activations[-1].shape:
            raise ValueError("grad_out shape does not match last forward output")
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            if i == last and self.output_activation == "tanh":
                dz = grad * (1.0 - activations[-1] ** 2)
            elif i == last:
                dz = grad
            else:
                dz = grad * (pre[i] > 0.0)
            self.weight_grads[i] = activations[i].T @ dz
            self.bias_grads[i] = dz.sum(axis=0)
            grad = dz @ self.weights[i].T
        return grad

    def parameters(self):
        return self.weights + self.biases

    def gradients(self):
        return self.weight_grads + self.bias_grads

    def copy(self):
        """Deep copy with identical weights (for target networks)."""
        twin = DenseNet.__new__(DenseNet)
        twin.layer_sizes = self.layer_sizes
        twin.output_activation = self.output_activation
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        twin._cache = None
        twin.weight_grads = [np.zeros_like(w) for w in self.weights]
        twin.bias_grads = [np.zeros_like(b) for b in self.biases]
        return twin

    def state_arrays(self, prefix=""):
        """Flat dict of parameter arrays, keyed for npz storage."""
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"{prefix}W{i}"] = w
            out[f"{prefix}b{i}"] = b
        return out

    def load_state_arrays(self, arrays, prefix=""):
        for i in range(len(self.weights)):
            w = arrays[f"{prefix}W{i}"]
            b = arrays[f"{prefix}b{i}"]
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError("checkpoint layer shapes do not match network")
            self.weights[i] = np.array(w, dtype=np.float64)
            self.biases[i] = np.array(b, dtype=np.float64)
        self._cache = None

    def save(self, path):
        meta = {"layer_sizes": list(self.layer_sizes),
                "output_activation": self.output_activation}
        np.savez(path, meta=np.str_(json.dumps(meta)), **self.state_arrays())

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            net = cls(meta["layer_sizes"], output_activation=meta["output_activation"])
            net.load_state_arrays(data)
        return net


class Adam:
    """Adam with bias correction over a fixed list of parameter arrays.

    Holds references to the arrays it was built with and updates them in
    place, so the owning network sees every step immediately.
    """

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError("gradient list length does not match parameters")
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)

    def state_arrays(self, prefix=""):
        out = {f"{prefix}t": np.array(self.t)}
        for i, (m, v) in enumerate(zip(self.m, self.v)):
            out[f"{prefix}m{i}"] = m
            out[f"{prefix}v{i}"] = v
        return out

    def load_state_arrays(self, arrays, prefix=""):
        self.t = int(arrays[f"{prefix}t"])
        for i in range(len(self.params)):
            self.m[i] = np.array(arrays[f"{prefix}m{i}"], dtype=np.float64)
            self.v[i] = np.array(arrays[f"{prefix}v{i}"], dtype=np.float64)


def soft_update(target, online, tau):
    """Polyak step: target <- tau * online + (1 - tau) * target, in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for pt, po in zip(target.parameters(), online.parameters()):
        pt *= 1.0 - tau
        pt += tau * po
