"""Small tanh multilayer perceptron with hand-written backpropagation."""

from __future__ import annotations

import json

import numpy as np

from ..core import DimensionMismatch


class Mlp:
    """Affine layers with tanh between them and an identity output.

    ``forward`` accepts a single vector or a batch (rows). ``backward``
    takes the cache from ``forward`` and dL/d(output) and returns gradients
    in the same layout as ``params``.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None,
                 scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            if rng is None:
                w = np.zeros((n_in, n_out))
            else:
                w = rng.normal(0.0, scale / np.sqrt(n_in), size=(n_in, n_out))
            self.weights.append(w)
            self.biases.append(np.zeros(n_out))

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    @property
    def n_params(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.sizes[:-1], self.sizes[1:]))

    def copy(self) -> "Mlp":
        other = Mlp(self.sizes)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def forward(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise DimensionMismatch(f"input has {h.shape[1]} features, expected {self.sizes[0]}")
        acts = [h]
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if k == last else np.tanh(z)
            acts.append(h)
        out = h[0] if single else h
        return out, (single, acts)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, upstream: np.ndarray) -> list[np.ndarray]:
        single, acts = cache
        grad = np.asarray(upstream, dtype=float)
        grad = grad[None, :] if single else grad
        if grad.shape != acts[-1].shape:
            raise DimensionMismatch("upstream gradient shape does not match output")
        grads: list[np.ndarray] = []
        last = len(self.weights) - 1
        for k in range(last, -1, -1):
            if k != last:
                grad = grad * (1.0 - acts[k + 1] ** 2)  # tanh'
            gw = acts[k].T @ grad
            gb = grad.sum(axis=0)
            grads = [gw, gb] + grads
            if k > 0:
                grad = grad @ self.weights[k].T
        return grads

    def to_json(self) -> str:
        return json.dumps({"sizes": self.sizes,
                           "weights": [w.tolist() for w in self.weights],
                           "biases": [b.tolist() for b in self.biases]})

    @classmethod
    def from_json(cls, text: str) -> "Mlp":
        data = json.loads(text)
        net = cls(data["sizes"])
        net.weights = [np.array(w, dtype=float) for w in data["weights"]]
        net.biases = [np.array(b, dtype=float) for b in data["biases"]]
        return net


class Sgd:
    """SGD with optional momentum and global gradient-norm clipping."""

    def __init__(self, params: list[np.ndarray], lr: float, momentum: float = 0.0,
                 clip: float | None = 5.0):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.clip = clip
        self.velocity = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> float:
        norm = float(np.sqrt(sum(float((g**2).sum()) for g in grads)))
        scale = 1.0
        if self.clip is not None and norm > self.clip:
            scale = self.clip / norm
        for p, g, v in zip(self.params, grads, self.velocity):
            v *= self.momentum
            v += g * scale
            p -= self.lr * v
        return norm
