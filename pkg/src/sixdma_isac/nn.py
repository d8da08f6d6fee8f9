"""Minimal dense network core: forward, backward, Adam, checkpoints.

Sized for small actor/critic networks (two hidden layers, a few hundred
units).  Everything is float64 so finite-difference gradient checks stay
tight.  An ``Mlp`` is mutated only by its owning trainer; inference on a
frozen copy is safe from any thread.
"""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "linear")


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "linear":
        return z
    raise ValueError(f"unknown activation {name!r}")


def _activation_grad(name: str, z: np.ndarray, out: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(float)
    if name == "tanh":
        return 1.0 - out**2
    if name == "linear":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {name!r}")


class Mlp:
    """Fully-connected network: affine layers with per-layer activations.

    ``dims`` is the chain (input, hidden..., output); ``activations`` has
    one entry per affine layer.  Weights are (out, in) and inputs may be a
    single vector or a (batch, in) matrix.
    """

    def __init__(self, dims, activations, rng: np.random.Generator, final_scale: float = 1.0):
        dims = [int(d) for d in dims]
        if len(dims) < 2:
            raise ValueError("need at least an input and an output dimension")
        if len(activations) != len(dims) - 1:
            raise ValueError("one activation per affine layer required")
        for act in activations:
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
        self.dims = dims
        self.activations = list(activations)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for k, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
            bound = 1.0 / np.sqrt(din)
            w = rng.uniform(-bound, bound, size=(dout, din))
            b = rng.uniform(-bound, bound, size=dout)
            if k == len(dims) - 2 and final_scale != 1.0:
                w *= final_scale
                b *= final_scale
            self.weights.append(w)
            self.biases.append(b)

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def output_dim(self) -> int:
        return self.dims[-1]

    def param_count(self) -> int:
        """Total parameter count: sum of d_in*d_out + d_out over layers."""
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def _check_input(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=float)
        squeezed = arr.ndim == 1
        if squeezed:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got shape {arr.shape}")
        return arr, squeezed

    def forward(self, x) -> np.ndarray:
        out, _ = self.forward_cached(x)
        return out

    def forward_cached(self, x):
        """Forward pass returning (output, cache) for a later backward."""
        arr, squeezed = self._check_input(x)
        pre: list[np.ndarray] = []
        post: list[np.ndarray] = [arr]
        h = arr
        for w, b, act in zip(self.weights, self.biases, self.activations):
            z = h @ w.T + b
            h = _apply_activation(act, z)
            pre.append(z)
            post.append(h)
        out = h[0] if squeezed else h
        return out, (pre, post, squeezed)

    def backward(self, cache, upstream):
        """Backpropagate ``upstream`` (dLoss/dOutput) through the cache.

        Returns ``(grads, input_grad)`` where grads is a list of (dW, db)
        pairs aligned with the layers.
        """
        pre, post, squeezed = cache
        g = np.asarray(upstream, dtype=float)
        if squeezed:
            g = g[None, :]
        if g.shape != (post[0].shape[0], self.output_dim):
            raise ValueError(f"upstream gradient shape {g.shape} does not match output")
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        for k in range(len(self.weights) - 1, -1, -1):
            g = g * _activation_grad(self.activations[k], pre[k], post[k + 1])
            grads[k] = (g.T @ post[k], g.sum(axis=0))
            g = g @ self.weights[k]
        input_grad = g[0] if squeezed else g
        return grads, input_grad

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def copy(self) -> "Mlp":
        dup = object.__new__(Mlp)
        dup.dims = list(self.dims)
        dup.activations = list(self.activations)
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def copy_from(self, other: "Mlp") -> None:
        for dst, src in zip(self.parameters(), other.parameters()):
            dst[...] = src

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Flat layer_dims/activation header plus row-major parameter arrays."""
        arrays = {
            "layer_dims": np.asarray(self.dims, dtype=np.int64),
            "activations": np.asarray([ACTIVATIONS.index(a) for a in self.activations], dtype=np.int64),
        }
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{k}"] = w
            arrays[f"b{k}"] = b
        return arrays

    def save(self, path) -> None:
        np.savez(path, **self.state_arrays())

    @classmethod
    def from_arrays(cls, arrays) -> "Mlp":
        dims = [int(d) for d in np.asarray(arrays["layer_dims"])]
        acts = [ACTIVATIONS[int(i)] for i in np.asarray(arrays["activations"])]
        net = object.__new__(cls)
        net.dims = dims
        net.activations = acts
        net.weights = []
        net.biases = []
        for k in range(len(dims) - 1):
            w = np.array(arrays[f"w{k}"], dtype=float)
            b = np.array(arrays[f"b{k}"], dtype=float)
            if w.shape != (dims[k + 1], dims[k]) or b.shape != (dims[k + 1],):
                raise ValueError("checkpoint arrays do not match the layer-dims header")
            net.weights.append(w)
            net.biases.append(b)
        return net

    @classmethod
    def load(cls, path) -> "Mlp":
        with np.load(path) as arrays:
            return cls.from_arrays(arrays)


class Adam:
    """Bias-corrected Adam over a list of parameter arrays."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient count does not match optimizer state")
        self.step_count += 1
        b1c = 1.0 - self.beta1**self.step_count
        b2c = 1.0 - self.beta2**self.step_count
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    def state_arrays(self, prefix: str = "") -> dict[str, np.ndarray]:
        arrays = {
            f"{prefix}meta": np.array([self.lr, self.beta1, self.beta2, self.eps, float(self.step_count)])
        }
        for k, (m, v) in enumerate(zip(self.m, self.v)):
            arrays[f"{prefix}m{k}"] = m
            arrays[f"{prefix}v{k}"] = v
        return arrays

    def load_arrays(self, arrays, prefix: str = "") -> None:
        meta = np.asarray(arrays[f"{prefix}meta"])
        self.lr, self.beta1, self.beta2, self.eps = (float(x) for x in meta[:4])
        self.step_count = int(meta[4])
        self.m = [np.array(arrays[f"{prefix}m{k}"], dtype=float) for k in range(len(self.m))]
        self.v = [np.array(arrays[f"{prefix}v{k}"], dtype=float) for k in range(len(self.v))]


def flatten_grads(grads) -> list[np.ndarray]:
    out = []
    for dw, db in grads:
        out.extend([dw, db])
    return out


def finite_difference_gradients(net: Mlp, x, upstream, h: float = 1e-5) -> list[np.ndarray]:
    """Central-difference gradients of sum(upstream * output) per parameter.

    Independent of :meth:`Mlp.backward`; used as the reference when
    checking the analytic gradients.
    """
    arr = np.asarray(x, dtype=float)
    up = np.asarray(upstream, dtype=float)

    def loss() -> float:
        return float(np.sum(net.forward(arr) * up))

    fd = []
    for p in net.parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            plus = loss()
            p[idx] = orig - h
            minus = loss()
            p[idx] = orig
            g[idx] = (plus - minus) / (2.0 * h)
            it.iternext()
        fd.append(g)
    return fd


def max_relative_gradient_error(net: Mlp, x, upstream, h: float = 1e-5) -> float:
    """Worst-case elementwise mismatch between analytic and FD gradients.

    Each element is compared as |a - f| / max(|a|, |f|, 1e-6) so that
    near-zero gradients do not inflate the ratio.
    """
    out, cache = net.forward_cached(x)
    grads, _ = net.backward(cache, np.broadcast_to(np.asarray(upstream, dtype=float), np.shape(out)))
    analytic = flatten_grads(grads)
    reference = finite_difference_gradients(net, x, upstream, h=h)
    worst = 0.0
    for a, f in zip(analytic, reference):
        scale = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
        worst = max(worst, float(np.max(np.abs(a - f) / scale)))
    return worst
