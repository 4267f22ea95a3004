"""Small ReLU multilayer perceptron with hand-written backprop and Adam.

All parameters live in one flat float64 vector; per-layer weight matrices
(out x in) and bias vectors are views into it. Gradients use the same
layout, so optimizer updates are whole-vector operations.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from polecart import ContractViolation

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

MAGIC = b"PCMLP\x00\x00\x00"
FORMAT_VERSION = 1


def n_params(widths: Sequence[int]) -> int:
    return sum(o * i + o for i, o in zip(widths[:-1], widths[1:]))


def _views(flat: np.ndarray, widths: Sequence[int]):
    weights, biases = [], []
    off = 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(flat[off : off + fan_in * fan_out].reshape(fan_out, fan_in))
        off += fan_in * fan_out
        biases.append(flat[off : off + fan_out])
        off += fan_out
    return weights, biases


class Gradient:
    def __init__(self, widths: Sequence[int], flat: np.ndarray | None = None):
        self.widths = tuple(widths)
        self.flat = np.zeros(n_params(widths)) if flat is None else flat
        self.weights, self.biases = _views(self.flat, self.widths)


class MlpParams:
    """Network parameters plus Adam moments and step counter."""

    def __init__(self, widths: Sequence[int], flat: np.ndarray | None = None):
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2:
            raise ContractViolation(f"need at least an input and an output width, got {widths}")
        if any(w < 1 for w in widths):
            raise ContractViolation(f"layer widths must be positive, got {widths}")
        self.widths = widths
        self.flat = np.zeros(n_params(widths)) if flat is None else flat
        self.weights, self.biases = _views(self.flat, widths)
        self.m = np.zeros_like(self.flat)
        self.v = np.zeros_like(self.flat)
        self.step = 0

    @property
    def size(self) -> int:
        return self.flat.size

    def __repr__(self):
        return f"MlpParams(widths={self.widths}, step={self.step})"


def init(widths: Sequence[int], rng: np.random.Generator) -> MlpParams:
    """He-uniform weights, zero biases, zeroed optimizer state."""
    params = MlpParams(widths)
    for w in params.weights:
        limit = np.sqrt(6.0 / w.shape[1])
        w[...] = rng.uniform(-limit, limit, size=w.shape)
    return params


def clone_params(params: MlpParams) -> MlpParams:
    out = MlpParams(params.widths, params.flat.copy())
    out.m = params.m.copy()
    out.v = params.v.copy()
    out.step = params.step
    return out


def copy_into(dst: MlpParams, src: MlpParams) -> None:
    """Overwrite ``dst`` with ``src`` (weights and optimizer state) in place."""
    if dst.widths != src.widths:
        raise ContractViolation(f"width mismatch {dst.widths} vs {src.widths}")
    dst.flat[...] = src.flat
    dst.m[...] = src.m
    dst.v[...] = src.v
    dst.step = src.step


def _check_input(params: MlpParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.widths[0]:
        raise ContractViolation(f"expected input width {params.widths[0]}, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ContractViolation("non-finite network input")
    return x


def forward_cached(params: MlpParams, x: np.ndarray):
    """Forward pass returning the output and the per-layer inputs/pre-activations."""
    x = _check_input(params, x)
    inputs, pre = [], []
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        z = h @ w.T + b
        if k == last:
            return z, (inputs, pre)
        pre.append(z)
        h = np.maximum(z, 0.0)
    raise AssertionError("unreachable")


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Q-values for one state (shape ``(in,)``) or a batch (shape ``(n, in)``)."""
    return forward_cached(params, x)[0]


def backward_cached(params: MlpParams, cache, upstream: np.ndarray) -> Gradient:
    inputs, pre = cache
    grad = Gradient(params.widths)
    delta = np.asarray(upstream, dtype=np.float64)
    for k in range(len(params.weights) - 1, -1, -1):
        h = inputs[k]
        if delta.ndim == 1:
            grad.weights[k][...] = np.outer(delta, h)
            grad.biases[k][...] = delta
        else:
            grad.weights[k][...] = delta.T @ h
            grad.biases[k][...] = delta.sum(axis=0)
        if k > 0:
            # ReLU derivative is 0 at exactly 0
            delta = (delta @ params.weights[k]) * (pre[k - 1] > 0.0)
    return grad


def backward(params: MlpParams, x: np.ndarray, upstream: np.ndarray) -> Gradient:
    """Gradient of ``<upstream, forward(params, x)>`` w.r.t. every parameter.

    For a batch input, ``upstream`` has shape ``(n, out)`` and the gradient is
    summed over the batch.
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if not np.isfinite(upstream).all():
        raise ContractViolation("non-finite upstream gradient")
    _, cache = forward_cached(params, x)
    return backward_cached(params, cache, upstream)


def optimizer_step(
    params: MlpParams, grad: Gradient, lr: float, optimizer: str = "adam"
) -> MlpParams:
    """Apply one update in place and return ``params``."""
    if grad.flat.shape != params.flat.shape:
        raise ContractViolation("gradient shape does not match parameters")
    if lr <= 0:
        raise ContractViolation(f"learning rate must be positive, got {lr}")
    g = grad.flat
    if not np.isfinite(g).all():
        raise FloatingPointError("non-finite gradient; parameters left untouched")
    params.step += 1
    if optimizer == "sgd":
        params.flat -= lr * g
        return params
    if optimizer != "adam":
        raise ValueError(f"unknown optimizer {optimizer!r}")
    params.m *= ADAM_BETA1
    params.m += (1.0 - ADAM_BETA1) * g
    params.v *= ADAM_BETA2
    params.v += (1.0 - ADAM_BETA2) * g * g
    m_hat = params.m / (1.0 - ADAM_BETA1**params.step)
    v_hat = params.v / (1.0 - ADAM_BETA2**params.step)
    params.flat -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return params


def to_bytes(params: MlpParams) -> bytes:
    """Checkpoint: magic, u32 version, u32 layer count, u32 widths, then f64 LE tensors."""
    header = MAGIC + struct.pack("<II", FORMAT_VERSION, len(params.widths))
    header += struct.pack(f"<{len(params.widths)}I", *params.widths)
    body = b"".join(
        np.ascontiguousarray(t, dtype="<f8").tobytes()
        for w, b in zip(params.weights, params.biases)
        for t in (w, b)
    )
    return header + body


def from_bytes(data: bytes) -> MlpParams:
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError("not a polecart MLP checkpoint (bad magic)")
    off = len(MAGIC)
    version, n_layers = struct.unpack_from("<II", data, off)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off += 8
    widths = struct.unpack_from(f"<{n_layers}I", data, off)
    off += 4 * n_layers
    expected = n_params(widths) * 8
    if len(data) - off != expected:
        raise ValueError(f"checkpoint body is {len(data) - off} bytes, expected {expected}")
    # layer order with weights before biases is exactly the flat layout
    flat = np.frombuffer(data, dtype="<f8", offset=off).astype(np.float64)
    return MlpParams(widths, flat)


def save_params(params: MlpParams, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(params))


def load_params(path: str | Path) -> MlpParams:
    return from_bytes(Path(path).read_bytes())
