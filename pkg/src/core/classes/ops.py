"""Differentiable ops over :class:`Tensor`.

Every op computes its forward result with numpy, then hands the result and a
backward rule to ``record_op`` which checks finiteness and records the op on
the active tape (if any). Outside a tape the ops are plain numpy functions.
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from src.core.classes.tensor import Tensor, record_op
from src.core.errors import ShapeError, TargetIndexError

GELU_C = math.sqrt(2.0 / math.pi)


def as_tensor(value, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype))


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op: str, a: Tensor, b: Tensor):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeError(f"{op}: cannot broadcast {a.shape} with {b.shape}") from e


# --- elementwise ------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record_op("add", a.data + b.data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record_op("sub", a.data - b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record_op("mul", a.data * b.data, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    factor_ = np.asarray(factor, dtype=a.dtype)

    def backward(g):
        return (g * factor_,)

    return record_op("scale", a.data * factor_, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    def backward(g):
        return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=True),)

    return record_op("sum", np.asarray(a.data.sum(), dtype=a.dtype), (a,), backward)


# --- linear algebra ---------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """C = A·B over the last two axes, broadcasting leading batch axes.

    Backward: dA = dC·Bᵀ, dB = Aᵀ·dC (summed over broadcast axes).
    """
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul needs at least 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} · {b.shape}")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError as e:
        raise ShapeError(f"matmul batch dimensions differ: {a.shape} · {b.shape}") from e

    def backward(g):
        da = db = None
        if a.requires_grad:
            da = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        if b.requires_grad:
            db = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return da, db

    return record_op("matmul", out, (a, b), backward)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError as e:
        raise ShapeError(f"cannot reshape {a.shape} to {tuple(shape)}") from e

    def backward(g):
        return (g.reshape(a.shape),)

    return record_op("reshape", out, (a,), backward)


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return record_op("transpose", np.transpose(a.data, axes), (a,), backward)


def select(a: Tensor, index: int, axis: int) -> Tensor:
    """Take one position along ``axis`` (the axis is removed)."""
    out = np.take(a.data, index, axis=axis)

    def backward(g):
        grad = np.zeros_like(a.data)
        slicer = [slice(None)] * a.data.ndim
        slicer[axis] = index
        grad[tuple(slicer)] = g
        return (grad,)

    return record_op("select", out, (a,), backward)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of ``table`` for integer ``ids``; backward scatter-adds."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(f"embedding ids outside [0, {table.shape[0]})")

    def backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, ids, g)
        return (grad,)

    return record_op("embedding", table.data[ids], (table,), backward)


# --- nonlinearities ---------------------------------------------------------------

def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, stabilised by subtracting the row max."""
    if x.data.ndim == 0 or x.shape[-1] == 0:
        raise ShapeError("softmax over an empty axis")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return record_op("softmax", y, (x,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-12) -> Tensor:
    """Per-row (x − mean)/sqrt(var + eps)·gamma + beta with population variance."""
    if x.data.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError("layer_norm needs a non-empty last axis")
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError(f"layer_norm gamma/beta must have shape ({d},), got {gamma.shape} and {beta.shape}")
    if eps <= 0:
        raise ShapeError("layer_norm eps must be positive")

    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + np.asarray(eps, dtype=x.dtype))
    xhat = centered * inv_std
    out = xhat * gamma.data + beta.data

    def backward(g):
        lead = tuple(range(g.ndim - 1))
        dgamma = (g * xhat).sum(axis=lead)
        dbeta = g.sum(axis=lead)
        dxhat = g * gamma.data
        dx = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return dx, dgamma, dbeta

    return record_op("layer_norm", out, (x, gamma, beta), backward)


def gelu(x: Tensor) -> Tensor:
    """0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³)))"""
    c = np.asarray(GELU_C, dtype=x.dtype)
    k = np.asarray(0.044715, dtype=x.dtype)
    inner = c * (x.data + k * x.data ** 3)
    t = np.tanh(inner)
    out = 0.5 * x.data * (1.0 + t)

    def backward(g):
        d_inner = c * (1.0 + 3.0 * k * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner),)

    return record_op("gelu", out, (x,), backward)


def dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator], training: bool) -> Tensor:
    """Inverted dropout. Identity when not training or when rate is 0."""
    if not training or rate <= 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs a random generator")
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep).astype(x.dtype) / np.asarray(keep, dtype=x.dtype)

    def backward(g):
        return (g * mask,)

    return record_op("dropout", x.data * mask, (x,), backward)


# --- loss ---------------------------------------------------------------------------

def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits: Tensor, targets: Sequence[int]) -> Tensor:
    """Mean over the batch of −log softmax(logits)[target].

    Backward: dLogits = (softmax − onehot) / b.
    """
    if logits.data.ndim != 2:
        raise ShapeError(f"cross_entropy expects [batch x classes] logits, got {logits.shape}")
    b, num_classes = logits.shape
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if targets.shape[0] != b:
        raise ShapeError(f"cross_entropy got {targets.shape[0]} targets for {b} rows")
    if targets.size and (targets.min() < 0 or targets.max() >= num_classes):
        bad = int(targets[(targets < 0) | (targets >= num_classes)][0])
        raise TargetIndexError(f"target {bad} outside [0, {num_classes})")

    logp = log_softmax(logits.data)
    rows = np.arange(b)
    loss = np.asarray(-logp[rows, targets].mean(), dtype=logits.dtype)

    def backward(g):
        probs = np.exp(logp)
        probs[rows, targets] -= 1.0
        return (probs * (g / b),)

    return record_op("cross_entropy", loss, (logits,), backward)
