from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from src.core.classes.tensor import Tensor
from src.core.errors import UsageError
from src.core.schemas.TrainConfig import TrainConfig


@dataclass
class AdamWState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adamw_step(
    params: Dict[str, Tensor],
    grads: Dict[str, np.ndarray],
    state: AdamWState,
    config: TrainConfig,
) -> AdamWState:
    """
    One decoupled-weight-decay Adam update, in place on ``params``.

    m ← β1·m + (1−β1)·g, v ← β2·v + (1−β2)·g², bias-corrected to m̂, v̂;
    p ← p − lr·(m̂/(√v̂ + eps) + weight_decay·p). Tensors that do not require
    gradients are never touched; trainable tensors without a gradient this
    step are treated as having a zero gradient.
    """
    for name, grad in grads.items():
        if name not in params:
            raise UsageError(f"gradient for unknown parameter {name!r}")
        if grad.shape != params[name].shape:
            raise UsageError(f"gradient shape {grad.shape} does not match parameter {name!r} {params[name].shape}")

    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    for name, param in params.items():
        if not param.requires_grad:
            continue
        grad = grads.get(name)
        g = np.zeros(param.shape) if grad is None else grad.astype(np.float64)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros(param.shape)
            v = np.zeros(param.shape)
        elif m.shape != param.shape:
            raise UsageError(f"optimizer state for {name!r} has shape {m.shape}, parameter has {param.shape}")
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name] = m
        state.v[name] = v

        m_hat = m / correction1
        v_hat = v / correction2
        p = param.data.astype(np.float64)
        update = m_hat / (np.sqrt(v_hat) + config.eps) + config.weight_decay * p
        param.data = (p - config.learning_rate * update).astype(param.dtype)
    return state


class AdamW:
    """Stateful wrapper around :func:`adamw_step` for one model."""

    def __init__(self, params: Dict[str, Tensor], config: TrainConfig):
        self.params = params
        self.config = config
        self.state = AdamWState()

    def step(self, grads: Dict[str, np.ndarray]):
        self.state = adamw_step(self.params, grads, self.state, self.config)
