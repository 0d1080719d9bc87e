from typing import Dict, Optional

import numpy as np
from loguru import logger

from src.core.classes import ops
from src.core.classes.encoder_model import EncoderModel, weight_name
from src.core.classes.tensor import Tensor
from src.core.errors import ConfigError, ShapeError
from src.core.schemas.LoraConfig import LoraConfig

LORA_INIT_STD = 0.02


def lora_linear_forward(
    x: Tensor,
    W_frozen: Tensor,
    A: Tensor,
    B: Tensor,
    alpha: float,
    r: int,
    bias: Optional[Tensor] = None,
) -> Tensor:
    """
    y = x·W + (alpha/r)·(x·Aᵀ)·Bᵀ (+ bias).

    Weights are stored input-major (W: d_in × d_out), so this is the row-vector
    form of W x + (alpha/r)·B·A·x with A: r × d_in and B: d_out × r.
    """
    d_in, d_out = W_frozen.shape
    if A.shape != (r, d_in) or B.shape != (d_out, r):
        raise ShapeError(f"adapter shapes A{A.shape}, B{B.shape} do not fit W{W_frozen.shape} at rank {r}")
    y = ops.matmul(x, W_frozen)
    if bias is not None:
        y = ops.add(y, bias)
    down = ops.matmul(x, ops.transpose(A, (1, 0)))
    up = ops.matmul(down, ops.transpose(B, (1, 0)))
    return ops.add(y, ops.scale(up, alpha / r))


class LoraAdapter:
    def __init__(self, weight: str, A: Tensor, B: Tensor):
        self.weight = weight
        self.A = A
        self.B = B

    @property
    def rank(self) -> int:
        return self.A.shape[0]

    def delta(self, scaling: float) -> np.ndarray:
        """(alpha/r)·B·A transposed into the input-major layout of the weight."""
        return (scaling * (self.B.data.astype(np.float64) @ self.A.data.astype(np.float64))).T


class LoraModel:
    """
    Frozen base encoder plus trainable low-rank adapters.

    Exposes the same interface as :class:`EncoderModel` (``config``,
    ``param``, ``linear``, ``named_parameters``) so :func:`forward_logits`
    and the trainer work on either.
    """

    def __init__(self, base: EncoderModel, lora_config: LoraConfig, adapters: Dict[str, LoraAdapter]):
        self.base = base
        self.lora_config = lora_config
        self.adapters = adapters

    @property
    def config(self):
        return self.base.config

    @property
    def dtype(self):
        return self.base.dtype

    def param(self, name: str) -> Tensor:
        return self.base.param(name)

    def named_parameters(self) -> Dict[str, Tensor]:
        params = self.base.named_parameters()
        for weight, adapter in self.adapters.items():
            params[f"{weight}.lora_A"] = adapter.A
            params[f"{weight}.lora_B"] = adapter.B
        return params

    def trainable_parameters(self) -> Dict[str, Tensor]:
        return {name: t for name, t in self.named_parameters().items() if t.requires_grad}

    def base_parameters(self) -> Dict[str, Tensor]:
        return self.base.named_parameters()

    def linear(self, x: Tensor, weight: str, bias: str) -> Tensor:
        adapter = self.adapters.get(weight)
        if adapter is None:
            return self.base.linear(x, weight, bias)
        return lora_linear_forward(
            x,
            self.base.param(weight),
            adapter.A,
            adapter.B,
            self.lora_config.alpha,
            self.lora_config.rank,
            bias=self.base.param(bias),
        )

    def parameter_digest(self) -> str:
        return self.base.parameter_digest()


def _targeted_weights(model: EncoderModel, lora_config: LoraConfig):
    targets = list(dict.fromkeys(lora_config.target_matrices))
    for layer in range(model.config.num_layers):
        for target in targets:
            if target != "classifier":
                yield weight_name(layer, target)
    if "classifier" in targets:
        yield weight_name(0, "classifier")


def wrap_with_lora(model: EncoderModel, config: LoraConfig, seed: int) -> LoraModel:
    """
    Freeze a copy of ``model`` and attach A ~ Normal(0, 0.02), B = 0 adapters.

    With B = 0 the wrapped forward pass equals the base forward pass exactly.
    """
    r = config.rank
    weights = list(_targeted_weights(model, config))
    for name in weights:
        d_in, d_out = model.param(name).shape
        if r > min(d_in, d_out):
            raise ConfigError(f"LoRA rank {r} exceeds min(d_in, d_out) = {min(d_in, d_out)} of {name}")

    base = model.copy()
    base.freeze()
    if config.train_classifier_head:
        for name in ("classifier.W", "classifier.b"):
            base.param(name).requires_grad = True

    rng = np.random.default_rng(seed)
    dtype = base.dtype
    adapters: Dict[str, LoraAdapter] = {}
    for name in weights:
        d_in, d_out = base.param(name).shape
        A = Tensor((rng.standard_normal((r, d_in)) * LORA_INIT_STD).astype(dtype), requires_grad=True, name=f"{name}.lora_A")
        B = Tensor(np.zeros((d_out, r), dtype=dtype), requires_grad=True, name=f"{name}.lora_B")
        adapters[name] = LoraAdapter(name, A, B)

    wrapped = LoraModel(base, config, adapters)
    logger.debug(
        f"wrapped {len(adapters)} matrices with rank-{r} adapters; "
        f"{lora_trainable_count(wrapped)} trainable parameters"
    )
    return wrapped


def merge_lora(model: LoraModel) -> EncoderModel:
    """Fold every adapter into its weight: W ← W + (alpha/r)·(B·A)ᵀ. All merged tensors are trainable."""
    merged = model.base.copy()
    scaling = model.lora_config.scaling
    for name, adapter in model.adapters.items():
        weight = merged.param(name)
        weight.data = (weight.data.astype(np.float64) + adapter.delta(scaling)).astype(weight.dtype)
    for tensor in merged.params.values():
        tensor.requires_grad = True
    return merged


def lora_trainable_count(model: LoraModel) -> int:
    """Σ r·(d_in + d_out) over adapters, plus the head when it stays trainable."""
    total = 0
    for adapter in model.adapters.values():
        d_in, d_out = model.base.param(adapter.weight).shape
        total += adapter.rank * (d_in + d_out)
    if model.lora_config.train_classifier_head:
        total += model.base.param("classifier.W").size + model.base.param("classifier.b").size
    return total
