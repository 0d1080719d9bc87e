"""Mini transformer encoder classifier.

Layers use post-norm residual ordering (LayerNorm(x + sublayer(x)), as in
the original BERT), learned absolute position embeddings, and the logits
come from a linear head over the final hidden state at the [CLS] position.
"""
import hashlib
import math
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from loguru import logger

from src.core.classes import ops
from src.core.classes.tensor import Tensor
from src.core.errors import ShapeError
from src.core.schemas.ModelConfig import ModelConfig

INIT_STD = 0.02
MASK_BIAS = -1e9

ATTENTION_MATRICES = ("W_q", "W_k", "W_v", "W_o")
FFN_MATRICES = ("W_1", "W_2")


def parameter_layout(config: ModelConfig) -> List[Tuple[str, Tuple[int, ...], str]]:
    """Ordered (name, shape, init kind) for every parameter of the model."""
    d, f = config.d_model, config.d_ff
    layout = [
        ("embeddings.token", (config.vocab_size, d), "normal"),
        ("embeddings.position", (config.max_len, d), "normal"),
        ("embeddings.ln.gamma", (d,), "ones"),
        ("embeddings.ln.beta", (d,), "zeros"),
    ]
    for i in range(config.num_layers):
        prefix = f"layers.{i}"
        for matrix in ATTENTION_MATRICES:
            layout.append((f"{prefix}.attention.{matrix}", (d, d), "normal"))
            layout.append((f"{prefix}.attention.b_{matrix[-1]}", (d,), "zeros"))
        layout.append((f"{prefix}.ln_attention.gamma", (d,), "ones"))
        layout.append((f"{prefix}.ln_attention.beta", (d,), "zeros"))
        layout.append((f"{prefix}.ffn.W_1", (d, f), "normal"))
        layout.append((f"{prefix}.ffn.b_1", (f,), "zeros"))
        layout.append((f"{prefix}.ffn.W_2", (f, d), "normal"))
        layout.append((f"{prefix}.ffn.b_2", (d,), "zeros"))
        layout.append((f"{prefix}.ln_ffn.gamma", (d,), "ones"))
        layout.append((f"{prefix}.ln_ffn.beta", (d,), "zeros"))
    layout.append(("classifier.W", (d, config.num_labels), "normal"))
    layout.append(("classifier.b", (config.num_labels,), "zeros"))
    return layout


def weight_name(layer: int, matrix: str) -> str:
    """Parameter name of a dense matrix ("W_q" … "W_2", or "classifier")."""
    if matrix == "classifier":
        return "classifier.W"
    if matrix in ATTENTION_MATRICES:
        return f"layers.{layer}.attention.{matrix}"
    if matrix in FFN_MATRICES:
        return f"layers.{layer}.ffn.{matrix}"
    raise KeyError(matrix)


def truncated_normal(rng: np.random.Generator, shape: Tuple[int, ...], std: float, bound: float = 2.0) -> np.ndarray:
    """Normal(0, std) redrawn until every sample lies within ±bound·std."""
    z = rng.standard_normal(shape)
    outside = np.abs(z) > bound
    while outside.any():
        z[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(z) > bound
    return z * std


class EncoderModel:
    """
    Parameter store plus the projection hook used by :func:`forward_logits`.

    Args:
        config (ModelConfig): Architecture hyperparameters.
        params (Dict[str, Tensor]): Tensors in :func:`parameter_layout` order.
    """

    def __init__(self, config: ModelConfig, params: Dict[str, Tensor]):
        self.config = config
        self.params = params

    def param(self, name: str) -> Tensor:
        return self.params[name]

    @property
    def dtype(self):
        return self.params["embeddings.token"].dtype

    def named_parameters(self) -> Dict[str, Tensor]:
        return dict(self.params)

    def trainable_parameters(self) -> Dict[str, Tensor]:
        return {name: t for name, t in self.named_parameters().items() if t.requires_grad}

    def linear(self, x: Tensor, weight: str, bias: str) -> Tensor:
        return ops.add(ops.matmul(x, self.params[weight]), self.params[bias])

    def freeze(self, names: Optional[Iterable[str]] = None):
        for name in names if names is not None else self.params:
            self.params[name].requires_grad = False

    def copy(self) -> "EncoderModel":
        params = {
            name: Tensor(t.data.copy(), requires_grad=t.requires_grad, name=name) for name, t in self.params.items()
        }
        return EncoderModel(self.config.model_copy(), params)

    def parameter_digest(self) -> str:
        digest = hashlib.sha256()
        for name, tensor in self.named_parameters().items():
            digest.update(name.encode("utf-8"))
            digest.update(np.ascontiguousarray(tensor.data).tobytes())
        return digest.hexdigest()


def init_model(config: ModelConfig, seed: int, dtype=np.float32) -> EncoderModel:
    """
    Weights ~ Normal(0, 0.02) truncated at ±2σ, biases and LayerNorm beta 0,
    LayerNorm gamma 1. Deterministic for a fixed seed.
    """
    config.validate_architecture()
    rng = np.random.default_rng(seed)
    params: Dict[str, Tensor] = {}
    for name, shape, kind in parameter_layout(config):
        if kind == "normal":
            data = truncated_normal(rng, shape, INIT_STD)
        elif kind == "ones":
            data = np.ones(shape)
        else:
            data = np.zeros(shape)
        params[name] = Tensor(data.astype(dtype), requires_grad=True, name=name)
    model = EncoderModel(config, params)
    logger.debug(f"initialised {config.variant_name} with {count_parameters(model)} parameters (seed {seed})")
    return model


def count_parameters(model, trainable_only: bool = False) -> int:
    tensors = model.trainable_parameters() if trainable_only else model.named_parameters()
    return int(sum(t.size for t in tensors.values()))


def _check_batch(model, ids: np.ndarray, mask: np.ndarray):
    cfg = model.config
    if ids.ndim != 2 or ids.shape != mask.shape:
        raise ShapeError(f"ids and mask must be matching [batch x length] arrays, got {ids.shape} and {mask.shape}")
    if ids.shape[1] > cfg.max_len:
        raise ShapeError(f"sequence length {ids.shape[1]} exceeds the model's max_len {cfg.max_len}")
    if ids.size and (ids.min() < 0 or ids.max() >= cfg.vocab_size):
        raise ShapeError(f"token ids outside the model vocabulary [0, {cfg.vocab_size})")


def _encoder_layer(model, x: Tensor, mask_bias: Tensor, layer: int, training: bool, rng) -> Tensor:
    cfg = model.config
    b, t, d = x.shape
    h, dh = cfg.num_heads, cfg.d_head
    p = f"layers.{layer}"

    def split_heads(z: Tensor) -> Tensor:
        return ops.transpose(ops.reshape(z, (b, t, h, dh)), (0, 2, 1, 3))

    q = split_heads(model.linear(x, f"{p}.attention.W_q", f"{p}.attention.b_q"))
    k = split_heads(model.linear(x, f"{p}.attention.W_k", f"{p}.attention.b_k"))
    v = split_heads(model.linear(x, f"{p}.attention.W_v", f"{p}.attention.b_v"))

    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(dh))
    weights = ops.softmax(ops.add(scores, mask_bias))
    weights = ops.dropout(weights, cfg.dropout, rng, training)
    context = ops.reshape(ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3)), (b, t, d))

    attended = ops.dropout(model.linear(context, f"{p}.attention.W_o", f"{p}.attention.b_o"), cfg.dropout, rng, training)
    x = ops.layer_norm(ops.add(x, attended), model.param(f"{p}.ln_attention.gamma"), model.param(f"{p}.ln_attention.beta"), cfg.layer_norm_eps)

    hidden = ops.gelu(model.linear(x, f"{p}.ffn.W_1", f"{p}.ffn.b_1"))
    ff = ops.dropout(model.linear(hidden, f"{p}.ffn.W_2", f"{p}.ffn.b_2"), cfg.dropout, rng, training)
    return ops.layer_norm(ops.add(x, ff), model.param(f"{p}.ln_ffn.gamma"), model.param(f"{p}.ln_ffn.beta"), cfg.layer_norm_eps)


def forward_logits(
    model,
    ids: np.ndarray,
    mask: np.ndarray,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    Pre-softmax class scores for a batch of encodings.

    Attention is softmax(QKᵀ/√d_head + bias)·V where the bias is −1e9 on
    padded keys, so padded positions never influence the [CLS] state.

    Args:
        model: EncoderModel or LoraModel.
        ids (np.ndarray): [batch x length] token ids, length <= max_len.
        mask (np.ndarray): [batch x length] 1 for real tokens, 0 for padding.
        training (bool): Enables dropout (needs ``rng``).

    Returns:
        Tensor: [batch x num_labels] logits.
    """
    ids = np.asarray(ids, dtype=np.int64)
    mask = np.asarray(mask)
    _check_batch(model, ids, mask)
    cfg = model.config
    dtype = model.dtype
    t = ids.shape[1]

    x = ops.add(
        ops.embedding(model.param("embeddings.token"), ids),
        ops.embedding(model.param("embeddings.position"), np.arange(t)),
    )
    x = ops.layer_norm(x, model.param("embeddings.ln.gamma"), model.param("embeddings.ln.beta"), cfg.layer_norm_eps)
    x = ops.dropout(x, cfg.dropout, rng, training)

    mask_bias = Tensor(np.where(mask[:, None, None, :] > 0, 0.0, MASK_BIAS).astype(dtype))
    for layer in range(cfg.num_layers):
        x = _encoder_layer(model, x, mask_bias, layer, training, rng)

    pooled = ops.select(x, 0, axis=1)
    return model.linear(pooled, "classifier.W", "classifier.b")


def predict_proba(model, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax probabilities (float64) with dropout disabled."""
    logits = forward_logits(model, ids, mask, training=False).data.astype(np.float64)
    return np.exp(ops.log_softmax(logits))
