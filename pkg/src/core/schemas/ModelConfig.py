from typing import Dict, Literal

from pydantic import BaseModel, Field

from src.core.errors import ConfigError

VariantName = Literal[
    "mini-roberta-base",
    "mini-roberta-large",
    "mini-bert-uncased",
    "mini-bert-large-uncased",
]

VARIANTS = (
    "mini-roberta-base",
    "mini-roberta-large",
    "mini-bert-uncased",
    "mini-bert-large-uncased",
)

# architecture sizes for each desk-scale stand-in; "large" is strictly bigger than "base"
BASE_SIZE = {"num_layers": 2, "num_heads": 4, "d_model": 64, "d_ff": 128}
LARGE_SIZE = {"num_layers": 4, "num_heads": 8, "d_model": 128, "d_ff": 256}

PRESETS: Dict[str, Dict[str, int]] = {
    "mini-roberta-base": BASE_SIZE,
    "mini-roberta-large": LARGE_SIZE,
    "mini-bert-uncased": BASE_SIZE,
    "mini-bert-large-uncased": LARGE_SIZE,
}


class ModelConfig(BaseModel):
    """Hyperparameters of the mini encoder classifier.

    The encoder uses post-norm residual sublayers (BERT ordering), learned
    absolute position embeddings and pools the final hidden state at [CLS].
    """

    num_layers: int = Field(2, ge=0, description="Number of encoder layers.")
    num_heads: int = Field(4, ge=1, description="Attention heads per layer.")
    d_model: int = Field(64, ge=1, description="Hidden width.")
    d_ff: int = Field(128, ge=1, description="Feed-forward inner width.")
    vocab_size: int = Field(..., gt=4, description="Vocabulary size including reserved tokens.")
    max_len: int = Field(16, ge=3, description="Maximum encoded sequence length.")
    num_labels: int = Field(..., ge=2, description="Number of answer labels.")
    dropout: float = Field(0.1, ge=0.0, lt=1.0, description="Dropout rate used during training.")
    layer_norm_eps: float = Field(1e-12, gt=0.0)
    variant_name: VariantName = "mini-roberta-base"

    @classmethod
    def preset(cls, variant: str, vocab_size: int, num_labels: int, max_len: int = 16, **overrides) -> "ModelConfig":
        if variant not in PRESETS:
            raise ConfigError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
        fields = {**PRESETS[variant], **overrides}
        return cls(variant_name=variant, vocab_size=vocab_size, num_labels=num_labels, max_len=max_len, **fields)

    @property
    def d_head(self) -> int:
        return self.d_model // self.num_heads

    def validate_architecture(self) -> "ModelConfig":
        if self.d_model % self.num_heads != 0:
            raise ConfigError(f"d_model {self.d_model} is not divisible by num_heads {self.num_heads}")
        if self.num_labels < 2:
            raise ConfigError("num_labels must be at least 2")
        return self

    def closed_form_parameter_count(self) -> int:
        d, f = self.d_model, self.d_ff
        embeddings = self.vocab_size * d + self.max_len * d + 2 * d
        per_layer = 4 * (d * d + d) + (d * f + f) + (f * d + d) + 4 * d
        head = d * self.num_labels + self.num_labels
        return embeddings + self.num_layers * per_layer + head
