from typing import Callable, List, Tuple

from src.core.classes.encoder_model import init_model
from src.core.classes.lora import wrap_with_lora
from src.core.errors import UsageError
from src.core.schemas.LoraConfig import LoraConfig
from src.core.schemas.ModelConfig import VARIANTS, ModelConfig

LORA_PREFIX = "lora-"

# the four fine-tuned models compared by default
DEFAULT_LINEUP = [
    "lora-mini-roberta-large",
    "mini-roberta-base",
    "mini-bert-uncased",
    "mini-bert-large-uncased",
]


def display_name(variant: str, lora: bool) -> str:
    return f"{LORA_PREFIX}{variant}" if lora else variant


def parse_variant(name: str) -> Tuple[str, bool]:
    """"lora-mini-roberta-large" -> ("mini-roberta-large", True)."""
    lora = name.startswith(LORA_PREFIX)
    variant = name[len(LORA_PREFIX):] if lora else name
    if variant not in VARIANTS:
        choices = ", ".join([*VARIANTS, *(LORA_PREFIX + v for v in VARIANTS)])
        raise UsageError(f"unknown variant {name!r}; expected one of {choices}")
    return variant, lora


def parse_variants(names: List[str]) -> List[Tuple[str, bool]]:
    parsed = [parse_variant(n) for n in names]
    if len(set(parsed)) != len(parsed):
        raise UsageError("each variant may be listed once")
    return parsed


def make_model_factory(
    variant: str,
    vocab_size: int,
    num_labels: int,
    max_len: int = 16,
    dropout: float = 0.1,
    lora: bool = False,
    lora_config: LoraConfig = None,
) -> Callable[[int], object]:
    """
    Build ``factory(seed) -> model`` for a named variant, wrapping the fresh
    encoder with LoRA adapters when ``lora`` is set.
    """
    config = ModelConfig.preset(variant, vocab_size, num_labels, max_len=max_len, dropout=dropout)
    config.validate_architecture()
    lora_config = lora_config or LoraConfig()

    def factory(seed: int):
        model = init_model(config, seed)
        if lora:
            return wrap_with_lora(model, lora_config, seed)
        return model

    return factory
