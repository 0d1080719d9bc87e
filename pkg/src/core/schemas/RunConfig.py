from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from src.core.schemas.LoraConfig import LoraConfig
from src.core.schemas.TrainConfig import TrainConfig


class RunConfig(BaseModel):
    """Everything needed to reproduce a command run; snapshotted to config.json."""

    command: Literal["train", "crossval", "compare"] = "train"
    data: str = Field(..., description="Primary CSV (Disease,Question,Label).")
    answers: Optional[str] = Field(None, description="Secondary CSV (Disease,Label,Answer).")
    variant: str = "mini-roberta-base"
    variants: List[str] = Field(default_factory=list, description="Variants compared by the compare command.")
    lora: bool = False
    lora_config: LoraConfig = Field(default_factory=LoraConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    max_len: int = Field(16, ge=3)
    dropout: float = Field(0.1, ge=0.0, lt=1.0)
    vocab_min_freq: int = Field(1, ge=1)
    vocab_max_size: int = Field(10_000, gt=4)
    train_ratio: float = Field(0.7, gt=0.0, lt=1.0)
    k: int = Field(5, ge=2)
    stratified: bool = True
    selection: Literal["final", "best"] = "final"
    average: Literal["macro", "weighted"] = "macro"
    jobs: int = Field(1, ge=1)
