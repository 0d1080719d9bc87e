from pydantic import BaseModel, Field


class TrainConfig(BaseModel):
    epochs: int = Field(10, ge=1, description="Epochs per fold.")
    batch_size: int = Field(16, ge=1)
    learning_rate: float = Field(3e-4, gt=0.0)
    weight_decay: float = Field(0.01, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    seed: int = 42
    shuffle: bool = True
