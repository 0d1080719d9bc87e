from pydantic import BaseModel, Field

from src.core.schemas.MetricSet import MetricSet


class EpochMetrics(BaseModel):
    fold: int = Field(..., ge=0, description="Fold id (0 for a single train/validation run).")
    epoch: int = Field(..., ge=1, description="1-based epoch index.")
    train_loss: float = Field(..., description="Mean per-batch training loss for the epoch.")
    validation: MetricSet
    wall_time_s: float = Field(..., ge=0.0, description="Seconds since the start of the fit, monotonic clock.")
