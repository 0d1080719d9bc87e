from typing import List, Literal

from pydantic import BaseModel, Field

from src.core.schemas.EpochMetrics import EpochMetrics
from src.core.schemas.MetricSet import MetricSet


class CVSummary(BaseModel):
    variant_name: str
    k: int = Field(..., ge=1)
    epochs: int = Field(..., ge=1)
    selection: Literal["final", "best"] = Field(
        "final", description="Which epoch of each fold feeds the mean: the last one or the most accurate one."
    )
    fold_metrics: List[MetricSet] = Field(..., description="Selected-epoch validation metrics, one per fold.")
    mean: MetricSet
    std: MetricSet = Field(..., description="Population standard deviation across folds.")
    fold_wall_times_s: List[float]
    total_wall_time_s: float
    histories: List[List[EpochMetrics]]
