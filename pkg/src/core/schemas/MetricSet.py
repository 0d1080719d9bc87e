from pydantic import BaseModel, Field


class MetricSet(BaseModel):
    accuracy: float = Field(..., ge=0.0, le=1.0, description="Correct predictions over all predictions.")
    precision: float = Field(..., ge=0.0, le=1.0, description="Averaged per-class precision.")
    recall: float = Field(..., ge=0.0, le=1.0, description="Averaged per-class recall.")
    f1: float = Field(..., ge=0.0, le=1.0, description="Averaged per-class F1 score.")

    def get(self, metric: str) -> float:
        return float(getattr(self, metric))
