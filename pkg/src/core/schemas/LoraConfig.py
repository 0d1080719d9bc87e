from typing import List, Literal

from pydantic import BaseModel, Field

LoraTarget = Literal["W_q", "W_k", "W_v", "W_o", "W_1", "W_2", "classifier"]


class LoraConfig(BaseModel):
    """Low-rank adaptation settings. Defaults: r=4, alpha=8, targets {W_q, W_v}."""

    rank: int = Field(4, ge=1, description="Rank r of the low-rank delta.")
    alpha: float = Field(8.0, gt=0.0, description="Scale; the delta is multiplied by alpha / r.")
    target_matrices: List[LoraTarget] = Field(
        default_factory=lambda: ["W_q", "W_v"],
        description="Dense matrices that receive an adapter.",
    )
    train_classifier_head: bool = Field(True, description="Keep the classifier head trainable.")

    @property
    def scaling(self) -> float:
        return self.alpha / self.rank
