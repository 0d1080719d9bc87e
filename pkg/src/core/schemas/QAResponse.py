from typing import Optional

from pydantic import BaseModel, Field

NO_CONFIDENT_ANSWER = "no confident answer"


class QAResponse(BaseModel):
    question: str
    label: str = Field(..., description="Predicted label, reported even when the answer falls back.")
    confidence: float = Field(..., gt=0.0, le=1.0, description="Maximum softmax probability.")
    answer: Optional[str] = Field(None, description="Predefined answer for the label, None on fallback.")
    fallback: bool = False

    def render(self) -> str:
        text = self.answer if not self.fallback else f"[{NO_CONFIDENT_ANSWER}]"
        return f"label: {self.label}\nconfidence: {self.confidence:.4f}\nanswer: {text}"
