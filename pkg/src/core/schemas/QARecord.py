from pydantic import BaseModel, Field


class QARecord(BaseModel):
    """One row of the primary dataset (Disease, Question, Label)."""

    disease: str = ""
    question: str = Field(..., min_length=1)
    label: str = Field(..., min_length=1)

    model_config = {"frozen": True}


class AnswerRecord(BaseModel):
    """One row of the secondary dataset (Disease, Label, Answer)."""

    disease: str = ""
    label: str = Field(..., min_length=1)
    answer: str = Field(..., min_length=1)

    model_config = {"frozen": True}
