from pydantic import BaseModel


class ComparisonRow(BaseModel):
    """One rendered row of the model comparison table (percentages as text)."""

    variant: str
    accuracy: str
    precision: str
    recall: str
    f1: str
    time_s: str

    def metrics_csv(self) -> str:
        return ", ".join((self.accuracy, self.precision, self.recall, self.f1))

    def metrics_slashed(self) -> str:
        return " / ".join((self.accuracy, self.precision, self.recall, self.f1))
