from typing import Dict, Iterable, List, Optional

from loguru import logger

from src.core.errors import DuplicateLabelError
from src.core.schemas.QARecord import AnswerRecord


class AnswerBank:
    """Label → predefined answer lookup built from the secondary dataset."""

    def __init__(self, records: Iterable[AnswerRecord] = (), path: Optional[str] = None):
        self._records: Dict[str, AnswerRecord] = {}
        for record in records:
            self.add(record, path=path)

    def add(self, record: AnswerRecord, path: Optional[str] = None, line: Optional[int] = None):
        if record.label in self._records:
            raise DuplicateLabelError(record.label, path=path, line=line)
        self._records[record.label] = record

    def __contains__(self, label: str) -> bool:
        return label in self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records.values())

    @property
    def labels(self) -> List[str]:
        return list(self._records)

    def answer_for(self, label: str) -> str:
        return self._records[label].answer

    def record_for(self, label: str) -> AnswerRecord:
        return self._records[label]

    def unmatched_labels(self, labels: Iterable[str]) -> List[str]:
        """Labels the classifier can emit that have no answer here."""
        return sorted(label for label in set(labels) if label not in self._records)

    def check_alignment(self, labels: Iterable[str]) -> List[str]:
        missing = self.unmatched_labels(labels)
        if missing:
            logger.warning(
                f"{len(missing)} classifier label(s) have no answer in the answer bank: {', '.join(missing)}"
            )
        return missing
