import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from src.core.classes.answer_bank import AnswerBank
from src.core.errors import (
    ColumnCountError,
    EmptyFieldError,
    MissingHeaderError,
    UsageError,
)
from src.core.schemas.QARecord import AnswerRecord, QARecord
from src.core.templates.ANSWER_TEMPLATES import ANSWER_TEMPLATES, GENERIC_ANSWERS

PRIMARY_HEADER = ["Disease", "Question", "Label"]
SECONDARY_HEADER = ["Disease", "Label", "Answer"]

PathLike = Union[str, Path]


def _read_rows(path: PathLike, header: List[str]):
    """Yield (line_number, row) for every data row after checking the header."""
    with open(path, "r", encoding="utf-8-sig", newline="") as file:
        reader = csv.reader(file)
        first = next(reader, None)
        if first is None or [cell.strip() for cell in first] != header:
            raise MissingHeaderError(f"expected header {','.join(header)!r}", path=str(path), line=1)
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ColumnCountError(
                    f"expected {len(header)} columns, found {len(row)}", path=str(path), line=reader.line_num
                )
            yield reader.line_num, row


def load_primary(path: PathLike) -> List[QARecord]:
    records = []
    for line, (disease, question, label) in _read_rows(path, PRIMARY_HEADER):
        try:
            records.append(QARecord(disease=disease.strip(), question=question.strip(), label=label.strip()))
        except ValidationError:
            raise EmptyFieldError("question and label must be non-empty", path=str(path), line=line)
    return records


def load_secondary(path: PathLike) -> AnswerBank:
    bank = AnswerBank()
    for line, (disease, label, answer) in _read_rows(path, SECONDARY_HEADER):
        try:
            record = AnswerRecord(disease=disease.strip(), label=label.strip(), answer=answer.strip())
        except ValidationError:
            raise EmptyFieldError("label and answer must be non-empty", path=str(path), line=line)
        bank.add(record, path=str(path), line=line)
    return bank


def write_primary(records: Sequence[QARecord], path: PathLike):
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(PRIMARY_HEADER)
        for r in records:
            writer.writerow([r.disease, r.question, r.label])


def write_secondary(bank: AnswerBank, path: PathLike):
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(SECONDARY_HEADER)
        for r in bank:
            writer.writerow([r.disease, r.label, r.answer])


class LabelIndex:
    """Bijection between label strings and dense ids, assigned in sorted order."""

    def __init__(self, labels: Sequence[str]):
        self._labels: Tuple[str, ...] = tuple(sorted(set(labels)))
        self._ids: Dict[str, int] = {label: i for i, label in enumerate(self._labels)}

    @classmethod
    def from_records(cls, records: Sequence[QARecord]) -> "LabelIndex":
        return cls([r.label for r in records])

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    @property
    def labels(self) -> List[str]:
        return list(self._labels)

    def id_of(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise UsageError(f"label {label!r} is not in the label index") from None

    def label_of(self, index: int) -> str:
        return self._labels[index]

    def encode(self, labels: Sequence[str]) -> np.ndarray:
        return np.array([self.id_of(label) for label in labels], dtype=np.int64)


@dataclass(frozen=True)
class FoldPlan:
    """assignments[i] is the fold that holds record i out for validation."""

    k: int
    assignments: Tuple[int, ...]

    def validation_indices(self, fold: int) -> List[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]

    def train_indices(self, fold: int) -> List[int]:
        return [i for i, f in enumerate(self.assignments) if f != fold]

    def fold_sizes(self) -> List[int]:
        return [sum(1 for f in self.assignments if f == fold) for fold in range(self.k)]


def split_train_val(
    records: Sequence, ratio: float = 0.7, seed: int = 42
) -> Tuple[List, List]:
    """
    Seeded shuffle, then the first floor(n·ratio) records train and the rest validate.
    """
    n = len(records)
    if n < 2:
        raise UsageError(f"need at least 2 records to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise UsageError(f"ratio must be inside (0, 1), got {ratio}")
    # the small epsilon keeps 6800 * 0.7 at 4760 despite binary rounding
    n_train = int(math.floor(n * ratio + 1e-9))
    if n_train < 1 or n_train > n - 1:
        raise UsageError(f"ratio {ratio} leaves an empty side for {n} records")
    order = np.random.default_rng(seed).permutation(n)
    train = [records[i] for i in order[:n_train]]
    val = [records[i] for i in order[n_train:]]
    return train, val


def kfold_split(
    records: Sequence[QARecord], k: int = 5, seed: int = 42, stratified: bool = True
) -> FoldPlan:
    """
    Partition records into k folds.

    Stratified mode walks the labels in sorted order, shuffles each label's
    records with the seed and deals them round-robin with one counter that
    keeps running across labels, so both per-label and overall fold sizes
    differ by at most one.
    """
    n = len(records)
    if k < 2:
        raise UsageError(f"k must be at least 2, got {k}")
    if n < k:
        raise UsageError(f"cannot split {n} records into {k} folds")
    rng = np.random.default_rng(seed)
    assignments = [0] * n

    if not stratified:
        for position, index in enumerate(rng.permutation(n)):
            assignments[int(index)] = position % k
        return FoldPlan(k=k, assignments=tuple(assignments))

    by_label: Dict[str, List[int]] = {}
    for i, record in enumerate(records):
        by_label.setdefault(record.label, []).append(i)
    counter = 0
    for label in sorted(by_label):
        members = by_label[label]
        for j in rng.permutation(len(members)):
            assignments[members[int(j)]] = counter % k
            counter += 1
    return FoldPlan(k=k, assignments=tuple(assignments))


def generate_synthetic(
    diseases: Sequence[str], templates: Sequence[Tuple[str, str]], seed: int = 42
) -> Tuple[List[QARecord], AnswerBank]:
    """
    Expand every (disease, template) pair into a question record.

    Args:
        diseases: Disease names, e.g. ["diabetes"].
        templates: (question pattern with a {disease} placeholder, label suffix).
        seed: Picks the answer phrasing for each label.

    Returns:
        The |diseases|·|templates| records and an answer bank with one answer per label.
    """
    if not diseases or not templates:
        raise UsageError("generate_synthetic needs at least one disease and one template")
    for pattern, _ in templates:
        if "{disease}" not in pattern:
            raise UsageError(f"template {pattern!r} has no {{disease}} placeholder")

    rng = np.random.default_rng(seed)
    records: List[QARecord] = []
    bank = AnswerBank()
    for disease in diseases:
        for pattern, suffix in templates:
            label = f"{disease} {suffix}"
            records.append(QARecord(disease=disease, question=pattern.replace("{disease}", disease), label=label))
            if label not in bank:
                phrasings = ANSWER_TEMPLATES.get(suffix, GENERIC_ANSWERS)
                phrasing = phrasings[int(rng.integers(len(phrasings)))]
                answer = phrasing.format(disease=disease, Disease=disease.capitalize(), suffix=suffix)
                bank.add(AnswerRecord(disease=disease, label=label, answer=answer))
    return records, bank
