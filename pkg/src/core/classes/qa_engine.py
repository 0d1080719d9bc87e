from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from loguru import logger

from src.core.classes.answer_bank import AnswerBank
from src.core.classes.encoder_model import predict_proba
from src.core.errors import InputError, UnmappedLabelError, UsageError
from src.core.helpers.checkpoint_io import Checkpoint, load_checkpoint
from src.core.helpers.dataset_io import LabelIndex, load_secondary
from src.core.helpers.tokenizer import Vocab, encode_batch, normalize
from src.core.schemas.QAResponse import QAResponse


def predict_label(model, vocab: Vocab, label_index: LabelIndex, question: str) -> Tuple[str, float]:
    """
    Classify one question.

    Returns:
        (label, confidence) where confidence is the largest softmax probability.
        Exact ties go to the lower label id.
    """
    if not normalize(question or ""):
        raise InputError("question is empty")
    ids, mask = encode_batch([question], vocab, model.config.max_len)
    probs = predict_proba(model, ids, mask)[0]
    best = int(np.argmax(probs))
    return label_index.label_of(best), float(probs[best])


def answer_question(question: str, artifacts: Checkpoint, bank: AnswerBank, threshold: float = 0.0) -> QAResponse:
    """
    Classify ``question`` and look up the predefined answer for its label.

    Below ``threshold`` the response falls back to "no confident answer" and
    still reports the label. A confident label with no entry in ``bank``
    raises :class:`UnmappedLabelError`.
    """
    if artifacts.label_index is None:
        raise UsageError("checkpoint carries no label list; retrain with a current version")
    label, confidence = predict_label(artifacts.model, artifacts.vocab, artifacts.label_index, question)
    if confidence < threshold:
        return QAResponse(question=question, label=label, confidence=confidence, answer=None, fallback=True)
    if label not in bank:
        raise UnmappedLabelError(label)
    return QAResponse(question=question, label=label, confidence=confidence, answer=bank.answer_for(label))


class QAEngine:
    """
    Two-stage question answering: classify into a label, then return the
    label's predefined answer. Read-only after construction.
    """

    def __init__(self, artifacts: Checkpoint, bank: AnswerBank, threshold: float = 0.0):
        self.artifacts = artifacts
        self.bank = bank
        self.threshold = threshold
        if artifacts.label_index is not None:
            bank.check_alignment(artifacts.label_index.labels)

    @classmethod
    def from_files(
        cls,
        model_path: Union[str, Path],
        answers_path: Union[str, Path],
        threshold: float = 0.0,
    ) -> "QAEngine":
        artifacts = load_checkpoint(model_path)
        bank = load_secondary(answers_path)
        logger.info(f"loaded {artifacts.config.variant_name} with {len(bank)} answers")
        return cls(artifacts, bank, threshold=threshold)

    def ask(self, question: str) -> QAResponse:
        return answer_question(question, self.artifacts, self.bank, threshold=self.threshold)

    def predict(self, question: str) -> Tuple[str, float]:
        return predict_label(self.artifacts.model, self.artifacts.vocab, self.artifacts.label_index, question)

    @property
    def labels(self) -> Optional[list]:
        return self.artifacts.label_index.labels if self.artifacts.label_index is not None else None
