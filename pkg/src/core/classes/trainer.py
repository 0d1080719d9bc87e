import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.core.classes import ops
from src.core.classes.encoder_model import forward_logits
from src.core.classes.optimizer import AdamW
from src.core.classes.tensor import Tape
from src.core.errors import NumericError, TrainingDivergedError, UsageError
from src.core.helpers.dataset_io import LabelIndex
from src.core.helpers.metrics import compute_metrics, confusion_matrix
from src.core.helpers.tokenizer import Vocab, encode_batch
from src.core.schemas.EpochMetrics import EpochMetrics
from src.core.schemas.MetricSet import MetricSet
from src.core.schemas.QARecord import QARecord
from src.core.schemas.TrainConfig import TrainConfig

EVAL_BATCH_SIZE = 64


@dataclass(frozen=True)
class EncodedDataset:
    """Token ids, attention masks and label ids for a list of questions."""

    ids: np.ndarray
    mask: np.ndarray
    targets: np.ndarray

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def subset(self, indices: Sequence[int]) -> "EncodedDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return EncodedDataset(self.ids[idx], self.mask[idx], self.targets[idx])


def encode_records(records: Sequence[QARecord], vocab: Vocab, label_index: LabelIndex, max_len: int) -> EncodedDataset:
    ids, mask = encode_batch([r.question for r in records], vocab, max_len)
    return EncodedDataset(ids=ids, mask=mask, targets=label_index.encode([r.label for r in records]))


def batch_loss_and_grads(model, ids, mask, targets, training: bool, rng) -> Tuple[float, dict]:
    """Forward + backward on one batch. Returns the loss and gradients keyed by parameter name."""
    with Tape() as tape:
        logits = forward_logits(model, ids, mask, training=training, rng=rng)
        loss = ops.cross_entropy(logits, targets)
    if not loss.requires_grad:
        return loss.item(), {}
    by_tensor = tape.backward(loss)
    grads = {name: by_tensor[t] for name, t in model.trainable_parameters().items() if t in by_tensor}
    return loss.item(), grads


def train_epoch(
    model,
    train_set: EncodedDataset,
    optimizer: AdamW,
    config: TrainConfig,
    rng: np.random.Generator,
    epoch: int = 1,
) -> Tuple[object, float]:
    """
    One pass over ``train_set``: seeded shuffle, fixed-size batches (the last
    may be smaller), dropout on, one optimizer step per batch.

    Returns:
        (model, mean per-batch loss)
    """
    n = len(train_set)
    if n == 0:
        raise UsageError("cannot train on an empty training set")
    order = rng.permutation(n) if config.shuffle else np.arange(n)
    losses: List[float] = []
    for batch_number, start in enumerate(range(0, n, config.batch_size)):
        idx = order[start:start + config.batch_size]
        try:
            loss, grads = batch_loss_and_grads(
                model, train_set.ids[idx], train_set.mask[idx], train_set.targets[idx], training=True, rng=rng
            )
        except NumericError as e:
            raise TrainingDivergedError(f"epoch {epoch}, batch {batch_number}: {e}") from e
        if not math.isfinite(loss):
            raise TrainingDivergedError(f"epoch {epoch}, batch {batch_number}: loss is {loss}")
        optimizer.step(grads)
        losses.append(loss)
        logger.debug(f"epoch {epoch} batch {batch_number} loss {loss:.4f}")
    return model, float(np.mean(losses))


def predict(model, dataset: EncodedDataset, batch_size: int = EVAL_BATCH_SIZE) -> np.ndarray:
    """Argmax label ids with dropout disabled; ties go to the lower id."""
    preds = []
    for start in range(0, len(dataset), batch_size):
        logits = forward_logits(model, dataset.ids[start:start + batch_size], dataset.mask[start:start + batch_size])
        preds.append(np.argmax(logits.data, axis=-1))
    return np.concatenate(preds) if preds else np.zeros(0, dtype=np.int64)


def evaluate_epoch(model, val_set: EncodedDataset, num_labels: int, average: str = "macro") -> MetricSet:
    """Metrics on a held-out set. Labels absent from both the set and the predictions are not averaged."""
    if len(val_set) == 0:
        raise UsageError("cannot evaluate on an empty validation set")
    preds = predict(model, val_set)
    return compute_metrics(confusion_matrix(val_set.targets, preds, num_labels), average=average, labels="present")


def fit(
    model,
    train_set: EncodedDataset,
    val_set: EncodedDataset,
    config: TrainConfig,
    fold: int = 0,
    average: str = "macro",
    on_epoch: Optional[Callable[[EpochMetrics], None]] = None,
) -> List[EpochMetrics]:
    """
    Train for ``config.epochs`` epochs, evaluating on ``val_set`` after each.

    Wall time is cumulative seconds since the start of the fit, measured with
    a monotonic clock. The model is left in its final-epoch state.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise UsageError("fit needs non-empty training and validation sets")
    num_labels = model.config.num_labels
    rng = np.random.default_rng(config.seed)
    optimizer = AdamW(model.trainable_parameters(), config)
    history: List[EpochMetrics] = []
    start = time.perf_counter()

    for epoch in range(1, config.epochs + 1):
        _, train_loss = train_epoch(model, train_set, optimizer, config, rng, epoch=epoch)
        validation = evaluate_epoch(model, val_set, num_labels, average=average)
        record = EpochMetrics(
            fold=fold,
            epoch=epoch,
            train_loss=train_loss,
            validation=validation,
            wall_time_s=time.perf_counter() - start,
        )
        history.append(record)
        logger.info(
            f"[fold {fold}] epoch {epoch:2d} | train_loss: {train_loss:.4f} | "
            f"acc: {validation.accuracy:.4f} | f1: {validation.f1:.4f} | time: {record.wall_time_s:.1f}s"
        )
        if on_epoch is not None:
            on_epoch(record)
    return history
