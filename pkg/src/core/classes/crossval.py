import math
import time
from concurrent.futures import ThreadPoolExecutor
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from src.core.classes.trainer import EncodedDataset, encode_records, fit
from src.core.errors import FoldFailedError, MedQAError, UsageError
from src.core.helpers.dataset_io import LabelIndex, kfold_split
from src.core.helpers.tokenizer import Vocab, build_vocab
from src.core.schemas.ComparisonRow import ComparisonRow
from src.core.schemas.CVSummary import CVSummary
from src.core.schemas.EpochMetrics import EpochMetrics
from src.core.schemas.MetricSet import MetricSet
from src.core.schemas.QARecord import QARecord
from src.core.schemas.TrainConfig import TrainConfig

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")

ModelFactory = Callable[[int], object]
EpochCallback = Callable[[str, EpochMetrics], None]


def select_epoch(history: Sequence[EpochMetrics], selection: str = "final") -> EpochMetrics:
    """The epoch whose metrics represent a fold: the last one, or the most accurate (earliest on ties)."""
    if not history:
        raise UsageError("empty fold history")
    if selection == "final":
        return history[-1]
    if selection == "best":
        return max(history, key=lambda e: (e.validation.accuracy, -e.epoch))
    raise UsageError(f"unknown selection {selection!r}; expected 'final' or 'best'")


def summarize_histories(
    variant_name: str,
    histories: Sequence[Sequence[EpochMetrics]],
    selection: str = "final",
    total_wall_time_s: Optional[float] = None,
) -> CVSummary:
    """
    Fold-average a set of per-fold histories.

    Means use a compensated sum divided by k; the spread is the population
    standard deviation across folds.
    """
    if not histories:
        raise UsageError("no fold histories to summarize")
    k = len(histories)
    selected = [select_epoch(h, selection).validation for h in histories]

    mean: Dict[str, float] = {}
    std: Dict[str, float] = {}
    for metric in METRIC_NAMES:
        values = [m.get(metric) for m in selected]
        mu = math.fsum(values) / k
        mean[metric] = min(max(mu, 0.0), 1.0)
        std[metric] = math.sqrt(math.fsum((v - mu) ** 2 for v in values) / k)

    fold_times = [h[-1].wall_time_s for h in histories]
    return CVSummary(
        variant_name=variant_name,
        k=k,
        epochs=max(len(h) for h in histories),
        selection=selection,
        fold_metrics=selected,
        mean=MetricSet(**mean),
        std=MetricSet(**std),
        fold_wall_times_s=fold_times,
        total_wall_time_s=total_wall_time_s if total_wall_time_s is not None else math.fsum(fold_times),
        histories=[list(h) for h in histories],
    )


def _run_fold(
    fold: int,
    dataset: EncodedDataset,
    train_idx: List[int],
    val_idx: List[int],
    model_factory: ModelFactory,
    train_config: TrainConfig,
    average: str,
    on_epoch: Optional[Callable[[EpochMetrics], None]],
) -> List[EpochMetrics]:
    seed = train_config.seed + fold
    try:
        model = model_factory(seed)
        config = train_config.model_copy(update={"seed": seed})
        return fit(
            model,
            dataset.subset(train_idx),
            dataset.subset(val_idx),
            config,
            fold=fold,
            average=average,
            on_epoch=on_epoch,
        )
    except FoldFailedError:
        raise
    except (MedQAError, ArithmeticError, ValueError) as e:
        raise FoldFailedError(fold, e) from e


def run_cross_validation(
    records: Sequence[QARecord],
    model_factory: ModelFactory,
    train_config: TrainConfig,
    k: int = 5,
    *,
    vocab: Optional[Vocab] = None,
    label_index: Optional[LabelIndex] = None,
    max_len: int = 16,
    stratified: bool = True,
    selection: str = "final",
    average: str = "macro",
    jobs: int = 1,
    variant_name: str = "model",
    on_epoch: Optional[EpochCallback] = None,
) -> CVSummary:
    """
    k-fold cross-validation of ``model_factory`` on ``records``.

    Fold f trains a fresh ``model_factory(seed + f)`` on the other k−1 folds
    and validates on fold f after every epoch. Folds run on a thread pool when
    ``jobs`` > 1; results are merged by fold id. With one job ``on_epoch``
    receives rows as they happen; with several jobs they are replayed in fold
    order once every fold has finished.

    Args:
        records: Labelled questions.
        model_factory: Builds an untrained model from a seed.
        train_config: Training hyperparameters; ``seed`` is the base seed.
        k: Number of folds.
        vocab: Token vocabulary; built from every question when omitted.
        label_index: Label ↔ id mapping; built from the records when omitted.

    Returns:
        CVSummary: Fold-averaged metrics, spreads, wall times and histories.
    """
    if len(records) < k:
        raise UsageError(f"cannot run {k}-fold cross-validation on {len(records)} records")
    if jobs < 1:
        raise UsageError("jobs must be at least 1")
    if vocab is None:
        vocab = build_vocab(r.question for r in records)
    if label_index is None:
        label_index = LabelIndex.from_records(records)
    dataset = encode_records(records, vocab, label_index, max_len)
    plan = kfold_split(records, k=k, seed=train_config.seed, stratified=stratified)
    logger.info(f"{variant_name}: {k}-fold cross-validation on {len(records)} records, fold sizes {plan.fold_sizes()}")

    def stream(record: EpochMetrics):
        if on_epoch is not None:
            on_epoch(variant_name, record)

    start = time.perf_counter()
    histories: Dict[int, List[EpochMetrics]] = {}
    if jobs == 1:
        for fold in range(k):
            histories[fold] = _run_fold(
                fold, dataset, plan.train_indices(fold), plan.validation_indices(fold),
                model_factory, train_config, average, stream,
            )
    else:
        with ThreadPoolExecutor(max_workers=min(jobs, k)) as executor:
            futures = {
                fold: executor.submit(
                    _run_fold, fold, dataset, plan.train_indices(fold), plan.validation_indices(fold),
                    model_factory, train_config, average, None,
                )
                for fold in range(k)
            }
            histories = {fold: future.result() for fold, future in futures.items()}
        for fold in range(k):
            for record in histories[fold]:
                stream(record)
    total = time.perf_counter() - start

    summary = summarize_histories(variant_name, [histories[f] for f in range(k)], selection, total)
    logger.info(
        f"{variant_name}: mean acc {summary.mean.accuracy:.4f} prec {summary.mean.precision:.4f} "
        f"rec {summary.mean.recall:.4f} f1 {summary.mean.f1:.4f} in {total:.1f}s"
    )
    return summary


def format_percent(value: float) -> str:
    """0.7847 -> "78.47", rounding half away from zero on the decimal text."""
    return str((Decimal(str(value)) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def aggregate_summary(summaries: Sequence[CVSummary]) -> List[ComparisonRow]:
    if not summaries:
        raise UsageError("nothing to aggregate")
    return [
        ComparisonRow(
            variant=s.variant_name,
            accuracy=format_percent(s.mean.accuracy),
            precision=format_percent(s.mean.precision),
            recall=format_percent(s.mean.recall),
            f1=format_percent(s.mean.f1),
            time_s=f"{s.total_wall_time_s:.2f}",
        )
        for s in summaries
    ]


def rank_summaries(summaries: Sequence[CVSummary]) -> Tuple[str, str]:
    """(most accurate variant, fastest variant). Accuracy ties go to the faster run, then the name."""
    if not summaries:
        raise UsageError("nothing to rank")
    best = min(summaries, key=lambda s: (-s.mean.accuracy, s.total_wall_time_s, s.variant_name))
    fastest = min(summaries, key=lambda s: (s.total_wall_time_s, s.variant_name))
    return best.variant_name, fastest.variant_name


def epochs_to_threshold(history: Sequence[EpochMetrics], metric: str = "accuracy", threshold: float = 0.99) -> Optional[int]:
    if metric not in METRIC_NAMES:
        raise UsageError(f"unknown metric {metric!r}")
    for record in history:
        if record.validation.get(metric) >= threshold:
            return record.epoch
    return None
