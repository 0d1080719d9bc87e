from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import typer
from rich.table import Table
from typing_extensions import Annotated

from src.core.classes.answer_bank import AnswerBank
from src.core.helpers.dataset_io import LabelIndex, load_primary, load_secondary
from src.core.helpers.tokenizer import Vocab, build_vocab
from src.core.schemas.MetricSet import MetricSet
from src.core.schemas.QARecord import QARecord
from src.core.schemas.RunConfig import RunConfig


class Variant(str, Enum):
    mini_roberta_base = "mini-roberta-base"
    mini_roberta_large = "mini-roberta-large"
    mini_bert_uncased = "mini-bert-uncased"
    mini_bert_large_uncased = "mini-bert-large-uncased"


class Average(str, Enum):
    macro = "macro"
    weighted = "weighted"


class Selection(str, Enum):
    final = "final"
    best = "best"


DataOption = Annotated[Optional[Path], typer.Option("--data", help="Primary CSV with Disease,Question,Label columns.")]
AnswersOption = Annotated[Optional[Path], typer.Option("--answers", help="Secondary CSV with Disease,Label,Answer columns.")]
ConfigOption = Annotated[Optional[Path], typer.Option("--config", help="YAML or JSON file of run settings (config.json works).")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Base random seed (default $MEDQA_SEED, then 42).")]
EpochsOption = Annotated[Optional[int], typer.Option("--epochs", min=1, help="Training epochs (per fold).")]
BatchSizeOption = Annotated[Optional[int], typer.Option("--batch-size", min=1)]
LearningRateOption = Annotated[Optional[float], typer.Option("--lr", help="AdamW learning rate.")]
LoraOption = Annotated[Optional[bool], typer.Option("--lora/--no-lora", help="Wrap the encoder with low-rank adapters.")]
ForceOption = Annotated[bool, typer.Option("--force", help="Overwrite artifacts of an earlier run.")]
LogLevelOption = Annotated[Optional[str], typer.Option("--log-level", help="Overrides MEDQA_LOG_LEVEL.")]
JobsOption = Annotated[Optional[int], typer.Option("--jobs", min=1, help="Folds trained in parallel.")]
AverageOption = Annotated[Optional[Average], typer.Option("--average", help="Per-class averaging of precision, recall and F1.")]
SelectionOption = Annotated[Optional[Selection], typer.Option("--selection", help="Epoch of each fold that feeds the mean.")]


def enum_value(value) -> Optional[str]:
    return value.value if isinstance(value, Enum) else value


def load_corpus(run_config: RunConfig) -> Tuple[List[QARecord], Vocab, LabelIndex, Optional[AnswerBank]]:
    """Primary records, a vocabulary over every question, the label index and the optional answer bank."""
    records = load_primary(run_config.data)
    vocab = build_vocab((r.question for r in records), run_config.vocab_min_freq, run_config.vocab_max_size)
    label_index = LabelIndex.from_records(records)
    bank = None
    if run_config.answers:
        bank = load_secondary(run_config.answers)
        bank.check_alignment(label_index.labels)
    return records, vocab, label_index, bank


def metrics_table(title: str, rows: Iterable[Tuple[str, MetricSet]]) -> Table:
    table = Table(title=title)
    table.add_column("model")
    for column in ("accuracy", "precision", "recall", "f1"):
        table.add_column(column, justify="right")
    for name, m in rows:
        table.add_row(name, f"{m.accuracy:.4f}", f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}")
    return table
