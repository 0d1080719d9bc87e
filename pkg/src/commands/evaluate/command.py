from pathlib import Path

import typer
from typing_extensions import Annotated

from src.commands.common import Average, LogLevelOption, metrics_table
from src.core.classes.trainer import encode_records, evaluate_epoch
from src.core.errors import UsageError
from src.core.helpers.checkpoint_io import load_checkpoint
from src.core.helpers.dataset_io import load_primary
from src.deps import configure_logging, console, handle_errors

__all__ = ["evaluate"]


@handle_errors
def evaluate(
    model: Annotated[Path, typer.Option("--model", help="Checkpoint (.mqf) written by train.")],
    data: Annotated[Path, typer.Option("--data", help="Labelled primary CSV.")],
    average: Annotated[Average, typer.Option("--average")] = Average.macro,
    log_level: LogLevelOption = None,
):
    """Score a saved checkpoint on a labelled dataset."""
    configure_logging(log_level)
    checkpoint = load_checkpoint(model)
    if checkpoint.label_index is None:
        raise UsageError(f"{model} carries no label list")
    records = load_primary(data)
    unknown = sorted({r.label for r in records} - set(checkpoint.label_index.labels))
    if unknown:
        raise UsageError(f"{data} has labels the model was not trained on: {', '.join(unknown)}")
    dataset = encode_records(records, checkpoint.vocab, checkpoint.label_index, checkpoint.config.max_len)
    metrics = evaluate_epoch(checkpoint.model, dataset, checkpoint.config.num_labels, average=average.value)
    console.print(metrics_table(f"{model.name} on {len(records)} questions", [(checkpoint.config.variant_name, metrics)]))
