from pathlib import Path
from typing import Optional

import typer
from loguru import logger
from typing_extensions import Annotated

from src.commands.common import (
    AnswersOption,
    BatchSizeOption,
    ConfigOption,
    DataOption,
    EpochsOption,
    ForceOption,
    LearningRateOption,
    LogLevelOption,
    LoraOption,
    SeedOption,
    Variant,
    enum_value,
    load_corpus,
    metrics_table,
)
from src.core.classes.run_directory import RunDirectory
from src.core.classes.trainer import encode_records, fit
from src.core.helpers.checkpoint_io import save_checkpoint
from src.core.helpers.dataset_io import split_train_val
from src.core.helpers.variants import display_name, make_model_factory
from src.deps import configure_logging, console, handle_errors, resolve_run_config

__all__ = ["train"]


@handle_errors
def train(
    data: DataOption = None,
    answers: AnswersOption = None,
    variant: Annotated[Optional[Variant], typer.Option("--variant", help="Model preset.")] = None,
    lora: LoraOption = None,
    config: ConfigOption = None,
    out: Annotated[Path, typer.Option("--out", help="Run directory.")] = Path("runs/train"),
    seed: SeedOption = None,
    epochs: EpochsOption = None,
    batch_size: BatchSizeOption = None,
    lr: LearningRateOption = None,
    force: ForceOption = False,
    log_level: LogLevelOption = None,
):
    """Train one model on a 70/30 split and save the checkpoint."""
    configure_logging(log_level)
    run_config = resolve_run_config(
        config,
        "train",
        train={"seed": seed, "epochs": epochs, "batch_size": batch_size, "learning_rate": lr},
        data=str(data) if data else None,
        answers=str(answers) if answers else None,
        variant=enum_value(variant),
        lora=lora,
    )
    records, vocab, label_index, _ = load_corpus(run_config)
    train_records, val_records = split_train_val(records, run_config.train_ratio, run_config.train.seed)
    train_set = encode_records(train_records, vocab, label_index, run_config.max_len)
    val_set = encode_records(val_records, vocab, label_index, run_config.max_len)

    factory = make_model_factory(
        run_config.variant,
        vocab.size,
        len(label_index),
        max_len=run_config.max_len,
        dropout=run_config.dropout,
        lora=run_config.lora,
        lora_config=run_config.lora_config,
    )
    name = display_name(run_config.variant, run_config.lora)

    run = RunDirectory(out, force=force).create()
    run.write_config(run_config)
    logger.info(f"training {name} on {len(train_records)} questions, validating on {len(val_records)}")

    model = factory(run_config.train.seed)
    history = fit(
        model,
        train_set,
        val_set,
        run_config.train,
        fold=0,
        average=run_config.average,
        on_epoch=lambda record: run.append_epoch(name, record),
    )
    save_checkpoint(model, model.config, vocab, run.checkpoint_path, label_index)

    final = history[-1]
    console.print(metrics_table(f"{name} after {final.epoch} epochs ({final.wall_time_s:.1f}s)", [(name, final.validation)]))
    console.print(f"checkpoint: {run.checkpoint_path}")
