from pathlib import Path
from typing import Optional

import typer
from typing_extensions import Annotated

from src.commands.common import (
    AverageOption,
    BatchSizeOption,
    ConfigOption,
    DataOption,
    EpochsOption,
    ForceOption,
    JobsOption,
    LearningRateOption,
    LogLevelOption,
    LoraOption,
    SeedOption,
    SelectionOption,
    Variant,
    enum_value,
    load_corpus,
    metrics_table,
)
from src.core.classes.crossval import run_cross_validation
from src.core.classes.run_directory import RunDirectory
from src.core.helpers.variants import display_name, make_model_factory
from src.deps import configure_logging, console, handle_errors, resolve_run_config

__all__ = ["crossval"]


@handle_errors
def crossval(
    data: DataOption = None,
    variant: Annotated[Optional[Variant], typer.Option("--variant", help="Model preset.")] = None,
    lora: LoraOption = None,
    k: Annotated[Optional[int], typer.Option("--k", min=2, help="Number of folds.")] = None,
    epochs: EpochsOption = None,
    config: ConfigOption = None,
    out: Annotated[Path, typer.Option("--out", help="Run directory.")] = Path("runs/crossval"),
    seed: SeedOption = None,
    batch_size: BatchSizeOption = None,
    lr: LearningRateOption = None,
    jobs: JobsOption = None,
    average: AverageOption = None,
    selection: SelectionOption = None,
    stratified: Annotated[Optional[bool], typer.Option("--stratified/--no-stratified")] = None,
    force: ForceOption = False,
    log_level: LogLevelOption = None,
):
    """k-fold cross-validation of one variant; writes metrics.csv and summary.json."""
    configure_logging(log_level)
    run_config = resolve_run_config(
        config,
        "crossval",
        train={"seed": seed, "epochs": epochs, "batch_size": batch_size, "learning_rate": lr},
        data=str(data) if data else None,
        variant=enum_value(variant),
        lora=lora,
        k=k,
        jobs=jobs,
        average=enum_value(average),
        selection=enum_value(selection),
        stratified=stratified,
    )
    records, vocab, label_index, _ = load_corpus(run_config)
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
    summary = run_cross_validation(
        records,
        factory,
        run_config.train,
        k=run_config.k,
        vocab=vocab,
        label_index=label_index,
        max_len=run_config.max_len,
        stratified=run_config.stratified,
        selection=run_config.selection,
        average=run_config.average,
        jobs=run_config.jobs,
        variant_name=name,
        on_epoch=run.append_epoch,
    )
    run.write_summary(summary)

    rows = [(f"fold {f}", m) for f, m in enumerate(summary.fold_metrics)]
    rows += [("mean", summary.mean), ("std", summary.std)]
    console.print(metrics_table(f"{name}: {summary.k}-fold cross-validation, {summary.total_wall_time_s:.1f}s", rows))
