from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger
from rich.table import Table
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
    SeedOption,
    SelectionOption,
    enum_value,
    load_corpus,
)
from src.core.classes.crossval import aggregate_summary, rank_summaries, run_cross_validation
from src.core.classes.run_directory import RunDirectory
from src.core.helpers.variants import DEFAULT_LINEUP, display_name, make_model_factory, parse_variants
from src.deps import configure_logging, console, handle_errors, resolve_run_config

__all__ = ["compare"]


@handle_errors
def compare(
    data: DataOption = None,
    variants: Annotated[
        Optional[List[str]],
        typer.Option("--variant", help="Variant to compare, repeatable; prefix with 'lora-' for adapters."),
    ] = None,
    k: Annotated[Optional[int], typer.Option("--k", min=2, help="Number of folds.")] = None,
    epochs: EpochsOption = None,
    config: ConfigOption = None,
    out: Annotated[Path, typer.Option("--out", help="Run directory.")] = Path("runs/compare"),
    seed: SeedOption = None,
    batch_size: BatchSizeOption = None,
    lr: LearningRateOption = None,
    jobs: JobsOption = None,
    average: AverageOption = None,
    selection: SelectionOption = None,
    force: ForceOption = False,
    log_level: LogLevelOption = None,
):
    """Cross-validate several variants on the same folds and tabulate the fold-averaged metrics."""
    configure_logging(log_level)
    run_config = resolve_run_config(
        config,
        "compare",
        train={"seed": seed, "epochs": epochs, "batch_size": batch_size, "learning_rate": lr},
        data=str(data) if data else None,
        variants=list(variants) if variants else None,
        k=k,
        jobs=jobs,
        average=enum_value(average),
        selection=enum_value(selection),
    )
    if not run_config.variants:
        run_config = run_config.model_copy(update={"variants": list(DEFAULT_LINEUP)})
    lineup = parse_variants(run_config.variants)
    records, vocab, label_index, _ = load_corpus(run_config)

    run = RunDirectory(out, force=force).create()
    run.write_config(run_config)
    summaries = []
    for variant, lora in lineup:
        name = display_name(variant, lora)
        factory = make_model_factory(
            variant,
            vocab.size,
            len(label_index),
            max_len=run_config.max_len,
            dropout=run_config.dropout,
            lora=lora,
            lora_config=run_config.lora_config,
        )
        summaries.append(
            run_cross_validation(
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
        )

    rows = aggregate_summary(summaries)
    run.write_comparison(summaries, rows)
    best, fastest = rank_summaries(summaries)
    logger.info(f"most accurate: {best}, fastest: {fastest}")

    table = Table(title=f"{run_config.k}-fold comparison (%)")
    for column in ("model", "accuracy", "precision", "recall", "f1", "time (s)"):
        table.add_column(column, justify="left" if column == "model" else "right")
    for row in rows:
        table.add_row(row.variant, row.accuracy, row.precision, row.recall, row.f1, row.time_s)
    console.print(table)
    console.print(f"most accurate: {best}\nfastest: {fastest}")
