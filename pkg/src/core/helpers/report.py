import csv
from pathlib import Path
from typing import Dict, List, Union

from loguru import logger
from pydantic import ValidationError

from src.core.classes.crossval import METRIC_NAMES, aggregate_summary, epochs_to_threshold, summarize_histories
from src.core.classes.run_directory import METRICS_COLUMNS, METRICS_FILE, REPORT_DIR
from src.core.errors import ReportError, RunExistsError, UsageError
from src.core.helpers.svg_chart import render_line_chart
from src.core.schemas.EpochMetrics import EpochMetrics
from src.core.schemas.MetricSet import MetricSet

# variant -> fold -> epochs in order
MetricsTable = Dict[str, Dict[int, List[EpochMetrics]]]

CONVERGENCE_THRESHOLD = 0.99
REPORT_FORMATS = ("svg", "csv")


def read_metrics(path: Union[str, Path]) -> MetricsTable:
    """
    Parse a metrics.csv written by a train, crossval or compare run.

    Raises:
        ReportError: The file is missing, has the wrong header, holds a
            malformed row or a fold whose epochs are not 1..n.
    """
    path = Path(path)
    if not path.exists():
        raise ReportError(f"{path}: metrics file not found")
    table: MetricsTable = {}
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != METRICS_COLUMNS:
            raise ReportError(f"{path}: expected header {','.join(METRICS_COLUMNS)}, got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(METRICS_COLUMNS):
                raise ReportError(f"{path}:{reader.line_num}: expected {len(METRICS_COLUMNS)} columns, got {len(row)}")
            try:
                record = EpochMetrics(
                    fold=int(row[1]),
                    epoch=int(row[2]),
                    train_loss=float(row[3]),
                    validation=MetricSet(
                        accuracy=float(row[4]), precision=float(row[5]), recall=float(row[6]), f1=float(row[7])
                    ),
                    wall_time_s=float(row[8]),
                )
            except (ValueError, ValidationError) as e:
                raise ReportError(f"{path}:{reader.line_num}: malformed row: {e}") from e
            table.setdefault(row[0], {}).setdefault(record.fold, []).append(record)

    if not table:
        raise ReportError(f"{path}: no metric rows")
    for variant, folds in table.items():
        for fold, history in folds.items():
            if [r.epoch for r in history] != list(range(1, len(history) + 1)):
                raise ReportError(f"{path}: {variant} fold {fold} epochs are not 1..{len(history)}")
    return table


def _series(folds: Dict[int, List[EpochMetrics]], metric: str) -> Dict[str, List[float]]:
    return {f"fold {fold}": [r.validation.get(metric) for r in folds[fold]] for fold in sorted(folds)}


def write_charts(table: MetricsTable, out_dir: Path, fmt: str = "svg") -> List[Path]:
    """One file per (variant, metric): an SVG line chart, or the rows pivoted to epoch × fold."""
    if fmt not in REPORT_FORMATS:
        raise UsageError(f"unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for variant in sorted(table):
        folds = table[variant]
        for metric in METRIC_NAMES:
            series = _series(folds, metric)
            target = out_dir / f"{variant}-{metric}.{fmt}"
            if fmt == "svg":
                target.write_text(render_line_chart(f"{variant} {metric}", series), encoding="utf-8")
            else:
                epochs = max(len(v) for v in series.values())
                with target.open("w", newline="", encoding="utf-8") as f:
                    writer = csv.writer(f, lineterminator="\n")
                    writer.writerow(["epoch", *(name.replace(" ", "_") for name in series)])
                    for i in range(epochs):
                        writer.writerow([i + 1, *(repr(v[i]) if i < len(v) else "" for v in series.values())])
            written.append(target)
    return written


def render_summary_markdown(table: MetricsTable, selection: str = "final") -> str:
    """
    Markdown table with one row per variant:
    variant | acc / prec / rec / f1 (fold-averaged %) | summed fold time | first epoch reaching 99% accuracy per fold.
    """
    summaries = [
        summarize_histories(variant, [table[variant][f] for f in sorted(table[variant])], selection)
        for variant in sorted(table)
    ]
    lines = [
        "| variant | accuracy / precision / recall / f1 (%) | time (s) | epochs to 99% accuracy |",
        "|---|---|---|---|",
    ]
    for summary, row in zip(summaries, aggregate_summary(summaries)):
        reached = [epochs_to_threshold(h, "accuracy", CONVERGENCE_THRESHOLD) for h in summary.histories]
        epochs = ", ".join("-" if e is None else str(e) for e in reached)
        lines.append(f"| {row.variant} | {row.metrics_slashed()} | {row.time_s} | {epochs} |")
    return "\n".join(lines) + "\n"


def write_report(
    run_path: Union[str, Path], fmt: str = "svg", selection: str = "final", force: bool = False
) -> List[Path]:
    """
    Build the report for a run directory under ``<run>/report``.

    Args:
        run_path: Run directory containing metrics.csv.
        fmt: "svg" for line charts or "csv" for per-metric pivots.
        force: Replace an existing report.

    Returns:
        List[Path]: Files written, summary.md last.
    """
    run_path = Path(run_path)
    table = read_metrics(run_path / METRICS_FILE)
    out_dir = run_path / REPORT_DIR
    if out_dir.exists() and any(out_dir.iterdir()) and not force:
        raise RunExistsError(f"{out_dir} already holds a report; pass --force to overwrite")
    written = write_charts(table, out_dir, fmt)
    summary_path = out_dir / "summary.md"
    summary_path.write_text(render_summary_markdown(table, selection), encoding="utf-8")
    written.append(summary_path)
    logger.info(f"wrote {len(written)} report files to {out_dir}")
    return written
