from enum import Enum
from pathlib import Path

import typer
from typing_extensions import Annotated

from src.commands.common import ForceOption, LogLevelOption, Selection
from src.core.helpers.report import write_report
from src.deps import configure_logging, console, handle_errors

__all__ = ["report"]


class ReportFormat(str, Enum):
    svg = "svg"
    csv = "csv"


@handle_errors
def report(
    run: Annotated[Path, typer.Option("--run", help="Run directory with metrics.csv.")],
    format: Annotated[ReportFormat, typer.Option("--format", help="Line charts (svg) or per-metric tables (csv).")] = ReportFormat.svg,
    selection: Annotated[Selection, typer.Option("--selection")] = Selection.final,
    force: ForceOption = False,
    log_level: LogLevelOption = None,
):
    """Per-metric curves (one line per fold) and a summary.md table for a finished run."""
    configure_logging(log_level)
    written = write_report(run, fmt=format.value, selection=selection.value, force=force)
    for path in written:
        console.print(str(path))
