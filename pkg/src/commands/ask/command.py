from pathlib import Path

import typer
from typing_extensions import Annotated

from src.commands.common import LogLevelOption
from src.core.classes.qa_engine import QAEngine
from src.core.errors import InputError, UnmappedLabelError
from src.deps import configure_logging, err_console, handle_errors

__all__ = ["ask"]


@handle_errors
def ask(
    model: Annotated[Path, typer.Option("--model", help="Checkpoint (.mqf) written by train.")],
    answers: Annotated[Path, typer.Option("--answers", help="Secondary CSV with Disease,Label,Answer columns.")],
    threshold: Annotated[float, typer.Option("--threshold", help="Minimum confidence before answering.")] = 0.0,
    log_level: LogLevelOption = None,
):
    """Answer questions read one per line from standard input until EOF."""
    configure_logging(log_level)
    engine = QAEngine.from_files(model, answers, threshold=threshold)
    stdin = typer.get_text_stream("stdin")
    interactive = stdin.isatty()

    while True:
        if interactive:
            typer.echo("> ", nl=False)
        line = stdin.readline()
        if not line:
            break
        try:
            response = engine.ask(line.rstrip("\r\n"))
        except (InputError, UnmappedLabelError) as e:
            err_console.print(f"[bold red]error:[/bold red] {e}", highlight=False)
            continue
        typer.echo(response.render())
        typer.echo("")
