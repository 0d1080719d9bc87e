from pathlib import Path

import typer
from typing_extensions import Annotated

from src.commands.common import ForceOption, LogLevelOption, SeedOption
from src.core.errors import RunExistsError
from src.core.helpers.dataset_io import generate_synthetic, write_primary, write_secondary
from src.core.templates.DISEASES import DISEASES
from src.core.templates.QUESTION_TEMPLATES import QUESTION_TEMPLATES
from src.deps import configure_logging, console, default_seed, handle_errors

__all__ = ["generate"]

PRIMARY_FILE = "questions.csv"
SECONDARY_FILE = "answers.csv"


@handle_errors
def generate(
    out: Annotated[Path, typer.Option("--out", help="Folder for questions.csv and answers.csv.")] = Path("data"),
    seed: SeedOption = None,
    force: ForceOption = False,
    log_level: LogLevelOption = None,
):
    """Write the synthetic template dataset (primary questions plus the matching answer bank)."""
    configure_logging(log_level)
    primary, secondary = out / PRIMARY_FILE, out / SECONDARY_FILE
    if not force and (primary.exists() or secondary.exists()):
        raise RunExistsError(f"{out} already holds a dataset; pass --force to overwrite")
    records, bank = generate_synthetic(DISEASES, QUESTION_TEMPLATES, seed=default_seed() if seed is None else seed)
    out.mkdir(parents=True, exist_ok=True)
    write_primary(records, primary)
    write_secondary(bank, secondary)
    console.print(f"{len(records)} questions over {len(bank)} labels -> {primary}, {secondary}")
