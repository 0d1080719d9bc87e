import functools
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import typer
import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import ValidationError
from rich.console import Console

from src.core.errors import ConfigError, MedQAError
from src.core.schemas.RunConfig import RunConfig

load_dotenv()

DEFAULT_SEED = 42
SEED_ENV = "MEDQA_SEED"
LOG_LEVEL_ENV = "MEDQA_LOG_LEVEL"

console = Console()
err_console = Console(stderr=True)


def configure_logging(level: Optional[str] = None):
    """Send loguru output to stderr so stdout only carries command output."""
    level = (level or os.getenv(LOG_LEVEL_ENV, "INFO")).upper()
    logger.remove()
    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}",
    )


def handle_errors(fn):
    """Map project errors to exit codes: 2 for usage/config problems, 1 for runtime failures."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MedQAError as e:
            err_console.print(f"[bold red]error:[/bold red] {e}", highlight=False)
            raise typer.Exit(code=e.exit_code)
        except ValidationError as e:
            err_console.print(f"[bold red]invalid configuration:[/bold red] {e}", highlight=False)
            raise typer.Exit(code=2)
        except FileNotFoundError as e:
            err_console.print(f"[bold red]error:[/bold red] {e}", highlight=False)
            raise typer.Exit(code=2)

    return wrapper


def default_seed() -> int:
    """Seed used when neither --seed nor the config file names one; $MEDQA_SEED overrides 42."""
    raw = os.getenv(SEED_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}")


def load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    """Read a YAML or JSON mapping of RunConfig fields."""
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML/JSON: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping, got {type(data).__name__}")
    return data


def resolve_run_config(config_path: Optional[Path], command: str, train: Optional[Dict[str, Any]] = None, **overrides) -> RunConfig:
    """
    Defaults < config file < explicit command-line values (``None`` means not given).
    $MEDQA_SEED only replaces the built-in default seed.

    Args:
        config_path (Optional[Path]): ``--config`` file, possibly a previous config.json snapshot.
        command (str): Command being run; recorded in the snapshot.
        train (Optional[Dict[str, Any]]): Overrides for the nested TrainConfig.

    Returns:
        RunConfig: The resolved configuration.
    """
    data = load_config_file(config_path)
    data["command"] = command
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    train_data = dict(data.get("train") or {})
    for key, value in (train or {}).items():
        if value is not None:
            train_data[key] = value
    if train_data.get("seed") is None:
        train_data["seed"] = default_seed()
    data["train"] = train_data
    return RunConfig(**data)
