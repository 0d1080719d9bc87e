import csv
import shutil
import threading
from pathlib import Path
from typing import List, Sequence, Union

import orjson
from loguru import logger

from src.core.errors import RunExistsError
from src.core.schemas.ComparisonRow import ComparisonRow
from src.core.schemas.CVSummary import CVSummary
from src.core.schemas.EpochMetrics import EpochMetrics
from src.core.schemas.RunConfig import RunConfig

METRICS_COLUMNS = ["variant", "fold", "epoch", "train_loss", "accuracy", "precision", "recall", "f1", "wall_time_s"]
COMPARISON_COLUMNS = ["variant", "accuracy", "precision", "recall", "f1", "time_s"]

CONFIG_FILE = "config.json"
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
SUMMARIES_FILE = "summaries.json"
COMPARISON_FILE = "comparison.csv"
CHECKPOINT_FILE = "model.mqf"
REPORT_DIR = "report"

ARTIFACTS = (CONFIG_FILE, METRICS_FILE, SUMMARY_FILE, SUMMARIES_FILE, COMPARISON_FILE, CHECKPOINT_FILE)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def dump_json(data) -> bytes:
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


class RunDirectory:
    """Output folder of one command run.

    Holds the resolved configuration snapshot, the append-only metrics CSV,
    summaries and the trained checkpoint.

    Attributes:
        path (Path): Folder on disk.
        force (bool): Replace artifacts of an earlier run instead of refusing.

    Examples:
    >>> run = RunDirectory("runs/base").create()
    >>> run.write_config(run_config)
    >>> run.append_epoch("mini-roberta-base", epoch_metrics)
    """

    def __init__(self, path: Union[str, Path], force: bool = False):
        self.path = Path(path)
        self.force = force
        self._lock = threading.Lock()

    @property
    def config_path(self) -> Path:
        return self.path / CONFIG_FILE

    @property
    def metrics_path(self) -> Path:
        return self.path / METRICS_FILE

    @property
    def checkpoint_path(self) -> Path:
        return self.path / CHECKPOINT_FILE

    @property
    def report_path(self) -> Path:
        return self.path / REPORT_DIR

    def existing_artifacts(self) -> List[Path]:
        found = [self.path / name for name in ARTIFACTS if (self.path / name).exists()]
        if self.report_path.exists():
            found.append(self.report_path)
        return found

    def create(self) -> "RunDirectory":
        """Create the folder and an empty metrics file.

        Raises:
            RunExistsError: A previous run left artifacts here and ``force`` is off.
        """
        existing = self.existing_artifacts()
        if existing and not self.force:
            raise RunExistsError(f"{self.path} already holds a run ({existing[0].name}); pass --force to overwrite")
        for artifact in existing:
            if artifact.is_dir():
                shutil.rmtree(artifact)
            else:
                artifact.unlink()
        self.path.mkdir(parents=True, exist_ok=True)
        with self.metrics_path.open("w", newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerow(METRICS_COLUMNS)
        logger.info(f"run directory {self.path}")
        return self

    def write_config(self, config: RunConfig) -> Path:
        """Snapshot the resolved configuration; it can be passed back as ``--config``."""
        self.config_path.write_bytes(dump_json(config.model_dump(mode="json")))
        return self.config_path

    def append_epoch(self, variant: str, record: EpochMetrics):
        """Append one metrics row. Floats are written with ``repr`` so they read back exactly."""
        m = record.validation
        row = [
            variant,
            record.fold,
            record.epoch,
            repr(float(record.train_loss)),
            repr(float(m.accuracy)),
            repr(float(m.precision)),
            repr(float(m.recall)),
            repr(float(m.f1)),
            f"{record.wall_time_s:.6f}",
        ]
        with self._lock, self.metrics_path.open("a", newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerow(row)

    def write_summary(self, summary: CVSummary) -> Path:
        path = self.path / SUMMARY_FILE
        path.write_bytes(dump_json(summary.model_dump(mode="json")))
        return path

    def write_comparison(self, summaries: Sequence[CVSummary], rows: Sequence[ComparisonRow]) -> Path:
        (self.path / SUMMARIES_FILE).write_bytes(dump_json([s.model_dump(mode="json") for s in summaries]))
        path = self.path / COMPARISON_FILE
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(COMPARISON_COLUMNS)
            for row in rows:
                writer.writerow([getattr(row, column) for column in COMPARISON_COLUMNS])
        return path
