from typing import Optional


class MedQAError(Exception):
    """Base class for every error raised by the medqa package.

    Attributes:
        exit_code (int): Process exit code used by the command line when the
            error escapes a command. 1 for runtime failures, 2 for usage or
            configuration problems.
    """

    exit_code: int = 1


# --- numerics -----------------------------------------------------------------

class ShapeError(MedQAError, ValueError):
    """Operand shapes are incompatible."""


class NumericError(MedQAError, ArithmeticError):
    """A forward op produced NaN or Inf."""


class TapeError(MedQAError, RuntimeError):
    """The gradient tape was used incorrectly."""


class TargetIndexError(MedQAError, IndexError):
    """A class index is outside [0, num_labels)."""


# --- configuration --------------------------------------------------------------

class ConfigError(MedQAError, ValueError):
    exit_code = 2


class UsageError(MedQAError, ValueError):
    exit_code = 2


class RunExistsError(MedQAError):
    exit_code = 2


# --- datasets -------------------------------------------------------------------

class DatasetError(MedQAError):
    """Problem while parsing a primary or secondary CSV file."""

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class MissingHeaderError(DatasetError):
    pass


class ColumnCountError(DatasetError):
    pass


class EmptyFieldError(DatasetError):
    pass


class DuplicateLabelError(DatasetError):
    def __init__(self, label: str, path: Optional[str] = None, line: Optional[int] = None):
        self.label = label
        super().__init__(f"duplicate answer label {label!r}", path=path, line=line)


# --- checkpoints ----------------------------------------------------------------

class CheckpointError(MedQAError):
    pass


class BadMagicError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class ManifestError(CheckpointError):
    pass


# --- training -------------------------------------------------------------------

class TrainingDivergedError(MedQAError, ArithmeticError):
    pass


class FoldFailedError(MedQAError):
    def __init__(self, fold: int, cause: BaseException):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold} failed: {cause}")


# --- question answering ---------------------------------------------------------

class InputError(MedQAError, ValueError):
    pass


class UnmappedLabelError(MedQAError, KeyError):
    """The classifier predicted a label the answer bank does not contain."""

    exit_code = 2

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"predicted label {label!r} has no answer in the answer bank")

    def __str__(self) -> str:
        return self.args[0]


class ReportError(MedQAError):
    pass
