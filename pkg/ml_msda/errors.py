"""Named failures raised across the package.

Each class derives from the built-in exception a caller would already be catching, so
``except ValueError`` keeps working around code that predates these names.
"""


class DimensionError(ValueError):
    """A tensor operand has the wrong shape for the requested operation."""


class NumericError(ArithmeticError):
    """A computation produced (or would produce) a non-finite value."""

    def __init__(self, message: str, components: dict[str, float] | None = None):
        super().__init__(message)
        self.components = components or {}


class ConfigError(ValueError):
    """A run configuration is missing, malformed or holds invalid values."""


class DatasetFormatError(ValueError):
    """A dataset file is truncated, malformed or internally inconsistent."""


class DatasetVersionError(DatasetFormatError):
    """A dataset file was written with an unsupported format version."""


class CheckpointError(ValueError):
    """A checkpoint file is malformed or has an unsupported version."""


class CompatibilityError(ValueError):
    """A checkpoint and a dataset disagree on classes, input width or source count."""


class TrainingDivergedError(RuntimeError):
    """The training objective became non-finite."""

    def __init__(self, message: str, *, epoch: int, step: int, components: dict[str, float]):
        details = ", ".join(f"{key}={value!r}" for key, value in components.items())
        super().__init__(f"{message} (epoch={epoch}, step={step}, {details})")
        self.epoch = epoch
        self.step = step
        self.components = components
