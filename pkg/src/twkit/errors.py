"""Exception hierarchy shared across the package."""


class TwkitError(Exception):
    """Base class for all errors raised by twkit."""


class SchemaError(TwkitError):
    """A schema or attribute declaration violates its invariants."""


class DataError(TwkitError):
    """Input data (CSV rows, tables, specs) fails validation."""


class CodecError(TwkitError):
    """Encoded matrix and codec disagree (width, range, attribute set)."""


class TrainingDiverged(TwkitError):
    """A training loop produced a non-finite loss or parameter."""

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        if epoch is not None:
            message = f"{message} (epoch {epoch}, batch {batch})"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
