"""Exception hierarchy shared by all qbde modules."""


class QbdeError(Exception):
    """Base class for every error raised by this package."""


class CapacityError(QbdeError, ValueError):
    """Requested register is larger (or smaller) than the simulator supports."""


class QubitIndexError(QbdeError, IndexError):
    pass


class ShapeError(QbdeError, ValueError):
    pass


class BindingError(QbdeError, ValueError):
    """A circuit was bound with the wrong number of values, or not at all."""


class OptimizationError(QbdeError, RuntimeError):
    pass


class DivergenceError(QbdeError, RuntimeError):
    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class ParseError(QbdeError, ValueError):
    """SMILES parse failure; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class IngestionError(QbdeError, OSError):
    pass


class ConfigurationError(QbdeError, ValueError):
    pass


class UndefinedMetricError(QbdeError, ValueError):
    pass


class RecordError(QbdeError, ValueError):
    """A bond record that cannot be featurized; names the record."""

    def __init__(self, record_id, reason: str, message: str):
        self.record_id = record_id
        self.reason = reason
        super().__init__(f"record {record_id}: {message}")
