"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class TcnCwsError(Exception):
    pass


class DimensionError(TcnCwsError, ValueError):
    pass


class DomainError(TcnCwsError, ValueError):
    pass


class VocabularyError(TcnCwsError, IndexError):
    pass


class ConfigError(TcnCwsError, ValueError):
    pass


class IngestionError(TcnCwsError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EvaluationError(TcnCwsError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeasurementError(TcnCwsError, ValueError):
    pass


class TrainingError(TcnCwsError, RuntimeError):
    pass


class CheckpointError(TcnCwsError, ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
