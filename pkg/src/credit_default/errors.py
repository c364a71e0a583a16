class ConfigError(ValueError):
    """Invalid configuration or argument combination."""


class DataError(ValueError):
    """Input data violates a precondition."""


class IngestionError(DataError):
    pass


class EmptySelectionError(DataError):
    """Feature selection confirmed nothing, so the pipeline cannot proceed."""


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
