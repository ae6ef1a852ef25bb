class FactCheckError(Exception):
    """Base class for every error raised by factcheck."""


class ValidationError(FactCheckError):
    """Input data violates a schema or a domain invariant."""


class ParseError(ValidationError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ConflictError(ValidationError):
    pass


class OntologyError(ValidationError):
    pass


class EvidenceLengthError(ValidationError):
    pass


class LabelError(ValidationError):
    pass


class DataError(ValidationError):
    pass


class NumericsError(FactCheckError):
    pass


class DimensionError(NumericsError):
    def __init__(self, op: str, *shapes):
        shown = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {shown}")


class EmptySequenceError(NumericsError):
    pass


class StaleTapeError(NumericsError):
    pass


class UninitializedGradientError(NumericsError):
    pass


class InputError(FactCheckError):
    pass


class TrainingDataError(FactCheckError):
    pass


class StartupError(FactCheckError):
    pass


class StageError(FactCheckError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
