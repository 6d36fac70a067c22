"""Exception hierarchy shared by every riskscope module."""


class RiskscopeError(Exception):
    """Base class for all package errors."""


class ShapeError(RiskscopeError, ValueError):
    """Array dimensions do not agree."""


class SingularMatrixError(RiskscopeError, ArithmeticError):
    """Matrix is not symmetric positive definite (zero or negative pivot)."""


class ConvergenceError(RiskscopeError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class InsufficientDataError(RiskscopeError, ValueError):
    pass


class SchemaError(RiskscopeError, ValueError):
    pass


class CsvParseError(RiskscopeError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(RiskscopeError, ValueError):
    pass


class UnsupportedModelError(RiskscopeError, TypeError):
    """Operation needs coefficients or importances the estimator lacks."""


class CalibrationError(RiskscopeError, RuntimeError):
    """Perplexity bandwidth search could not bracket the target."""


class EmbeddingError(RiskscopeError, FloatingPointError):
    pass


class UndefinedMetricError(RiskscopeError, ValueError):
    """Metric is undefined for the input (constant truth, single cluster)."""


class PipelineError(RiskscopeError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
