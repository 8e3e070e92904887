"""Exception hierarchy.

Validation problems (bad matrices, bad config) derive from ``ValidationError``;
failures of the numerics derive from ``NumericalError``. The CLI maps the two
families to exit codes 1 and 2.
"""


class SecrecyRegionError(Exception):
    pass


class ValidationError(SecrecyRegionError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NonHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadCount(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class NumericalError(SecrecyRegionError, ArithmeticError):
    pass


class EvaluationError(NumericalError):
    """A per-sample function returned NaN."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularDenominator(NumericalError):
    pass


class SingularExpectation(NumericalError):
    pass


class NumericalConsistencyError(NumericalError):
    pass
