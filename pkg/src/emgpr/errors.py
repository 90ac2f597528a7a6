"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (a bad spec, preset or
hyperparameter) and ``DataError`` (the data itself is malformed or unusable).
The CLI maps them to exit codes 1 and 2.
"""


class EmgprError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EmgprError, ValueError):
    pass


class DataError(EmgprError, ValueError):
    pass


class SpecError(ValidationError):
    """Invalid WindowSpec, AggregationSpec, SyntheticSpec, SplitSpec or config."""


class HyperparameterError(ValidationError):
    pass


class FormatError(DataError):
    """CSV structure problem (header, column count, sample index)."""


class ParseError(DataError):
    """A field could not be parsed as a number."""


class ChannelCountError(DataError):
    pass


class InputTooShortError(DataError):
    pass


class WindowTooShortError(DataError):
    pass


class FeatureInputError(DataError):
    pass


class ShapeError(DataError):
    pass


class SplitError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class DegenerateDataError(DataError):
    pass


class LabelError(DataError):
    pass
