"""Exception types raised across the toolkit.

Every error callers are expected to catch derives from :class:`MtscError`.
The CLI maps these onto exit codes (config 2, data 3, numeric 4).
"""


class MtscError(Exception):
    """Base class for all toolkit errors."""


# --- configuration ---------------------------------------------------------

class ConfigError(MtscError):
    """Malformed run configuration (bad key, unparsable value, bad range)."""


# --- data ingestion / frame construction -----------------------------------

class DataError(MtscError):
    """Base class for input-data problems."""


class MissingColumn(DataError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"required column {column!r} not found")


class UnparsableCell(DataError):
    def __init__(self, row: int, column: str, value: str = ""):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"cell ({row}, {column!r}) does not parse: {value!r}")


class NonMonotonicTimestamps(DataError):
    """Duplicate timestamps remain after sorting."""


class NonPositivePrice(DataError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"price at index {index} is not strictly positive")


class EmptySeries(DataError):
    pass


class WindowTooLarge(DataError):
    pass


class OutOfRange(DataError):
    pass


class FrameInvariantViolation(DataError):
    """Series lengths differ, labels outside {-1,0,1}, or N < 2."""


class UnknownLabel(DataError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label {label!r} not in the declared class order")


class LengthMismatch(DataError):
    pass


# --- numerics --------------------------------------------------------------

class NumericError(MtscError):
    """Base class for numerical failures."""


class InvalidParams(NumericError):
    """Parameter set violates stationarity/positivity invariants."""


class DidNotConverge(NumericError):
    pass


class DegenerateInput(NumericError):
    pass


class DimensionMismatch(NumericError):
    pass


class ShapeMismatch(NumericError):
    pass


class TooFewSamples(NumericError):
    pass


class SingleClassInput(NumericError):
    pass


class SingularSystem(NumericError):
    pass


class DegenerateBatch(NumericError):
    """Batch normalisation asked to normalise a single element per channel."""


class InvalidP(NumericError):
    """Dropout probability outside [0, 1)."""


class BadTargetIndex(NumericError):
    pass


class ClassMismatch(NumericError):
    """Source and target datasets disagree on the label set."""


class ZeroVolatility(NumericError):
    """Sharpe ratio of a return series with zero standard deviation."""


class EmptyMatrix(NumericError):
    pass


class Asymmetric(NumericError):
    pass


class EmptyData(NumericError):
    pass


class FitFailure(NumericError):
    """A grid-search candidate failed on one fold; recorded, not fatal."""

    def __init__(self, candidate, fold: int, cause: Exception):
        self.candidate = candidate
        self.fold = fold
        self.cause = cause
        super().__init__(f"candidate {candidate} failed on fold {fold}: {cause}")
