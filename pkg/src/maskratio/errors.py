"""Exception hierarchy.

Everything derives from :class:`MaskRatioError`. The CLI maps
:class:`DataError` to exit status 1 and :class:`ConfigError` to 2.
"""


class MaskRatioError(Exception):
    pass


class DataError(MaskRatioError):
    """Bad or inconsistent input data."""


class ConfigError(MaskRatioError):
    """Invalid configuration or hyperparameters."""


# ingest
class MalformedHeader(DataError):
    pass


class NonMonotonicDates(DataError):
    pass


class BadValue(DataError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateFips(DataError):
    pass


class BadFractionSum(DataError):
    def __init__(self, fips, total):
        super().__init__(f"mask fractions for {fips} sum to {total:.4f}, outside 1 +/- 0.02")
        self.fips = fips
        self.total = total


class EmptyJoin(DataError):
    pass


# dataset
class TooShort(DataError):
    pass


class WindowOutOfRange(DataError):
    pass


class EmptyFit(DataError):
    pass


class ConstantInput(DataError):
    pass


class ZeroBaseline(DataError):
    pass


class EmptySamples(DataError):
    pass


class MissingLabel(DataError):
    pass


# learners
class SingleClass(DataError):
    pass


class KTooLarge(ConfigError):
    pass


class WidthMismatch(DataError):
    pass


class NotFitted(MaskRatioError):
    pass


# eval
class BadFraction(ConfigError):
    pass


class SingleClassStratify(DataError):
    pass


class EmptySpace(ConfigError):
    pass


class LengthMismatch(DataError):
    pass


class BadScore(DataError):
    pass
