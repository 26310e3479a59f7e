"""Exception hierarchy. Each class carries the CLI exit code for its error class."""

from __future__ import annotations

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RANK = 3
EXIT_CONFIG = 4
EXIT_NUMERICAL = 5


class RecdiagError(Exception):
    exit_code = EXIT_NUMERICAL


class ParseError(RecdiagError, ValueError):
    exit_code = EXIT_PARSE

    def __init__(self, message: str, row: int | None = None, col: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"column {col!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.col = col


class MissingResponse(ParseError):
    pass


class ConfigError(RecdiagError, ValueError):
    exit_code = EXIT_CONFIG


class DimensionMismatch(ConfigError):
    pass


class TooLargeForExhaustive(ConfigError):
    pass


class PositionsOutOfRange(ConfigError):
    pass


class UnknownRowId(ConfigError):
    pass


class NoRoot(ConfigError):
    pass


class RankDeficient(RecdiagError, ArithmeticError):
    exit_code = EXIT_RANK


class PrefixRankDeficient(RankDeficient):
    """A prefix of a permutation does not give a full-rank design."""

    def __init__(self, step: int, subset_size: int, perm_id: int | None = None):
        self.step = step
        self.subset_size = subset_size
        self.perm_id = perm_id
        msg = f"prefix of size {subset_size} (step {step}) is rank deficient"
        if perm_id is not None:
            msg = f"permutation {perm_id}: {msg}"
        super().__init__(msg)


class NumericalError(RecdiagError, ArithmeticError):
    exit_code = EXIT_NUMERICAL


class NotPositiveDefinite(NumericalError):
    pass


class SingularInformation(NumericalError):
    pass


class LeverageOne(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass
