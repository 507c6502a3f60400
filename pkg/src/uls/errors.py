"""Exception hierarchy.

Input problems and numerical problems are kept on separate branches so the
CLI can map them onto distinct exit codes.
"""


class UlsError(Exception):
    """Base class for every error raised by this package."""


class InputError(UlsError, ValueError):
    """Malformed or inconsistent user input."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class DimensionError(InputError):
    pass


class ConfigError(InputError):
    pass


class PreconditionFailed(InputError):
    pass


class NumericalError(UlsError, ArithmeticError):
    """A computation could not be carried out at the requested tolerance."""


class RankDeficient(NumericalError):
    pass


class NotInvertible(NumericalError):
    pass


class NotDiagonalizable(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass
