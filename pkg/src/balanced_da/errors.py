"""Exception hierarchy."""


class BDAError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(BDAError, ValueError):
    pass


class EmptyDomain(BDAError, ValueError):
    pass


class BadLabel(BDAError, ValueError):
    pass


class NonFiniteFeatures(BDAError, ValueError):
    pass


class InvalidConfig(BDAError, ValueError):
    pass


class NonpositiveGamma(InvalidConfig):
    pass


class NotPositiveDefinite(BDAError, ArithmeticError):
    pass


class RankDeficientB(BDAError, ArithmeticError):
    """The constraint matrix cannot support the requested number of directions."""


class KTooLarge(BDAError, ValueError):
    pass


class LengthMismatch(BDAError, ValueError):
    pass


class ParseError(BDAError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class RaggedRows(ParseError):
    pass
