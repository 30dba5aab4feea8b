"""Custom exceptions for gkz_integrality."""


class IntegralityError(Exception):
    """Base exception for gkz_integrality."""


class InvalidInputError(IntegralityError, ValueError):
    """Raised when an argument violates a documented precondition.

    Examples:
        - A prime argument that is not prime
        - An exponent vector with an entry outside [-1, 0]
        - beta_p(t, k) with k > t
    """


class NotPIntegralError(InvalidInputError):
    """Raised when p divides the denominator of a value that must be p-integral."""


class InvalidSpecError(InvalidInputError):
    """Raised when a classical series description fails one of its conditions."""


class ProblemFileError(InvalidInputError):
    """Raised when a problem file cannot be parsed.

    Attributes:
        line: 1-based line of a syntax error, if known.
        column: 1-based column of a syntax error, if known.
        field: Dotted path of the offending field, if known.
    """

    def __init__(self, message: str, *, line: int = 0, column: int = 0, field: str = "") -> None:
        self.line = line
        self.column = column
        self.field = field
        where = ""
        if line:
            where = f" (line {line}, column {column})"
        elif field:
            where = f" (field '{field}')"
        super().__init__(f"{message}{where}")


class InfeasibleError(IntegralityError):
    """Raised when a linear program has no feasible point (the target lies outside the cone)."""


class ResourceGuardError(IntegralityError):
    """Raised when an enumeration or modulus exceeds its configured guard."""


class ConsistencyError(IntegralityError):
    """Raised when two independent computations of the same quantity disagree."""


class PrefixError(IntegralityError):
    """Raised when a power series prefix is too short or not annihilated by its polynomial."""


class RecursionMismatchError(PrefixError):
    """Raised when the tail recursion does not reproduce the supplied coefficients."""
