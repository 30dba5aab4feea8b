"""Exact rational helpers shared across gkz_integrality.

Scalars are ``fractions.Fraction`` throughout. Elimination (rank, nullspace,
particular solutions) is delegated to ``sympy.polys.matrices.DomainMatrix``
over ``QQ``; nothing in here touches floating point.
"""

import math
import re
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from gkz_integrality.exceptions import InvalidInputError

RationalLike = Union[int, str, Fraction]
Vector = Tuple[Fraction, ...]
IntVector = Tuple[int, ...]

_RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(/\d+)?$")


# --- Parsing and formatting ---

def to_fraction(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats and decimal strings are refused so that every value stays exact.

    Args:
        value: The value to convert.

    Returns:
        The exact rational value.

    Raises:
        InvalidInputError: If the value is not an exact rational.

    Examples:
        >>> to_fraction("-1/2")
        Fraction(-1, 2)
        >>> to_fraction(3)
        Fraction(3, 1)
    """
    if isinstance(value, bool):
        raise InvalidInputError(f"Expected a rational, got boolean {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_PATTERN.match(text):
            raise InvalidInputError(f"Expected a rational of the form 'p/q', got {value!r}")
        result = Fraction(text)
        return result
    raise InvalidInputError(f"Expected a rational, got {type(value).__name__} {value!r}")


def to_vector(values: Sequence[RationalLike]) -> Vector:
    """Convert a sequence of rationals to a tuple of Fractions."""
    return tuple(to_fraction(x) for x in values)


def format_rational(value: Union[int, Fraction]) -> str:
    """Format a rational as ``"p/q"`` (or ``"p"`` when integral).

    Examples:
        >>> format_rational(Fraction(-1, 2))
        '-1/2'
        >>> format_rational(Fraction(4, 2))
        '2'
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_vector(values: Sequence[Union[int, Fraction]]) -> List[str]:
    """Format every entry of a vector with :func:`format_rational`."""
    return [format_rational(x) for x in values]


# --- Scalar and vector arithmetic ---

def lcm_denominators(values: Sequence[Fraction]) -> int:
    """Return the least common multiple of the denominators (1 for an empty sequence)."""
    return reduce(math.lcm, (Fraction(x).denominator for x in values), 1)


def is_integral_vector(values: Sequence[Fraction]) -> bool:
    """Return True if every entry is an integer."""
    return all(Fraction(x).denominator == 1 for x in values)


def primitive_integer_vector(values: Sequence[Fraction]) -> IntVector:
    """Scale a nonzero rational vector to the primitive integer vector on the same ray."""
    scale = lcm_denominators(values)
    ints = [int(Fraction(x) * scale) for x in values]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        raise InvalidInputError("Cannot normalize the zero vector")
    return tuple(x // g for x in ints)


def dot(u: Sequence[Fraction], w: Sequence[Fraction]) -> Fraction:
    """Exact inner product."""
    return sum((Fraction(x) * y for x, y in zip(u, w)), Fraction(0))


def combine(coefficients: Sequence[Fraction], vectors: Sequence[Sequence[Fraction]],
            dimension: int) -> Vector:
    """Return sum(coefficients[i] * vectors[i]) as a vector of the given dimension."""
    total = [Fraction(0)] * dimension
    for c, vec in zip(coefficients, vectors):
        if c:
            for k in range(dimension):
                total[k] += c * vec[k]
    return tuple(total)


# --- Linear algebra over QQ ---

def _domain_matrix(rows: Sequence[Sequence[Fraction]], ncols: int) -> DomainMatrix:
    data = [[QQ(Fraction(x).numerator, Fraction(x).denominator) for x in row] for row in rows]
    return DomainMatrix(data, (len(rows), ncols), QQ)


def _fraction_rows(matrix: DomainMatrix) -> List[List[Fraction]]:
    nrows, ncols = matrix.shape
    if nrows == 0 or ncols == 0:
        return [[] for _ in range(nrows)]
    m = matrix.to_Matrix()
    return [[Fraction(int(m[i, j].p), int(m[i, j].q)) for j in range(ncols)]
            for i in range(nrows)]


def rank(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    """Rank of a rational matrix given by rows."""
    if not rows or ncols == 0:
        return 0
    return int(_domain_matrix(rows, ncols).rank())


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[Vector]:
    """Return a basis of the right nullspace {x : rows . x = 0}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    basis = _domain_matrix(rows, ncols).nullspace()
    return [tuple(row) for row in _fraction_rows(basis)]


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction],
          ncols: int) -> Optional[Vector]:
    """Return one solution of rows . x = rhs, or None if the system is inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    if not rows:
        return tuple(Fraction(0) for _ in range(ncols))
    augmented = [list(row) + [Fraction(b)] for row, b in zip(rows, rhs)]
    reduced, pivots = _domain_matrix(augmented, ncols + 1).rref()
    if ncols in pivots:
        return None
    table = _fraction_rows(reduced)
    solution = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        solution[col] = table[i][ncols]
    return tuple(solution)
