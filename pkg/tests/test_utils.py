"""Tests for exact rational helpers."""

from fractions import Fraction

import pytest
from gkz_integrality.exceptions import InvalidInputError
from gkz_integrality.utils import (
    combine,
    format_rational,
    format_vector,
    lcm_denominators,
    nullspace,
    primitive_integer_vector,
    rank,
    solve,
    to_fraction,
    to_vector,
)


def test_to_fraction_accepts_exact_values():
    """Integers, fractions and p/q strings."""
    assert to_fraction(3) == 3
    assert to_fraction("-1/2") == Fraction(-1, 2)
    assert to_fraction(" 4/6 ") == Fraction(2, 3)
    assert to_vector(["0", -1, Fraction(1, 3)]) == (0, -1, Fraction(1, 3))


@pytest.mark.parametrize("value", [0.5, "0.5", "1/", True, None, "1e3"])
def test_to_fraction_refuses_inexact_values(value):
    """Floats, decimals and junk are refused."""
    with pytest.raises(InvalidInputError):
        to_fraction(value)


def test_format_rational():
    """p/q, or p when integral."""
    assert format_rational(Fraction(-1, 2)) == "-1/2"
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_vector((0, Fraction(2, 3))) == ["0", "2/3"]


def test_lcm_and_primitive_vectors():
    """Denominator lcm and primitive scaling."""
    assert lcm_denominators([Fraction(1, 4), Fraction(5, 6)]) == 12
    assert lcm_denominators([]) == 1
    assert primitive_integer_vector([Fraction(1, 2), Fraction(-3, 4)]) == (2, -3)
    with pytest.raises(InvalidInputError):
        primitive_integer_vector([0, 0])


def test_linear_algebra():
    """Rank, nullspace and particular solutions over QQ."""
    rows = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    assert rank(rows, 2) == 1
    (kernel,) = nullspace(rows, 2)
    assert kernel[0] + 2 * kernel[1] == 0
    assert solve(rows, [Fraction(3), Fraction(6)], 2) == (3, 0)
    assert solve(rows, [Fraction(3), Fraction(5)], 2) is None
    assert combine([Fraction(1, 2), 2], [[2, 0], [1, 1]], 2) == (3, 2)
