"""Tests for classical series and the step-function criterion."""

import random
from fractions import Fraction
from math import comb

import pytest
from gkz_integrality.classical import (
    RECOMBINATION_NOTE,
    ClassicalSpec,
    F_coefficient,
    classical_expand,
    cor57_check,
    factorial_ratio_spec,
    lattice_vector,
    prop514_crosscheck,
    thm56_check,
    xi_eval,
    xi_grid_minimum,
    xi_minimum,
)
from gkz_integrality.exceptions import InvalidInputError, InvalidSpecError

HALF = Fraction(1, 2)
GAUSS = ClassicalSpec(((1,), (1,)), ((1,), (1,)), (HALF, HALF), (1, 1))
THIRD_OVER_HALF = ClassicalSpec(((1,),), ((1,),), (Fraction(1, 3),), (HALF,))
BINOMIAL = factorial_ratio_spec([(1, 1)], [(1, 0), (0, 1)])
INVERSE_BINOMIAL = factorial_ratio_spec([(1, 0), (0, 1)], [(1, 1)])


class TestSpec:
    """Validation of classical data."""

    def test_dimensions(self):
        """r, J, K and D."""
        assert (GAUSS.r, GAUSS.J, GAUSS.K, GAUSS.D) == (1, 2, 2, 2)
        assert BINOMIAL.D == 1
        assert THIRD_OVER_HALF.D == 6

    def test_column_sums_must_match(self):
        """sum C_j = sum D_k."""
        with pytest.raises(InvalidSpecError):
            ClassicalSpec(((2,),), ((1,),), (1,), (1,))

    def test_parameters_in_unit_interval(self):
        """theta and sigma lie in (0, 1]."""
        with pytest.raises(InvalidSpecError):
            ClassicalSpec(((1,),), ((1,),), (0,), (1,))
        with pytest.raises(InvalidSpecError):
            ClassicalSpec(((1,),), ((1,),), (1,), (Fraction(3, 2),))

    def test_denominator_must_clear(self):
        """An explicit D must be a multiple of the natural one."""
        with pytest.raises(InvalidSpecError):
            ClassicalSpec(GAUSS.c, GAUSS.d, GAUSS.thetas, GAUSS.sigmas, 3)
        assert ClassicalSpec(GAUSS.c, GAUSS.d, GAUSS.thetas, GAUSS.sigmas, 4).D == 4

    def test_zero_form(self):
        """Every form must involve a variable."""
        with pytest.raises(InvalidSpecError):
            ClassicalSpec(((1, 0), (0, 0)), ((1, 0),), (1, 1), (1,))


class TestCoefficients:
    """F_coefficient and expansions."""

    def test_gauss(self):
        """((1/2)_m / m!)^2."""
        assert F_coefficient(GAUSS, (0,)) == 1
        assert F_coefficient(GAUSS, (1,)) == Fraction(1, 4)
        assert F_coefficient(GAUSS, (2,)) == Fraction(9, 64)

    def test_binomial(self):
        """(m + n)!/(m! n!)."""
        assert F_coefficient(BINOMIAL, (2, 1)) == 3
        for m in range(8):
            for n in range(8):
                assert F_coefficient(BINOMIAL, (m, n)) == comb(m + n, m)

    def test_negative_exponent(self):
        """m must be a nonnegative vector of length r."""
        with pytest.raises(InvalidInputError):
            F_coefficient(GAUSS, (-1,))
        with pytest.raises(InvalidInputError):
            F_coefficient(GAUSS, (1, 1))

    def test_lattice_vector(self):
        """(-m, -C(m), D(m), m)."""
        assert lattice_vector(GAUSS, (3,)) == (-3, -3, -3, 3, 3, 3)
        assert lattice_vector(BINOMIAL, (1, 2)) == (-1, -2, -3, 1, 2, 1, 2)

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_gauss_integral_away_from_two(self, p):
        """The first 50 coefficients are p-integral for odd p."""
        terms = classical_expand(GAUSS, p, 49)
        assert len(terms) == 50
        assert all(term.valuation >= 0 for term in terms)

    def test_gauss_at_two(self):
        """ord_2 of the m = 1 coefficient 1/4 is -2."""
        terms = classical_expand(GAUSS, 2, 3)
        assert terms[1].coefficient == Fraction(1, 4)
        assert terms[1].valuation == -2


class TestStepFunction:
    """xi and its exact minimum."""

    def test_values(self):
        """xi at a few points."""
        assert xi_eval(GAUSS.thetas, GAUSS.sigmas, GAUSS, [HALF]) == 2
        assert xi_eval(GAUSS.thetas, GAUSS.sigmas, GAUSS, [0]) == 0
        assert xi_eval((1, 1), (1,), INVERSE_BINOMIAL, [HALF, HALF]) == -1

    def test_point_outside_unit_cube(self):
        """x must lie in [0, 1)^r."""
        with pytest.raises(InvalidInputError):
            xi_eval(GAUSS.thetas, GAUSS.sigmas, GAUSS, [1])

    def test_sweep(self):
        """One variable: the Gauss xi has minimum 0 at 0."""
        found = xi_minimum(GAUSS.thetas, GAUSS.sigmas, GAUSS)
        assert found.minimum == 0
        assert found.method == "sweep"
        assert xi_grid_minimum(GAUSS.thetas, GAUSS.sigmas, GAUSS, 8).minimum == 0

    def test_sweep_negative(self):
        """theta' = 2/3, sigma' = 1/2 reaches -1."""
        found = xi_minimum((Fraction(2, 3),), (HALF,), THIRD_OVER_HALF)
        assert found.minimum == -1
        assert xi_eval((Fraction(2, 3),), (HALF,), THIRD_OVER_HALF, found.minimizer) == -1

    def test_lattice_binomial(self):
        """Two variables: floor(x + y) - floor(x) - floor(y) has minimum 0."""
        found = xi_minimum(BINOMIAL.thetas, BINOMIAL.sigmas, BINOMIAL)
        assert found.minimum == 0
        assert found.method == "lattice"

    def test_lattice_inverse_binomial(self):
        """The inverse ratio reaches -1 and the minimizer is exhibited."""
        found = xi_minimum(INVERSE_BINOMIAL.thetas, INVERSE_BINOMIAL.sigmas, INVERSE_BINOMIAL)
        assert found.minimum == -1
        assert len(found.minimizer) == 2
        assert all(0 <= x < 1 for x in found.minimizer)
        assert xi_eval((1, 1), (1,), INVERSE_BINOMIAL, found.minimizer) == -1

    def test_grid_is_an_upper_bound(self):
        """The grid never goes below the exact minimum."""
        exact = xi_minimum(INVERSE_BINOMIAL.thetas, INVERSE_BINOMIAL.sigmas, INVERSE_BINOMIAL)
        grid = xi_grid_minimum(INVERSE_BINOMIAL.thetas, INVERSE_BINOMIAL.sigmas,
                               INVERSE_BINOMIAL, 4)
        assert grid.minimum >= exact.minimum


class TestResidueClasses:
    """Integrality per class of primes modulo D."""

    def test_gauss(self):
        """All primes not dividing 2."""
        result = cor57_check(GAUSS)
        assert result.holds
        assert [check.h for check in result.classes] == [1]
        assert result.note == RECOMBINATION_NOTE
        assert not result.failing

    def test_failing_class(self):
        """(1/3)_m / (1/2)_m fails for primes congruent to 5 modulo 6."""
        result = cor57_check(THIRD_OVER_HALF)
        assert not result.holds
        assert result.note is None
        assert [check.h for check in result.failing] == [5]
        check = thm56_check(THIRD_OVER_HALF, 5)
        assert check.period == 2
        assert check.steps[1].thetas == (Fraction(2, 3),)
        assert check.steps[1].minimum == -1
        assert any(term.valuation < 0 for term in classical_expand(THIRD_OVER_HALF, 5, 5))

    def test_threads(self):
        """Parallel classes give the same result."""
        assert cor57_check(THIRD_OVER_HALF, threads=2) == cor57_check(THIRD_OVER_HALF)

    def test_unit_required(self):
        """h must be prime to D."""
        with pytest.raises(InvalidInputError):
            thm56_check(GAUSS, 2)

    def test_landau(self):
        """Verdicts match divisibility for m + n <= 40."""
        assert cor57_check(BINOMIAL).holds
        assert not cor57_check(INVERSE_BINOMIAL).holds
        integral = all(F_coefficient(BINOMIAL, (m, n)).denominator == 1
                       for m in range(41) for n in range(41 - m))
        inverse = all(F_coefficient(INVERSE_BINOMIAL, (m, n)).denominator == 1
                      for m in range(41) for n in range(41 - m))
        assert integral and not inverse


class TestCrossCheck:
    """Lattice-coset equality against the xi sweep."""

    def test_gauss(self):
        """Both sides pass for the Gauss series."""
        check = prop514_crosscheck(GAUSS, 0, 3)
        assert check.lattice_side and check.xi_side
        assert check.expected == 2
        assert check

    def test_failing_side(self):
        """Both sides fail for (1/3)_m / (1/2)_m at p = 5, mu = 1."""
        check = prop514_crosscheck(THIRD_OVER_HALF, 1, 5)
        assert not check.xi_side
        assert check.agree

    def test_refusals(self):
        """One variable and p prime to D are required."""
        with pytest.raises(InvalidInputError):
            prop514_crosscheck(BINOMIAL, 0, 3)
        with pytest.raises(InvalidInputError):
            prop514_crosscheck(GAUSS, 0, 2)

    def test_random_specs_agree(self):
        """Random one-variable specs: both verdicts coincide."""
        random.seed(57)
        primes = (2, 3, 5, 7, 11, 13)
        for _ in range(40):
            c = tuple((random.randint(1, 4),) for _ in range(random.randint(1, 2)))
            total = sum(row[0] for row in c)
            if total == 1 or (total <= 4 and random.random() < 0.5):
                d = [(total,)]
            else:
                first = random.randint(max(1, total - 4), min(4, total - 1))
                d = [(first,), (total - first,)]
            big_d = random.randint(1, 12)
            thetas = tuple(Fraction(random.randint(1, big_d), big_d) for _ in c)
            sigmas = tuple(Fraction(random.randint(1, big_d), big_d) for _ in d)
            spec = ClassicalSpec(c, tuple(d), thetas, sigmas)
            p = random.choice([q for q in primes if spec.D % q])
            assert prop514_crosscheck(spec, random.randint(0, 3), p).agree
