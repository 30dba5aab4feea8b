"""Tests for coefficients, valuations and integrality certificates."""

import random
from fractions import Fraction
from itertools import islice

import pytest
from gkz_integrality.arith import weight_w_p, wt_p
from gkz_integrality.classical import ClassicalSpec, build_configuration
from gkz_integrality.constants import INTEGRAL_CERTIFIED, UNBOUNDED_CERTIFIED, UNDECIDED
from gkz_integrality.exceptions import (
    InvalidInputError,
    NotPIntegralError,
    ResourceGuardError,
)
from gkz_integrality.geometry import lower_bound_thm46
from gkz_integrality.lattice import Configuration, enumerate_Lv
from gkz_integrality.series import (
    SearchParams,
    analyze,
    coefficient,
    expand,
    residue_transfer,
    transfer_check,
    unbounded_family,
    valuation_by_formula,
    verify_hypergeometric_system,
)

HALF = Fraction(1, 2)
LINE = Configuration(((1,), (2,)))
PAIR = Configuration(((1,), (1,)))
GAUSS = ClassicalSpec(((1,), (1,)), ((1,), (1,)), (HALF, HALF), (1, 1))


class TestCoefficients:
    """[v]_l and its valuation."""

    def test_unbounded_example(self):
        """v = (-1, 0), l = (-2k, k): (2k)!/k! with pi^(-k)."""
        term = coefficient((-1, 0), (-4, 2), 3)
        assert term.coefficient == 12
        assert term.pi_exponent == -2
        assert term.valuation == 0

    def test_integral_example(self):
        """v = (0, -1/2), l = (2m, -m): (-1)^m / (4^m m!)."""
        term = coefficient((0, -HALF), (6, -3), 3)
        assert term.coefficient == Fraction(-1, 64 * 6)
        assert term.valuation == HALF

    def test_support_change_is_refused(self):
        """l must keep nsupp(v + l) = nsupp(v)."""
        with pytest.raises(InvalidInputError):
            coefficient((-1, 0), (2, -1))

    def test_relation_is_checked(self):
        """With a configuration, l must be a relation."""
        with pytest.raises(InvalidInputError):
            coefficient((-1, 0), (-1, 1), cfg=LINE)

    @pytest.mark.parametrize("j", range(1, 7))
    def test_valuations_along_repunits(self, j):
        """At k = (3^j - 1)/2 the term of v = (-1, 0) has valuation -j/2."""
        k = (3**j - 1) // 2
        l = (-2 * k, k)  # noqa: E741
        assert coefficient((-1, 0), l, 3).valuation == Fraction(-j, 2)
        assert valuation_by_formula((-1, 0), l, 3).value == Fraction(-j, 2)


class TestValuationFormula:
    """Digit-sum valuations against factorization."""

    def test_examples(self):
        """Known values."""
        assert valuation_by_formula((-1, 0), (-8, 4), 3).value == -1
        assert valuation_by_formula((0, -HALF), (6, -3), 3).value == HALF

    def test_boxed_form_is_reported(self):
        """Boxed v also gets the orbit form."""
        result = valuation_by_formula((0, -HALF), (6, -3), 3)
        assert result.boxed_value == result.value
        assert result.boxed_b >= 1

    def test_unboxed_vectors(self):
        """v outside the box has only the truncation form."""
        result = valuation_by_formula((2, Fraction(-5, 2)), (-2, 1), 3)
        assert result.boxed_value is None
        assert result.value == coefficient((2, Fraction(-5, 2)), (-2, 1), 3).valuation

    def test_not_p_integral(self):
        """p in a denominator is refused."""
        with pytest.raises(NotPIntegralError):
            valuation_by_formula((0, -HALF), (2, -1), 2)

    def test_random_equivalence(self):
        """Formula and factorization agree on random (v, l, p)."""
        gauss_cfg, _, _ = build_configuration(GAUSS)
        configurations = [
            LINE,
            PAIR,
            Configuration(((1, 0), (0, 1), (1, 1))),
            Configuration.from_vectors([(2, 0, 1), (1, 1, 1), (0, 2, 1)]),
            Configuration(((1,), (2,), (3,))),
            gauss_cfg,
        ]
        random.seed(2024)
        checked = 0
        while checked < 600:
            cfg = random.choice(configurations)
            p = random.choice((2, 3, 5, 7, 11))
            q = random.choice([d for d in range(1, 10) if d % p])
            v = tuple(Fraction(random.randint(-3 * q, 2 * q), q) for _ in range(cfg.N))
            for l in islice(enumerate_Lv(cfg, v, 3), 12):  # noqa: E741
                formula = valuation_by_formula(v, l, p)
                assert formula.value == coefficient(v, l, p).valuation
                checked += 1


class TestExpansion:
    """Truncated expansions of Phi_{v,pi}."""

    def test_integral_expansion(self):
        """Terms of v = (0, -1/2) at p = 3 have valuation wt_3(m)/2."""
        terms = expand(LINE, (0, -HALF), 3, 60)
        assert len(terms) == 61
        for term in terms:
            m = abs(term.l[1])
            assert term.valuation == Fraction(wt_p(m, 3), 2)
            assert term.valuation >= 0

    def test_unbounded_expansion(self):
        """Terms of v = (-1, 0) at p = 3 reach negative valuations."""
        terms = expand(LINE, (-1, 0), 3, 20)
        assert min(term.valuation for term in terms) < 0

    def test_length_mismatch(self):
        """v must have N entries."""
        with pytest.raises(InvalidInputError):
            expand(LINE, (0,), 3, 5)


class TestAnalyze:
    """Certificates for A = {1, 2} and A = {1, 1}."""

    def test_integral_certificate(self):
        """v = (0, -1/2), p = 3: w_3(v) = 1 = bound."""
        cert = analyze(LINE, (0, -HALF), 3)
        assert cert.status == INTEGRAL_CERTIFIED
        assert cert.is_integral
        assert cert.w_p_v == 1
        assert cert.lower_bound == 1
        assert cert.witness is None
        assert all(cert.per_mu_equalities)

    def test_unbounded_certificate(self):
        """v = (-1, 0), p = 3: witness (0, -1/2) at b = 1."""
        cert = analyze(LINE, (-1, 0), 3, SearchParams(max_b_multiplier=2, box_radius=5))
        assert cert.status == UNBOUNDED_CERTIFIED
        assert cert.w_p_v == 2
        assert cert.lower_bound == 1
        assert cert.witness.r == (0, -HALF)
        assert cert.witness.b == 1
        assert cert.witness.l == (-2, 1)
        assert cert.witness.weight == 1
        assert cert.b_values == (1, 2)
        assert cert.residue_class.modulus == 2
        assert cert.residue_class.residue == 1
        assert cert.per_mu_equalities == (False,)

    def test_undecided_without_search_room(self):
        """A box of radius 0 cannot find the witness."""
        cert = analyze(LINE, (-1, 0), 3, SearchParams(box_radius=0))
        assert cert.status == UNDECIDED
        assert cert.lower_bound == 1 and cert.w_p_v == 2
        assert cert.search_bounds.box_radius == 0

    def test_box_guard(self):
        """A box larger than the guard is refused."""
        with pytest.raises(ResourceGuardError):
            analyze(LINE, (-1, 0), 3, SearchParams(box_radius=5, guard=5))

    def test_threads_agree(self):
        """The verdict does not depend on the thread count."""
        one = analyze(LINE, (-1, 0), 5)
        four = analyze(LINE, (-1, 0), 5, SearchParams(threads=4))
        assert one.status == four.status
        assert one.witness == four.witness
        assert one.lower_bound == four.lower_bound

    @pytest.mark.parametrize("p", [2, 5, 7, 11])
    def test_thirds(self, p):
        """A = {1, 1}, v = (-1/3, -2/3) is integral wherever 3 is a unit."""
        cert = analyze(PAIR, (Fraction(-1, 3), Fraction(-2, 3)), p)
        assert cert.status == INTEGRAL_CERTIFIED
        assert cert.w_p_v == p - 1

    def test_rejects_unboxed(self):
        """v must be boxed."""
        with pytest.raises(InvalidInputError):
            analyze(LINE, (1, 0), 3)
        with pytest.raises(NotPIntegralError):
            analyze(LINE, (0, -HALF), 2)

    def test_bound_never_exceeds_weight(self):
        """The lattice-coset bound is at most w_p(v) on random inputs."""
        random.seed(99)
        for _ in range(40):
            n = random.randint(1, 2)
            big_n = random.randint(1, 4)
            columns = []
            while len(columns) < big_n:
                col = tuple(random.randint(0, 3) for _ in range(n))
                if any(col):
                    columns.append(col)
            cfg = Configuration(tuple(columns))
            p = random.choice((2, 3, 5))
            q = random.choice([d for d in range(1, 5) if d % p])
            v = tuple(Fraction(-random.randint(0, q), q) for _ in range(big_n))
            bound = lower_bound_thm46(cfg, v, p)
            assert bound.bound <= weight_w_p(v, p).weight


class TestFamilies:
    """Witness families and residue classes."""

    def test_family_predictions(self):
        """l^(1) = (-2, 1), l^(2) = (-8, 4) and valuation -c/2 for c = 1..6."""
        family = list(islice(unbounded_family((-1, 0), (0, -HALF), 3), 6))
        assert family[0].l == (-2, 1)
        assert family[1].l == (-8, 4)
        assert [member.predicted for member in family] == [Fraction(-c, 2) for c in range(1, 7)]
        for member in family:
            assert coefficient((-1, 0), member.l, 3).valuation == member.predicted

    def test_residue_statement(self):
        """The unbounded verdict covers all odd primes."""
        cert = analyze(LINE, (-1, 0), 3)
        transfer = residue_transfer(cert)
        assert transfer.statement == "unbounded for all primes ≡ 1 (mod 2)"
        assert residue_transfer(cert, 2).residue_class.modulus == 2

    def test_integral_statement(self):
        """The integral verdict also transfers."""
        cert = analyze(LINE, (0, -HALF), 3)
        assert residue_transfer(cert).statement == "integral for all primes ≡ 1 (mod 2)"

    def test_bad_modulus(self):
        """The modulus must clear the denominators and be prime to p."""
        cert = analyze(LINE, (-1, 0), 3)
        with pytest.raises(InvalidInputError):
            residue_transfer(cert, 3)
        undecided = analyze(LINE, (-1, 0), 3, SearchParams(box_radius=0))
        with pytest.raises(InvalidInputError):
            residue_transfer(undecided)

    @pytest.mark.parametrize("prime", [5, 7, 11])
    def test_transfer_to_other_primes(self, prime):
        """The witness stays lighter at every prime of the class."""
        cert = analyze(LINE, (-1, 0), 3)
        assert transfer_check(LINE, cert, prime)
        assert weight_w_p(cert.witness.r, prime).weight < weight_w_p(cert.v, prime).weight

    def test_integral_transfer(self):
        """The integral verdict re-verifies at p = 5."""
        cert = analyze(LINE, (0, -HALF), 3)
        assert transfer_check(LINE, cert, 5)

    def test_prime_outside_class(self):
        """p = 2 is not odd."""
        cert = analyze(LINE, (-1, 0), 3)
        with pytest.raises(InvalidInputError):
            transfer_check(LINE, cert, 2)


class TestHypergeometricSystem:
    """Box and Euler operators applied to truncations."""

    def test_line(self):
        """Phi_v for A = {1, 2}, v = (-1, 0) is annihilated."""
        check = verify_hypergeometric_system(LINE, (-1, 0), 20)
        assert check.passed
        assert check.box_checked > 0
        assert check.euler_checked == 21

    def test_gauss(self):
        """The Gauss series is annihilated."""
        cfg, v, _ = build_configuration(GAUSS)
        check = verify_hypergeometric_system(cfg, v, 20)
        assert check
        assert check.box_checked > 0

    def test_non_minimal_support_fails(self):
        """A = {1, 1}, v = (-1, 1) has a boundary monomial that survives."""
        check = verify_hypergeometric_system(PAIR, (-1, 1), 10)
        assert not check.passed
        assert check.failure is not None

    def test_length_mismatch(self):
        """v must have N entries."""
        with pytest.raises(InvalidInputError):
            verify_hypergeometric_system(LINE, (0, 0, 0), 5)
