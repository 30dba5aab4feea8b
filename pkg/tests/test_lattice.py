"""Tests for configurations, the relation lattice and negative supports."""

import logging
import random
from fractions import Fraction

import pytest
from gkz_integrality.classical import ClassicalSpec, build_configuration, lattice_vector
from gkz_integrality.constants import MINIMAL, MINIMAL_WITHIN_BOUND, NOT_MINIMAL
from gkz_integrality.exceptions import InvalidInputError, ResourceGuardError
from gkz_integrality.lattice import (
    Configuration,
    enumerate_Lv,
    graded_coefficients,
    group_ZA,
    integer_kernel,
    kernel_basis,
    minimal_negative_support_check,
    nsupp,
)

GAUSS = ClassicalSpec(((1,), (1,)), ((1,), (1,)), (Fraction(1, 2), Fraction(1, 2)), (1, 1))


def _line(*values):
    return Configuration(tuple((x,) for x in values))


class TestConfiguration:
    """Shape validation and the homogeneity form."""

    def test_dimensions(self):
        """n and N."""
        cfg = Configuration(((1, 0), (0, 1), (1, 1)))
        assert cfg.n == 2
        assert cfg.N == 3
        assert cfg.combination([1, 2, Fraction(1, 2)]) == (Fraction(3, 2), Fraction(5, 2))

    def test_ragged_columns(self):
        """All vectors must have the same length."""
        with pytest.raises(InvalidInputError):
            Configuration(((1, 0), (1,)))
        with pytest.raises(InvalidInputError):
            Configuration(())

    def test_find_homogeneity(self):
        """Vectors on an affine hyperplane have a form h."""
        cfg = Configuration.from_vectors([(2, 0, 1), (1, 1, 1), (0, 2, 1)])
        assert cfg.is_nonconfluent
        assert all(sum(h * x for h, x in zip(cfg.homogeneity, col)) == 1
                   for col in cfg.columns)
        assert not Configuration.from_vectors([(1,), (2,)]).is_nonconfluent

    def test_wrong_homogeneity(self):
        """An explicit form must take the value 1 on every vector."""
        with pytest.raises(InvalidInputError):
            Configuration(((1,), (2,)), (Fraction(1),))

    def test_repeated_columns(self):
        """Repeated vectors are allowed and reported."""
        cfg = _line(1, 1)
        assert cfg.has_repeated_columns
        assert not _line(1, 2).has_repeated_columns

    def test_repeated_columns_warning(self, caplog):
        """from_vectors logs a warning for repeated vectors and still builds."""
        with caplog.at_level(logging.WARNING, logger="gkz_integrality.lattice"):
            cfg = Configuration.from_vectors([(1,), (1,), (2,)])
        assert cfg.N == 3
        assert "3 columns, 2 distinct" in caplog.text
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="gkz_integrality.lattice"):
            Configuration.from_vectors([(1,), (2,)])
        assert not caplog.records


class TestKernel:
    """The relation lattice L."""

    def test_line_one_two(self):
        """A = {1, 2}: L is generated by (2, -1)."""
        basis = kernel_basis(_line(1, 2))
        assert basis.rank == 1
        assert basis.vectors[0] in ((-2, 1), (2, -1))

    def test_standard_basis(self):
        """An injective matrix has trivial kernel."""
        cfg = Configuration(((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        assert kernel_basis(cfg).rank == 0
        assert kernel_basis(cfg).coordinates((0, 0, 0)) == ()
        assert kernel_basis(cfg).coordinates((1, 0, 0)) is None

    def test_gauss_configuration(self):
        """The Gauss configuration has L generated by (-1, -1, -1, 1, 1, 1)."""
        cfg, _, _ = build_configuration(GAUSS)
        basis = kernel_basis(cfg)
        assert basis.rank == 1
        assert basis.vectors[0] in ((-1, -1, -1, 1, 1, 1), (1, 1, 1, -1, -1, -1))

    def test_classical_kernel_contains_lattice_vectors(self):
        """Every (-m, -C(m), D(m), m) is a relation with integer coordinates."""
        spec = ClassicalSpec(((1, 1),), ((1, 0), (0, 1)), (1,), (1, 1))
        cfg, _, _ = build_configuration(spec)
        basis = kernel_basis(cfg)
        random.seed(17)
        for _ in range(20):
            m = (random.randint(0, 9), random.randint(0, 9))
            l = lattice_vector(spec, m)  # noqa: E741
            assert not any(cfg.combination(l))
            assert basis.coordinates(l) is not None

    def test_random_kernels_are_relations(self):
        """Kernel vectors of random matrices are relations and have full rank N - rank(A)."""
        random.seed(23)
        for _ in range(30):
            n = random.randint(1, 3)
            big_n = random.randint(n, 6)
            cfg = Configuration(tuple(tuple(random.randint(-4, 4) for _ in range(n))
                                      for _ in range(big_n)))
            basis = kernel_basis(cfg)
            for vec in basis.vectors:
                assert not any(cfg.combination(vec))
            raw = integer_kernel([[int(x) for x in row] for row in cfg.rows()], cfg.N)
            assert len(raw) == basis.rank
            for vec in raw:
                assert basis.coordinates(vec) is not None


class TestGroupZA:
    """Membership in ZA."""

    def test_even_lattice(self):
        """A = {2}: ZA = 2Z."""
        group = group_ZA(_line(2))
        assert not group.member([3])
        assert group.member([-4])
        assert not group.member([Fraction(1, 2)])

    def test_line_one_two_is_everything(self):
        """A = {1, 2}: ZA = Z."""
        group = group_ZA(_line(1, 2))
        assert all(group.member([k]) for k in range(-5, 6))

    def test_same_coset(self):
        """Cosets of a sublattice of Z^2."""
        group = group_ZA(Configuration(((2, 0), (1, 1))))
        assert group.same_coset([1, 0], [0, 1])
        assert not group.same_coset([1, 0], [0, 0])
        assert group.same_coset([Fraction(1, 2), 0], [Fraction(5, 2), 0])


class TestNegativeSupport:
    """nsupp, L_v and minimality."""

    def test_nsupp(self):
        """Indices of negative integer entries."""
        assert nsupp([-1, 0, Fraction(-1, 2)]).indices == frozenset({0})
        assert nsupp([0, 0, 0]).indices == frozenset()
        assert nsupp([-2, -1]).indices == frozenset({0, 1})

    def test_graded_order(self):
        """Coefficients come grade by grade."""
        coeffs = list(graded_coefficients(1, 2))
        assert coeffs == [(0,), (-1,), (1,), (-2,), (2,)]
        assert list(graded_coefficients(0, 5)) == [()]
        assert len(list(graded_coefficients(2, 3))) == 49

    def test_enumerate_lv(self):
        """A = {1, 2}, v = (-1, 0): L_v is k (-2, 1) for k >= 0."""
        found = set(enumerate_Lv(_line(1, 2), (-1, 0), 3))
        assert found == {(-2 * k, k) for k in range(4)}

    def test_enumerate_without_constraints(self):
        """With no integer entries every lattice point of the box is in L_v."""
        v = (Fraction(-1, 2), Fraction(-1, 3))
        assert len(list(enumerate_Lv(_line(1, 2), v, 4))) == 9

    def test_enumerate_classical(self):
        """The Gauss L_v consists of the m (-1, -1, -1, 1, 1, 1) with m >= 0."""
        cfg, v, _ = build_configuration(GAUSS)
        found = set(enumerate_Lv(cfg, v, 5))
        assert found == {lattice_vector(GAUSS, (m,)) for m in range(6)}

    def test_zero_is_minimal(self):
        """Empty nsupp cannot shrink."""
        assert minimal_negative_support_check(_line(1, 2), (0, 0), 5).verdict == MINIMAL

    def test_line_one_two_is_minimal(self):
        """A = {1, 2}, v = (-1, 0) has minimal negative support (exactly, rank 1)."""
        result = minimal_negative_support_check(_line(1, 2), (-1, 0), 5)
        assert result.verdict == MINIMAL
        assert result.is_minimal

    def test_not_minimal(self):
        """A = {1, 1}, v = (-1, 1): l = (1, -1) clears the support."""
        result = minimal_negative_support_check(_line(1, 1), (-1, 1), 5)
        assert result.verdict == NOT_MINIMAL
        assert result.witness == (1, -1)
        assert not result.is_minimal

    def test_rank_one_beyond_box(self):
        """The rank-one analysis finds witnesses outside the searched box."""
        result = minimal_negative_support_check(_line(1, 1), (-5, 5), 2)
        assert result.verdict == NOT_MINIMAL
        assert nsupp([x + y for x, y in zip((-5, 5), result.witness)]).indices == frozenset()

    def test_higher_rank_is_bounded(self):
        """Rank >= 2 without a witness is only minimal within the bound."""
        cfg = _line(1, 1, 1)
        result = minimal_negative_support_check(cfg, (-1, 0, 0), 3)
        assert result.verdict == MINIMAL_WITHIN_BOUND

    def test_guard_refuses_large_boxes(self):
        """Rank 4 with radius 40 is refused before any point is visited."""
        cfg = _line(1, 1, 1, 1, 1)
        v = (-1, 0, 0, 0, 0)
        with pytest.raises(ResourceGuardError, match="rank 4"):
            minimal_negative_support_check(cfg, v, 40, guard=1000)
        with pytest.raises(ResourceGuardError):
            enumerate_Lv(cfg, v, 40, guard=1000)

    def test_guard_boundary(self):
        """A box of exactly guard points is allowed."""
        assert len(list(enumerate_Lv(_line(1, 2), (Fraction(-1, 2), 0), 2, guard=5))) == 5
        with pytest.raises(ResourceGuardError):
            enumerate_Lv(_line(1, 2), (Fraction(-1, 2), 0), 3, guard=5)
        assert minimal_negative_support_check(_line(1, 2), (0, 0), 40, guard=1).is_minimal
