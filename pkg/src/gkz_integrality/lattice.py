"""Integer linear algebra for vector configurations.

Contains the Configuration type, the relation lattice L (kernel of A over Z),
the group ZA with membership tests, negative supports and bounded
enumeration of the translates L_v.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import ceil, floor
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, invariant_factors

from gkz_integrality.constants import (
    DEFAULT_ENUMERATION_GUARD,
    MINIMAL,
    MINIMAL_WITHIN_BOUND,
    NOT_MINIMAL,
)
from gkz_integrality.exceptions import ConsistencyError, InvalidInputError, ResourceGuardError
from gkz_integrality.utils import IntVector, Vector, combine, is_integral_vector, solve

logger = logging.getLogger(__name__)


# --- Configuration ---

@dataclass(frozen=True)
class Configuration:
    """A finite configuration A = {a_1, ..., a_N} of integer vectors in Z^n.

    Repeated columns are allowed (binomial-type series need A = {1, 1}).

    Attributes:
        columns: The vectors a_i, each of length n.
        homogeneity: Optional rational form h with h(a_i) = 1 for all i.
    """

    columns: Tuple[IntVector, ...]
    homogeneity: Optional[Vector] = None

    def __post_init__(self) -> None:
        """Validate shape and the homogeneity form."""
        columns = tuple(tuple(int(x) for x in col) for col in self.columns)
        object.__setattr__(self, "columns", columns)
        if not columns:
            raise InvalidInputError("A configuration needs at least one vector")
        n = len(columns[0])
        if n == 0 or any(len(col) != n for col in columns):
            raise InvalidInputError("All configuration vectors must have the same positive length")
        if self.homogeneity is not None:
            form = tuple(Fraction(x) for x in self.homogeneity)
            object.__setattr__(self, "homogeneity", form)
            if len(form) != n:
                raise InvalidInputError("Homogeneity form has the wrong length")
            for i, col in enumerate(columns):
                if sum((h * x for h, x in zip(form, col)), Fraction(0)) != 1:
                    raise InvalidInputError(f"h(a_{i}) != 1, the configuration is not homogeneous")

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[int]], *,
                     detect_homogeneity: bool = True) -> Configuration:
        """Create from a list of vectors, detecting the homogeneity form if asked."""
        cfg = cls(tuple(tuple(v) for v in vectors))
        if cfg.has_repeated_columns:
            logger.warning("Configuration repeats vectors: %d columns, %d distinct",
                           cfg.N, len(set(cfg.columns)))
        if detect_homogeneity:
            form = cfg.find_homogeneity()
            if form is not None:
                return cls(cfg.columns, form)
        return cfg

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return len(self.columns[0])

    @property
    def N(self) -> int:  # noqa: N802
        """Number of vectors."""
        return len(self.columns)

    @property
    def is_nonconfluent(self) -> bool:
        """True if a homogeneity form is attached."""
        return self.homogeneity is not None

    @property
    def has_repeated_columns(self) -> bool:
        """True if some vector occurs more than once."""
        return len(set(self.columns)) != len(self.columns)

    def rows(self) -> List[List[Fraction]]:
        """The n x N matrix with the a_i as columns, as rows of Fractions."""
        return [[Fraction(col[k]) for col in self.columns] for k in range(self.n)]

    def find_homogeneity(self) -> Optional[Vector]:
        """Return a rational form h with h(a_i) = 1 for all i, or None."""
        system = [[Fraction(x) for x in col] for col in self.columns]
        return solve(system, [Fraction(1)] * self.N, self.n)

    def combination(self, coefficients: Sequence[Fraction]) -> Vector:
        """Return sum_i coefficients[i] * a_i."""
        return combine([Fraction(c) for c in coefficients], self.columns, self.n)


# --- Integer elimination ---

def _column_echelon(rows: Sequence[Sequence[int]], ncols: int
                    ) -> Tuple[List[List[int]], List[List[int]]]:
    """Column-reduce an integer matrix with unimodular operations.

    Returns:
        (image, kernel): the nonzero columns of A U in echelon form and the
        columns of U mapped to zero, which form a Z-basis of the kernel.
    """
    nrows = len(rows)
    cols = [[int(rows[i][j]) for i in range(nrows)] for j in range(ncols)]
    unimodular = [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    pivot = 0
    for i in range(nrows):
        if pivot == ncols:
            break
        found = False
        while True:
            active = [j for j in range(pivot, ncols) if cols[j][i] != 0]
            if not active:
                break
            found = True
            best = min(active, key=lambda j: (abs(cols[j][i]), j))
            cols[pivot], cols[best] = cols[best], cols[pivot]
            unimodular[pivot], unimodular[best] = unimodular[best], unimodular[pivot]
            reduced = True
            for j in range(pivot + 1, ncols):
                if cols[j][i]:
                    q = cols[j][i] // cols[pivot][i]
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[pivot])]
                    unimodular[j] = [x - q * y for x, y in zip(unimodular[j], unimodular[pivot])]
                    if cols[j][i]:
                        reduced = False
            if reduced:
                break
        if found:
            pivot += 1
    return cols[:pivot], unimodular[pivot:]


def _hnf_columns(vectors: Sequence[Sequence[int]], length: int) -> List[IntVector]:
    """Canonical basis (HNF columns) of the lattice spanned by the given vectors."""
    if not vectors:
        return []
    data = [[ZZ(int(vec[i])) for vec in vectors] for i in range(length)]
    hnf = hermite_normal_form(DomainMatrix(data, (length, len(vectors)), ZZ)).to_Matrix()
    basis = [tuple(int(hnf[i, j]) for i in range(hnf.rows)) for j in range(hnf.cols)]
    return [vec for vec in basis if any(vec)]


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> List[IntVector]:
    """Return a Z-basis of {x in Z^ncols : rows . x = 0} (not reduced)."""
    _, kernel = _column_echelon(rows, ncols)
    return [tuple(vec) for vec in kernel]


# --- Relation lattice ---

@dataclass(frozen=True)
class LatticeBasis:
    """A Z-basis of the relation lattice L = {l in Z^N : sum l_i a_i = 0}.

    Attributes:
        vectors: Basis vectors in canonical (HNF) form.
        N: Length of each vector.
    """

    vectors: Tuple[IntVector, ...]
    N: int  # noqa: N815

    @property
    def rank(self) -> int:
        """Rank of L."""
        return len(self.vectors)

    def combination(self, coefficients: Sequence[int]) -> IntVector:
        """Return sum_j coefficients[j] * basis_j."""
        total = [0] * self.N
        for c, vec in zip(coefficients, self.vectors):
            if c:
                for i in range(self.N):
                    total[i] += c * vec[i]
        return tuple(total)

    def coordinates(self, vector: Sequence[int]) -> Optional[Tuple[int, ...]]:
        """Return the integer coordinates of vector in this basis, or None if not in L."""
        if self.rank == 0:
            return () if not any(vector) else None
        rows = [[Fraction(vec[i]) for vec in self.vectors] for i in range(self.N)]
        coords = solve(rows, [Fraction(x) for x in vector], self.rank)
        if coords is None or not is_integral_vector(coords):
            return None
        if self.combination([int(c) for c in coords]) != tuple(vector):
            return None
        return tuple(int(c) for c in coords)


@lru_cache(maxsize=256)
def kernel_basis(cfg: Configuration) -> LatticeBasis:
    """Compute a canonical Z-basis of the relation lattice of cfg.

    The kernel comes from unimodular column reduction, is put in Hermite
    normal form and is checked to be saturated (all Smith invariants 1).

    Examples:
        >>> kernel_basis(Configuration(((1,), (2,)))).vectors
        ((-2, 1),)
    """
    kernel = integer_kernel([[int(x) for x in row] for row in cfg.rows()], cfg.N)
    basis = _hnf_columns(kernel, cfg.N)
    for vec in basis:
        if any(cfg.combination(vec)):
            raise ConsistencyError(f"Kernel vector {vec} is not a relation of A")
    if basis:
        data = [[ZZ(vec[i]) for vec in basis] for i in range(cfg.N)]
        factors = invariant_factors(DomainMatrix(data, (cfg.N, len(basis)), ZZ))
        if any(f != 1 for f in factors):
            raise ConsistencyError("Kernel basis is not saturated")
    logger.debug("Kernel of rank %d for N=%d", len(basis), cfg.N)
    return LatticeBasis(tuple(basis), cfg.N)


# --- The group ZA ---

@dataclass(frozen=True)
class LatticeGroup:
    """The subgroup ZA of Z^n generated by the configuration.

    Attributes:
        basis: Canonical basis (HNF columns) of ZA.
        n: Ambient dimension.
    """

    basis: Tuple[IntVector, ...]
    n: int

    @property
    def rank(self) -> int:
        """Rank of ZA."""
        return len(self.basis)

    def member(self, x: Sequence[Fraction]) -> bool:
        """Decide whether x lies in ZA."""
        values = [Fraction(v) for v in x]
        if not is_integral_vector(values):
            return False
        if self.rank == 0:
            return not any(values)
        rows = [[Fraction(vec[k]) for vec in self.basis] for k in range(self.n)]
        coords = solve(rows, values, self.rank)
        return coords is not None and is_integral_vector(coords)

    def same_coset(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> bool:
        """Decide whether x - y lies in ZA."""
        return self.member([Fraction(a) - Fraction(b) for a, b in zip(x, y)])


@lru_cache(maxsize=256)
def group_ZA(cfg: Configuration) -> LatticeGroup:  # noqa: N802
    """Return ZA with an HNF basis and membership tests.

    Examples:
        >>> group_ZA(Configuration(((2,),))).member([3])
        False
    """
    return LatticeGroup(tuple(_hnf_columns(cfg.columns, cfg.n)), cfg.n)


# --- Negative support ---

@dataclass(frozen=True)
class SupportProfile:
    """Negative support of a rational vector.

    Attributes:
        indices: 0-based positions i where v_i is a negative integer.
    """

    indices: FrozenSet[int]

    def matches(self, v: Sequence[Fraction]) -> bool:
        """True if v has exactly this negative support."""
        return nsupp(v).indices == self.indices


def nsupp(v: Sequence[Fraction]) -> SupportProfile:
    """Return the set of (0-based) indices where v_i is a negative integer.

    Examples:
        >>> sorted(nsupp([-1, 0, Fraction(-1, 2)]).indices)
        [0]
    """
    return SupportProfile(frozenset(
        i for i, x in enumerate(v) if Fraction(x).denominator == 1 and x < 0
    ))


def _shift(v: Sequence[Fraction], l: Sequence[int]) -> Vector:  # noqa: E741
    return tuple(Fraction(x) + y for x, y in zip(v, l))


def graded_coefficients(rank: int, radius: int) -> Iterator[Tuple[int, ...]]:
    """Yield integer vectors of the given length with max-norm <= radius.

    Vectors come grade by grade (max-norm 0, 1, ...), lexicographically
    within a grade.
    """
    if rank == 0:
        yield ()
        return
    for grade in range(radius + 1):
        for coeffs in product(range(-grade, grade + 1), repeat=rank):
            if grade == 0 or max(abs(c) for c in coeffs) == grade:
                yield coeffs


def check_box_guard(rank: int, box_radius: int, guard: int) -> None:
    """Refuse a coefficient box holding more than guard points.

    Raises:
        ResourceGuardError: If (2 * box_radius + 1)^rank exceeds guard.
    """
    if (2 * box_radius + 1) ** rank > guard:
        raise ResourceGuardError(f"Box of radius {box_radius} in rank {rank} "
                                 f"exceeds the guard {guard}")


def enumerate_Lv(cfg: Configuration, v: Sequence[Fraction],  # noqa: N802
                 box_radius: int,
                 guard: int = DEFAULT_ENUMERATION_GUARD) -> Iterator[IntVector]:
    """Iterate over the l in L_v whose kernel-basis coefficients are bounded by box_radius.

    The guard is checked when this is called, before anything is yielded.

    Args:
        cfg: The configuration.
        v: Exponent vector.
        box_radius: Bound on the max-norm of the kernel-basis coefficients.
        guard: Largest box size allowed.

    Returns:
        An iterator over the relations l with nsupp(v + l) = nsupp(v), in
        graded lexicographic order of their coefficients.

    Raises:
        ResourceGuardError: If the box holds more than guard points.
    """
    basis = kernel_basis(cfg)
    check_box_guard(basis.rank, box_radius, guard)
    profile = nsupp(v)
    relations = map(basis.combination, graded_coefficients(basis.rank, box_radius))
    return (l for l in relations if profile.matches(_shift(v, l)))  # noqa: E741


@dataclass(frozen=True)
class MinimalityResult:
    """Outcome of the minimal negative support check.

    Attributes:
        verdict: "minimal", "not_minimal" or "minimal_within_bound".
        witness: A relation l with nsupp(v + l) a proper subset of nsupp(v).
        box_radius: The coefficient bound that was searched.
    """

    verdict: str
    witness: Optional[IntVector] = None
    box_radius: int = 0

    @property
    def is_minimal(self) -> bool:
        """True unless a shrinking witness was found."""
        return self.verdict != NOT_MINIMAL


def _rank_one_candidates(v: Sequence[Fraction], direction: IntVector) -> List[int]:
    thresholds = [-Fraction(x) / b for x, b in zip(v, direction)
                  if Fraction(x).denominator == 1 and b != 0]
    candidates = {0, 1, -1}
    for t in thresholds:
        base = floor(t)
        candidates.update(range(base - 1, base + 3))
        candidates.add(ceil(t) + 1)
    low, high = min(candidates), max(candidates)
    candidates.update((low - 1, high + 1))
    return sorted(candidates, key=lambda c: (abs(c), c))


def minimal_negative_support_check(cfg: Configuration, v: Sequence[Fraction],
                                   box_radius: int,
                                   guard: int = DEFAULT_ENUMERATION_GUARD) -> MinimalityResult:
    """Search for l in L with nsupp(v + l) a proper subset of nsupp(v).

    The search covers the kernel-basis coefficient box. The verdict is exact
    ("minimal") when nsupp(v) is empty or L has rank at most 1; otherwise an
    empty search reports "minimal_within_bound".

    Raises:
        ResourceGuardError: If the box holds more than guard points.
    """
    profile = nsupp(v)
    if not profile.indices:
        return MinimalityResult(MINIMAL, None, box_radius)
    basis = kernel_basis(cfg)
    check_box_guard(basis.rank, box_radius, guard)
    for coeffs in graded_coefficients(basis.rank, box_radius):
        l = basis.combination(coeffs)  # noqa: E741
        if nsupp(_shift(v, l)).indices < profile.indices:
            return MinimalityResult(NOT_MINIMAL, l, box_radius)
    if basis.rank == 0:
        return MinimalityResult(MINIMAL, None, box_radius)
    if basis.rank == 1:
        direction = basis.vectors[0]
        for c in _rank_one_candidates(v, direction):
            l = tuple(c * b for b in direction)  # noqa: E741
            if nsupp(_shift(v, l)).indices < profile.indices:
                return MinimalityResult(NOT_MINIMAL, l, box_radius)
        return MinimalityResult(MINIMAL, None, box_radius)
    return MinimalityResult(MINIMAL_WITHIN_BOUND, None, box_radius)
