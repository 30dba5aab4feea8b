"""Facets and faces of the cone generated by a configuration.

The facet description comes from cddlib (pycddlib, exact rational mode),
run on the generators of A together with the origin.
Faces are represented by the set of facets that vanish on them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import FrozenSet, List, Sequence, Tuple

import cdd

from gkz_integrality.exceptions import ConsistencyError, InvalidInputError
from gkz_integrality.lattice import Configuration
from gkz_integrality.utils import (
    IntVector,
    Vector,
    dot,
    nullspace,
    primitive_integer_vector,
    rank,
    solve,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeDescription:
    """V- and H-description of the cone C(Delta) generated by A (and the origin).

    Attributes:
        generators: The configuration vectors.
        equalities: Integer rows e with e . x = 0 on the linear span of A.
        facets: Irredundant integer rows h with h . x >= 0 on the cone.
        dimension: Dimension of the cone.
    """

    generators: Tuple[IntVector, ...]
    equalities: Tuple[IntVector, ...]
    facets: Tuple[IntVector, ...]
    dimension: int

    @property
    def is_degenerate(self) -> bool:
        """True for the zero-dimensional cone {0}."""
        return self.dimension == 0

    def contains(self, x: Sequence[Fraction]) -> bool:
        """Decide whether x lies in the cone."""
        return (all(dot(e, x) == 0 for e in self.equalities)
                and all(dot(h, x) >= 0 for h in self.facets))

    def tight_set(self, x: Sequence[Fraction]) -> FrozenSet[int]:
        """Indices of the facets vanishing at x."""
        return frozenset(i for i, h in enumerate(self.facets) if dot(h, x) == 0)

    def certify(self) -> None:
        """Cross-check the V- and H-descriptions.

        Raises:
            ConsistencyError: If a generator violates an inequality, or a facet
                is not supported by dimension - 1 independent generators.
        """
        gens = [[Fraction(x) for x in g] for g in self.generators]
        for g in gens:
            if not self.contains(g):
                raise ConsistencyError(f"Generator {g} violates the facet description")
        n = len(self.generators[0]) if self.generators else 0
        for h in self.facets:
            tight = [g for g in gens if dot(h, g) == 0]
            if rank(tight, n) != self.dimension - 1:
                raise ConsistencyError(f"Facet {h} is not supported by enough generators")
            if len(tight) == len(gens):
                raise ConsistencyError(f"Facet {h} vanishes on the whole cone")


@dataclass(frozen=True)
class FaceDescriptor:
    """A face of the cone, given by the facets vanishing on it.

    Attributes:
        tight_set: Facet indices defining the face.
        cone: The ambient cone description.
    """

    tight_set: FrozenSet[int]
    cone: ConeDescription

    def contains_relative_interior(self, x: Sequence[Fraction]) -> bool:
        """True iff x lies in the cone and has exactly this tight set."""
        return self.cone.contains(x) and self.cone.tight_set(x) == self.tight_set

    def generator_indices(self) -> Tuple[int, ...]:
        """Indices of the configuration vectors lying on this face."""
        return tuple(
            i for i, g in enumerate(self.cone.generators)
            if all(dot(self.cone.facets[f], g) == 0 for f in self.tight_set)
        )


# --- Double description ---

def _generator_matrix(gens: Sequence[Sequence[Fraction]], n: int) -> cdd.Matrix:
    """V-representation: the origin as the only vertex, the generators as rays."""
    rows = [[1] + [0] * n] + [[0] + list(g) for g in gens]
    matrix = cdd.Matrix(rows, number_type="fraction")
    matrix.rep_type = cdd.RepType.GENERATOR
    return matrix


def _raw_inequalities(gens: Sequence[Sequence[Fraction]], n: int) -> List[Vector]:
    """Inequality rows a with a . x >= 0 from cddlib, equalities and the trivial row dropped."""
    polyhedron = cdd.Polyhedron(_generator_matrix(gens, n))
    inequalities = polyhedron.get_inequalities()
    rows = []
    for i in range(inequalities.row_size):
        row = [Fraction(x) for x in inequalities[i]]
        if i in inequalities.lin_set or not any(row[1:]):
            continue
        if row[0] != 0:
            raise ConsistencyError(f"Inequality {row} does not pass through the origin")
        rows.append(tuple(row[1:]))
    return rows


@lru_cache(maxsize=256)
def facet_description(cfg: Configuration) -> ConeDescription:
    """Compute the irredundant facet inequalities of the cone generated by cfg.

    cddlib runs in exact rational mode. Each facet is moved into the linear span
    of A (orthogonal to the equalities) and scaled to a primitive integer row,
    so lower-dimensional cones get a canonical description.

    Raises:
        ConsistencyError: If the V- and H-descriptions do not certify each other.

    Examples:
        >>> facet_description(Configuration(((1,), (2,)))).facets
        ((1,),)
    """
    n = cfg.n
    gens = [[Fraction(x) for x in col] for col in cfg.columns if any(col)]
    dimension = rank(gens, n)
    equalities = tuple(sorted(primitive_integer_vector(e) for e in nullspace(gens, n)))
    if dimension == 0:
        logger.warning("Configuration generates the zero cone")
        return ConeDescription(cfg.columns, equalities, (), 0)

    basis: List[List[Fraction]] = []
    for g in gens:
        if rank(basis + [g], n) > len(basis):
            basis.append(g)
    completion = [[Fraction(x) for x in e] for e in equalities]
    facets = []
    for row in _raw_inequalities(gens, n):
        values = [dot(row, b) for b in basis] + [Fraction(0)] * len(completion)
        form = solve(basis + completion, values, n)
        if form is None:
            raise ConsistencyError("Facet functional could not be moved into the span of A")
        facets.append(primitive_integer_vector(form))
    description = ConeDescription(cfg.columns, equalities, tuple(sorted(set(facets))), dimension)
    description.certify()
    logger.debug("Cone of dimension %d with %d facets", dimension, len(description.facets))
    return description


def smallest_face(cfg: Configuration, gamma: Sequence[Fraction]) -> FaceDescriptor:
    """Return the smallest face of the cone containing gamma.

    Raises:
        InvalidInputError: If gamma lies outside the cone.
    """
    cone = facet_description(cfg)
    point = [Fraction(x) for x in gamma]
    if not cone.contains(point):
        raise InvalidInputError(f"{point} lies outside the cone")
    return FaceDescriptor(cone.tight_set(point), cone)


def rel_interior_test(face: FaceDescriptor, x: Sequence[Fraction]) -> bool:
    """True iff x lies in the relative interior of the face."""
    return face.contains_relative_interior([Fraction(v) for v in x])
