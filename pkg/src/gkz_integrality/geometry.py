"""Polytope weights, lattice-coset minima and the weight lower bound.

The polytope Delta is the convex hull of A and the origin. Its weight
w_Delta(gamma) is the least dilation factor t with gamma in t * Delta, found
by the exact simplex. Coset minima of w_Delta over (witness + ZA) restricted
to the relative interior of a face are computed by a finite enumeration: every
point of weight at most w_Delta(witness) is a nonnegative combination of a
basis of face generators with coefficient sum at most w_Delta(witness), so it
shows up among the fundamental-parallelepiped translates enumerated below.
The infimum over these coset sets is therefore always attained.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import floor
from typing import Iterator, List, Optional, Sequence, Set, Tuple

from gkz_integrality.arith import (
    multiplicative_order,
    phi_orbit,
    require_boxed_vector,
    require_prime,
)
from gkz_integrality.cone import FaceDescriptor, facet_description, smallest_face
from gkz_integrality.constants import DEFAULT_ENUMERATION_GUARD
from gkz_integrality.exceptions import (
    ConsistencyError,
    InfeasibleError,
    InvalidInputError,
    ResourceGuardError,
)
from gkz_integrality.lattice import Configuration, group_ZA, integer_kernel
from gkz_integrality.simplex import LPSolution, minimize
from gkz_integrality.utils import (
    Vector,
    combine,
    dot,
    lcm_denominators,
    nullspace,
    primitive_integer_vector,
    rank,
    solve,
)

logger = logging.getLogger(__name__)


# --- Polytope weight ---

def solve_w_delta(cfg: Configuration, gamma: Sequence[Fraction]) -> LPSolution:
    """Solve min sum t_i subject to sum t_i a_i = gamma, t >= 0.

    Raises:
        InfeasibleError: If gamma lies outside the cone.
    """
    return minimize([Fraction(1)] * cfg.N, cfg.columns, [Fraction(x) for x in gamma])


def w_delta(cfg: Configuration, gamma: Sequence[Fraction]) -> Optional[Fraction]:
    """Return w_Delta(gamma), or None when gamma lies outside the cone.

    Examples:
        >>> w_delta(Configuration(((1,), (2,))), [1])
        Fraction(1, 2)
    """
    point = [Fraction(x) for x in gamma]
    if not facet_description(cfg).contains(point):
        return None
    try:
        return solve_w_delta(cfg, point).value
    except InfeasibleError:
        return None


def _weight_on_cone(cfg: Configuration, gamma: Sequence[Fraction]) -> Fraction:
    """w_Delta of a point already known to lie in the cone."""
    if cfg.homogeneity is not None:
        return dot(cfg.homogeneity, gamma)
    return solve_w_delta(cfg, gamma).value


# --- Coset minimization ---

@dataclass(frozen=True)
class CosetMinimum:
    """Minimum of w_Delta over a lattice coset inside a relatively open face.

    Attributes:
        minimum: The minimal weight.
        minimizer: Lexicographically least point attaining it.
        minimizer_count: Number of points attaining it.
        candidates: Number of coset points examined.
    """

    minimum: Fraction
    minimizer: Vector
    minimizer_count: int
    candidates: int


def _fractional_closure(generators: Sequence[Vector], guard: int) -> List[Vector]:
    """Finite subgroup of (Q/Z)^d generated by the given vectors, reduced into [0, 1)."""
    if not generators:
        return []
    zero = tuple(Fraction(0) for _ in generators[0])
    gens = [tuple(x % 1 for x in g) for g in generators]
    group: Set[Vector] = {zero}
    frontier = [zero]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = tuple((a + b) % 1 for a, b in zip(x, g))
            if y not in group:
                group.add(y)
                frontier.append(y)
                if len(group) > guard:
                    raise ResourceGuardError(f"Parallelepiped group exceeds {guard} points")
    return sorted(group)


def _bounded_sums(length: int, total: int) -> Iterator[Tuple[int, ...]]:
    """Yield all nonnegative integer vectors of the given length with sum <= total."""
    if length == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _bounded_sums(length - 1, total - first):
            yield (first,) + rest


def _face_lattice(cfg: Configuration, face_vectors: Sequence[Sequence[Fraction]]) -> List[Vector]:
    """Generators of ZA intersected with the linear span of the face."""
    group = group_ZA(cfg)
    basis = [[Fraction(x) for x in vec] for vec in group.basis]
    complement = nullspace(face_vectors, cfg.n)
    if not complement:
        return [tuple(vec) for vec in basis]
    integer_rows = [primitive_integer_vector(e) for e in complement]
    relation = [[int(dot(e, vec)) for vec in basis] for e in integer_rows]
    return [combine([Fraction(c) for c in y], basis, cfg.n)
            for y in integer_kernel(relation, len(basis))]


def coset_min_weight(cfg: Configuration, face: FaceDescriptor, witness: Sequence[Fraction],
                     guard: int = DEFAULT_ENUMERATION_GUARD, threads: int = 1) -> CosetMinimum:
    """Minimize w_Delta over (witness + ZA) intersected with the relative interior of face.

    Args:
        cfg: The configuration.
        face: The face whose relative interior is searched.
        witness: A point of the coset lying in the relative interior of face.
        guard: Maximal number of candidate points.
        threads: Worker threads used to weigh the candidates.

    Returns:
        The exact minimum, the lexicographically least minimizer and the
        number of minimizers.

    Raises:
        InvalidInputError: If the witness is not in the relative interior of face.
        ResourceGuardError: If more than guard candidates would be generated.
    """
    witness = tuple(Fraction(x) for x in witness)
    if not face.contains_relative_interior(witness):
        raise InvalidInputError(f"Witness {witness} is not in the relative interior of the face")
    bound = _weight_on_cone(cfg, witness)
    indices = [i for i in face.generator_indices() if any(cfg.columns[i])]
    face_vectors = [[Fraction(x) for x in cfg.columns[i]] for i in indices]
    dimension = rank(face_vectors, cfg.n)
    if dimension == 0:
        return CosetMinimum(Fraction(0), witness, 1, 1)

    lattice = _face_lattice(cfg, face_vectors)
    candidates: Set[Vector] = set()
    for subset in combinations(range(len(indices)), dimension):
        chosen = [face_vectors[k] for k in subset]
        if rank(chosen, cfg.n) < dimension:
            continue
        by_rows = [[vec[k] for vec in chosen] for k in range(cfg.n)]
        omega = solve(by_rows, witness, dimension)
        lattice_coords = [solve(by_rows, z, dimension) for z in lattice]
        if omega is None or any(c is None for c in lattice_coords):
            raise ConsistencyError("Face basis does not span the face lattice")
        for shift in _fractional_closure([c for c in lattice_coords if c is not None], guard):
            base = tuple((o + s) % 1 for o, s in zip(omega, shift))
            room = bound - sum(base)
            if room < 0:
                continue
            for extra in _bounded_sums(dimension, floor(room)):
                coeffs = [b + e for b, e in zip(base, extra)]
                candidates.add(combine(coeffs, chosen, cfg.n))
                if len(candidates) > guard:
                    raise ResourceGuardError(f"Coset enumeration exceeds {guard} points")

    ordered = sorted(p for p in candidates if face.contains_relative_interior(p))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            weights = list(pool.map(lambda p: _weight_on_cone(cfg, p), ordered))
    else:
        weights = [_weight_on_cone(cfg, p) for p in ordered]
    minimum = min(weights)
    minimizers = [p for p, w in zip(ordered, weights) if w == minimum]
    if minimum > bound or not group_ZA(cfg).same_coset(minimizers[0], witness):
        raise ConsistencyError("Coset enumeration lost the witness")
    logger.debug("Coset minimum %s over %d candidates", minimum, len(candidates))
    return CosetMinimum(minimum, minimizers[0], len(minimizers), len(candidates))


# --- Lower bound on w_p over R_p(beta) ---

@dataclass(frozen=True)
class WeightBound:
    """The lower bound on w_p(R_p(beta)) from lattice-coset minima.

    Attributes:
        per_mu_terms: Coset minima for mu = 0..e-1.
        e: Period of the cosets of beta_mu modulo ZA.
        bound: (p - 1)/e * sum(per_mu_terms).
        period: Orbit period a of the entries of v.
        phi_sums: -sum_i phi_p^(mu)(v_i) for mu = 0..a-1.
        minimizers: A minimizing point for each mu < e.
    """

    per_mu_terms: Tuple[Fraction, ...]
    e: int
    bound: Fraction
    period: int
    phi_sums: Tuple[Fraction, ...]
    minimizers: Tuple[Vector, ...]

    def term(self, mu: int) -> Fraction:
        """Coset minimum for any mu (the cosets repeat with period e)."""
        return self.per_mu_terms[mu % self.e]


def digit_shifted_betas(cfg: Configuration, v: Sequence[Fraction], p: int
                        ) -> Tuple[int, List[Vector], List[Fraction]]:
    """Return (a, [beta_mu], [-sum phi^(mu)(v_i)]) for mu = 0..a-1."""
    entries = require_boxed_vector(v, p)
    period = multiplicative_order(p, lcm_denominators(entries))
    orbits = [phi_orbit(x, p) for x in entries]
    betas = []
    sums = []
    for mu in range(period):
        shifted = [orbit[mu % len(orbit)] for orbit in orbits]
        betas.append(cfg.combination(shifted))
        sums.append(-sum(shifted, Fraction(0)))
    return period, betas, sums


def lower_bound_thm46(cfg: Configuration, v: Sequence[Fraction], p: int,
                      guard: int = DEFAULT_ENUMERATION_GUARD, threads: int = 1) -> WeightBound:
    """Lower bound for w_p on the boxed vectors r with sum r_i a_i = beta.

    For each mu below the coset period e, the point -beta_mu lies in the
    relative interior of the smallest face containing -beta, and the minimum of
    w_Delta over its coset in that face contributes one term.

    Raises:
        InvalidInputError: If v is not a boxed p-integral vector of length N.
        ResourceGuardError: Propagated from the coset enumeration.
    """
    require_prime(p)
    if len(v) != cfg.N:
        raise InvalidInputError(f"Exponent vector has length {len(v)}, expected {cfg.N}")
    period, betas, sums = digit_shifted_betas(cfg, v, p)
    beta = betas[0]
    group = group_ZA(cfg)
    e = next(mu for mu in range(1, period + 1)
             if group.same_coset(betas[mu % period], beta))
    face = smallest_face(cfg, [-x for x in beta])
    terms = []
    minimizers = []
    for mu in range(e):
        result = coset_min_weight(cfg, face, [-x for x in betas[mu]], guard, threads)
        terms.append(result.minimum)
        minimizers.append(result.minimizer)
    bound = Fraction(p - 1, e) * sum(terms, Fraction(0))
    logger.debug("Lower bound %s with e=%d, a=%d", bound, e, period)
    return WeightBound(tuple(terms), e, bound, period, tuple(sums), tuple(minimizers))


def check_criterion_49(cfg: Configuration, v: Sequence[Fraction], p: int,
                       period: Optional[int] = None,
                       guard: int = DEFAULT_ENUMERATION_GUARD) -> Tuple[bool, ...]:
    """Per-mu equality between -sum phi_p^(mu)(v_i) and the coset minimum.

    Args:
        cfg: The configuration.
        v: Boxed p-integral exponent vector.
        p: Prime.
        period: Number of mu values to report; defaults to the orbit period a
            and must be a multiple of it.
        guard: Enumeration guard.

    Returns:
        One flag per mu. All True certifies p-integrality.
    """
    bound = lower_bound_thm46(cfg, v, p, guard)
    count = period or bound.period
    if count % bound.period:
        raise InvalidInputError(f"{count} is not a multiple of the orbit period {bound.period}")
    return tuple(bound.phi_sums[mu % bound.period] == bound.term(mu) for mu in range(count))


# --- Integer coefficients for {-1, 0} exponents ---

@dataclass(frozen=True)
class CriterionResult:
    """A coset minimum compared with a target value.

    Attributes:
        holds: True if the minimum equals the target.
        minimum: The coset minimum.
        target: The value it is compared with.
        minimizer: A point attaining the minimum.
    """

    holds: bool
    minimum: Fraction
    target: Fraction
    minimizer: Vector

    def __bool__(self) -> bool:
        """Truth value of the criterion."""
        return self.holds


def check_thm63(cfg: Configuration, v: Sequence[Fraction],
                guard: int = DEFAULT_ENUMERATION_GUARD) -> CriterionResult:
    """Integer-coefficient test for an exponent vector with entries in {-1, 0}.

    With M the number of -1 entries and beta = sum v_i a_i, the series has
    integral coefficients when w_Delta over ZA inside the relative interior of
    the smallest face containing -beta equals M.

    Raises:
        InvalidInputError: If cfg is confluent or v has entries outside {-1, 0}.
    """
    if cfg.homogeneity is None:
        form = cfg.find_homogeneity()
        if form is None:
            raise InvalidInputError("A nonconfluent configuration is required")
        cfg = Configuration(cfg.columns, form)
    values = [Fraction(x) for x in v]
    if len(values) != cfg.N or any(x not in (0, -1) for x in values):
        raise InvalidInputError("Exponent vector must have N entries in {-1, 0}")
    count = Fraction(sum(1 for x in values if x == -1))
    target = [-x for x in cfg.combination(values)]
    face = smallest_face(cfg, target)
    result = coset_min_weight(cfg, face, target, guard)
    return CriterionResult(result.minimum == count, result.minimum, count, result.minimizer)


def uniqueness_prop516(cfg: Configuration, beta: Sequence[Fraction],
                       guard: int = DEFAULT_ENUMERATION_GUARD) -> bool:
    """True iff -beta is the only interior point of its coset with minimal w_Delta.

    Raises:
        InvalidInputError: If -beta is not an interior point of the cone.
    """
    target = [-Fraction(x) for x in beta]
    face = smallest_face(cfg, target)
    if face.tight_set:
        raise InvalidInputError("-beta is not an interior point of the cone")
    result = coset_min_weight(cfg, face, target, guard)
    return result.minimum == _weight_on_cone(cfg, target) and result.minimizer_count == 1
