"""Classical multivariable hypergeometric series.

F(t) = sum over m in N^r of prod_j (theta_j)_{C_j(m)} / prod_k (sigma_k)_{D_k(m)} t^m,
where C_j and D_k are linear forms with nonnegative integer coefficients and
sum_j C_j = sum_k D_k. The series is attached to a nonconfluent configuration
in Z^(r+J+K); integrality per residue class of primes is decided through the
Landau-type step function xi, whose minimum over [0,1)^r is computed exactly.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor
from typing import List, Optional, Sequence, Tuple

from gkz_integrality.arith import (
    multiplicative_order,
    ord_p,
    pochhammer,
    psi_iterate,
    require_prime,
)
from gkz_integrality.cone import smallest_face
from gkz_integrality.constants import DEFAULT_ENUMERATION_GUARD
from gkz_integrality.exceptions import ConsistencyError, InvalidInputError, InvalidSpecError
from gkz_integrality.geometry import coset_min_weight, digit_shifted_betas
from gkz_integrality.lattice import Configuration
from gkz_integrality.simplex import minimize
from gkz_integrality.utils import IntVector, Vector, lcm_denominators

logger = logging.getLogger(__name__)

RECOMBINATION_NOTE = (
    "integral after rescaling each t_s by a suitable positive integer (not computed)"
)


@dataclass(frozen=True)
class ClassicalSpec:
    """Data of a classical series.

    Attributes:
        c: J x r matrix of nonnegative integers (coefficients of the C_j).
        d: K x r matrix of nonnegative integers (coefficients of the D_k).
        thetas: J rationals in (0, 1].
        sigmas: K rationals in (0, 1].
        denominator: D with D * theta_j, D * sigma_k integral; defaults to the
            lcm of the parameter denominators.
    """

    c: Tuple[IntVector, ...]
    d: Tuple[IntVector, ...]
    thetas: Vector
    sigmas: Vector
    denominator: Optional[int] = None

    def __post_init__(self) -> None:
        """Normalize and validate."""
        c = tuple(tuple(int(x) for x in row) for row in self.c)
        d = tuple(tuple(int(x) for x in row) for row in self.d)
        thetas = tuple(Fraction(x) for x in self.thetas)
        sigmas = tuple(Fraction(x) for x in self.sigmas)
        for name, value in (("c", c), ("d", d), ("thetas", thetas), ("sigmas", sigmas)):
            object.__setattr__(self, name, value)
        if not c or not d:
            raise InvalidSpecError("J and K must be positive")
        r = len(c[0])
        if r == 0 or any(len(row) != r for row in c + d):
            raise InvalidSpecError("Rows of c and d must all have the same positive length r")
        if any(x < 0 for row in c + d for x in row):
            raise InvalidSpecError("Entries of c and d must be nonnegative")
        if len(thetas) != len(c) or len(sigmas) != len(d):
            raise InvalidSpecError("Need one theta per row of c and one sigma per row of d")
        for j, row in enumerate(c):
            if not any(row):
                raise InvalidSpecError(f"C_{j + 1} is identically zero")
        for k, row in enumerate(d):
            if not any(row):
                raise InvalidSpecError(f"D_{k + 1} is identically zero")
        for s in range(r):
            column = [row[s] for row in c + d]
            if not any(column):
                raise InvalidSpecError(f"Variable x_{s + 1} appears in no C_j or D_k")
            if sum(row[s] for row in c) != sum(row[s] for row in d):
                raise InvalidSpecError(f"Column sums of c and d differ for x_{s + 1}")
        for x in thetas + sigmas:
            if not 0 < x <= 1:
                raise InvalidSpecError(f"Parameter {x} is outside (0, 1]")
        natural = lcm_denominators(thetas + sigmas)
        if self.denominator is None:
            object.__setattr__(self, "denominator", natural)
        elif self.denominator < 1 or self.denominator % natural:
            raise InvalidSpecError(f"D = {self.denominator} does not clear the parameters")

    @property
    def r(self) -> int:
        """Number of variables."""
        return len(self.c[0])

    @property
    def J(self) -> int:  # noqa: N802
        """Number of numerator forms."""
        return len(self.c)

    @property
    def K(self) -> int:  # noqa: N802
        """Number of denominator forms."""
        return len(self.d)

    @property
    def D(self) -> int:  # noqa: N802
        """The denominator bound."""
        return int(self.denominator or 1)

    def with_parameters(self, thetas: Sequence[Fraction], sigmas: Sequence[Fraction]
                        ) -> ClassicalSpec:
        """Same forms with new parameters."""
        return ClassicalSpec(self.c, self.d, tuple(thetas), tuple(sigmas), self.denominator)


def factorial_ratio_spec(numerators: Sequence[Sequence[int]],
                         denominators: Sequence[Sequence[int]]) -> ClassicalSpec:
    """Spec of prod_j C_j(m)! / prod_k D_k(m)! (all parameters 1).

    Examples:
        >>> F_coefficient(factorial_ratio_spec([(1, 1)], [(1, 0), (0, 1)]), (2, 1))
        Fraction(3, 1)
    """
    c = tuple(tuple(row) for row in numerators)
    d = tuple(tuple(row) for row in denominators)
    return ClassicalSpec(c, d, (Fraction(1),) * len(c), (Fraction(1),) * len(d))


def _form(row: Sequence[int], x: Sequence[Fraction]) -> Fraction:
    return sum((Fraction(a) * b for a, b in zip(row, x)), Fraction(0))


# --- Configuration and coefficients ---

def build_configuration(spec: ClassicalSpec) -> Tuple[Configuration, Vector, Vector]:
    """Return (A, v, beta) for the series of spec.

    A consists of the unit vectors of Z^n, n = r + J + K, followed by
    a_{n+s} = (e_s, c_{1s}..c_{Js}, -d_{1s}..-d_{Ks}); v is
    (-1^r, -theta, sigma - 1, 0^r); every a_i has coordinate sum 1.
    """
    r, big_j, big_k = spec.r, spec.J, spec.K
    n = r + big_j + big_k
    columns = [tuple(int(i == k) for k in range(n)) for i in range(n)]
    for s in range(r):
        head = tuple(int(i == s) for i in range(r))
        columns.append(head + tuple(row[s] for row in spec.c) + tuple(-row[s] for row in spec.d))
    cfg = Configuration(tuple(columns), (Fraction(1),) * n)
    v = ((Fraction(-1),) * r + tuple(-t for t in spec.thetas)
         + tuple(s - 1 for s in spec.sigmas) + (Fraction(0),) * r)
    return cfg, v, cfg.combination(v)


def lattice_vector(spec: ClassicalSpec, m: Sequence[int]) -> IntVector:
    """The relation (-m, -C(m), D(m), m) of the built configuration."""
    values = [Fraction(x) for x in m]
    return (tuple(-int(x) for x in values)
            + tuple(-int(_form(row, values)) for row in spec.c)
            + tuple(int(_form(row, values)) for row in spec.d)
            + tuple(int(x) for x in values))


def F_coefficient(spec: ClassicalSpec, m: Sequence[int]) -> Fraction:  # noqa: N802
    """Return prod_j (theta_j)_{C_j(m)} / prod_k (sigma_k)_{D_k(m)}.

    Examples:
        >>> F_coefficient(ClassicalSpec(((1,), (1,)), ((1,), (1,)),
        ...               (Fraction(1, 2), Fraction(1, 2)), (1, 1)), (2,))
        Fraction(9, 64)
    """
    if len(m) != spec.r or any(x < 0 for x in m):
        raise InvalidInputError(f"m must be a vector of {spec.r} nonnegative integers")
    point = [Fraction(x) for x in m]
    value = Fraction(1)
    for theta, row in zip(spec.thetas, spec.c):
        value *= pochhammer(theta, int(_form(row, point)))
    for sigma, row in zip(spec.sigmas, spec.d):
        value /= pochhammer(sigma, int(_form(row, point)))
    return value


@dataclass(frozen=True)
class ClassicalTerm:
    """A coefficient of F with its p-adic valuation.

    Attributes:
        m: Exponent vector.
        coefficient: F_coefficient(spec, m).
        valuation: ord_p of the coefficient.
    """

    m: IntVector
    coefficient: Fraction
    valuation: int


def classical_expand(spec: ClassicalSpec, p: int, order: int) -> List[ClassicalTerm]:
    """Coefficients of F for m in {0..order}^r, with their p-adic valuations."""
    require_prime(p)
    terms = []
    for m in product(range(order + 1), repeat=spec.r):
        value = F_coefficient(spec, m)
        terms.append(ClassicalTerm(tuple(m), value, ord_p(value, p)))
    return terms


# --- The step function xi ---

@dataclass(frozen=True)
class XiFunction:
    """The step function xi of a spec for shifted parameters.

    xi(x) = sum_j floor(1 - theta'_j + C_j(x)) - sum_k floor(1 - sigma'_k + D_k(x)).

    Attributes:
        spec: Provides the forms C_j and D_k.
        thetas: Theta'.
        sigmas: Sigma'.
    """

    spec: ClassicalSpec
    thetas: Vector
    sigmas: Vector

    def __call__(self, x: Sequence[Fraction]) -> int:
        """Evaluate at a rational point of [0, 1)^r."""
        point = [Fraction(value) for value in x]
        if len(point) != self.spec.r or any(not 0 <= value < 1 for value in point):
            raise InvalidInputError(f"{point} is not a point of [0, 1)^{self.spec.r}")
        total = 0
        for theta, row in zip(self.thetas, self.spec.c):
            total += floor(1 - theta + _form(row, point))
        for sigma, row in zip(self.sigmas, self.spec.d):
            total -= floor(1 - sigma + _form(row, point))
        return total


def xi_eval(thetas: Sequence[Fraction], sigmas: Sequence[Fraction], spec: ClassicalSpec,
            x: Sequence[Fraction]) -> int:
    """Exact value of xi at x.

    Examples:
        >>> gauss = ClassicalSpec(((1,), (1,)), ((1,), (1,)),
        ...                       (Fraction(1, 2), Fraction(1, 2)), (1, 1))
        >>> xi_eval(gauss.thetas, gauss.sigmas, gauss, [Fraction(1, 2)])
        2
    """
    return XiFunction(spec, tuple(Fraction(t) for t in thetas),
                      tuple(Fraction(s) for s in sigmas))(x)


@dataclass(frozen=True)
class XiMinimum:
    """Minimum of xi over [0, 1)^r.

    Attributes:
        minimum: The minimal value.
        minimizer: A point of [0, 1)^r attaining it.
        method: "sweep" (one variable) or "lattice".
    """

    minimum: int
    minimizer: Vector
    method: str


def _breakpoints(spec: ClassicalSpec, thetas: Sequence[Fraction],
                 sigmas: Sequence[Fraction]) -> List[Fraction]:
    points = {Fraction(0)}
    pairs = [(t, row[0]) for t, row in zip(thetas, spec.c)]
    pairs += [(s, row[0]) for s, row in zip(sigmas, spec.d)]
    for shift, coeff in pairs:
        if coeff == 0:
            continue
        for m in range(-1, coeff + 1):
            x = (shift + m) / coeff
            if 0 <= x < 1:
                points.add(x)
    return sorted(points)


def _sweep_minimum(spec: ClassicalSpec, thetas: Vector, sigmas: Vector) -> XiMinimum:
    xi = XiFunction(spec, thetas, sigmas)
    best = min(_breakpoints(spec, thetas, sigmas), key=lambda x: (xi([x]), x))
    return XiMinimum(xi([best]), (best,), "sweep")


def _half_open_point(rows: Sequence[Tuple[Sequence[int], Fraction, Fraction]],
                     r: int) -> Vector:
    """A point x >= 0 with low <= row . x < high for every (row, low, high).

    Maximizes a common slack t on the strict inequalities.
    """
    variables = r + 1 + 2 * len(rows) + 1
    columns = [[Fraction(0)] * (2 * len(rows) + 1) for _ in range(variables)]
    rhs = []
    for index, (row, low, high) in enumerate(rows):
        lo_eq, hi_eq = 2 * index, 2 * index + 1
        for s in range(r):
            columns[s][lo_eq] = Fraction(row[s])
            columns[s][hi_eq] = Fraction(row[s])
        columns[r][hi_eq] = Fraction(1)
        columns[r + 1 + lo_eq][lo_eq] = Fraction(-1)
        columns[r + 1 + hi_eq][hi_eq] = Fraction(1)
        rhs.extend([low, high])
    last = 2 * len(rows)
    columns[r][last] = Fraction(1)
    columns[variables - 1][last] = Fraction(1)
    rhs.append(Fraction(1))
    costs = [Fraction(0)] * variables
    costs[r] = Fraction(-1)
    solution = minimize(costs, columns, rhs)
    if solution.value >= 0:
        raise ConsistencyError("The cell of the minimizer is empty")
    return tuple(solution.primal[:r])


def _lattice_minimum(spec: ClassicalSpec, thetas: Vector, sigmas: Vector,
                     guard: int) -> XiMinimum:
    shifted = spec.with_parameters(thetas, sigmas)
    cfg, _, beta = build_configuration(shifted)
    target = tuple(-x for x in beta)
    result = coset_min_weight(cfg, smallest_face(cfg, target), target, guard)
    minimum = result.minimum - sum(target, Fraction(0))
    u = [a - b for a, b in zip(result.minimizer, target)]
    r, big_j = spec.r, spec.J
    rows = [(tuple(1 if k == s else 0 for k in range(r)), Fraction(0), Fraction(1))
            for s in range(r)]
    for j, (theta, row) in enumerate(zip(thetas, spec.c)):
        rows.append((row, u[r + j] - 1 + theta, u[r + j] + theta))
    for k, (sigma, row) in enumerate(zip(sigmas, spec.d)):
        rows.append((row, -u[r + big_j + k] + sigma - 1, -u[r + big_j + k] + sigma))
    x = _half_open_point(rows, r)
    if minimum.denominator != 1 or XiFunction(spec, thetas, sigmas)(x) != minimum:
        raise ConsistencyError(f"xi at the lattice minimizer {x} differs from {minimum}")
    return XiMinimum(int(minimum), x, "lattice")


def xi_minimum(thetas: Sequence[Fraction], sigmas: Sequence[Fraction], spec: ClassicalSpec,
               guard: int = DEFAULT_ENUMERATION_GUARD) -> XiMinimum:
    """Exact minimum of xi over [0, 1)^r with a minimizing point.

    One variable: xi is right-continuous and constant between consecutive
    breakpoints (theta + m)/c, (sigma + m)/d, so the breakpoints and 0 suffice.
    Several variables: the minimum equals the lattice-coset minimum of w_Delta
    over the interior points of -beta' + Z^n minus w_Delta(-beta'), and a
    minimizing x is read off the minimizing lattice point.

    Raises:
        ResourceGuardError: Propagated from the coset enumeration.
    """
    theta_values = tuple(Fraction(t) for t in thetas)
    sigma_values = tuple(Fraction(s) for s in sigmas)
    if spec.r == 1:
        return _sweep_minimum(spec, theta_values, sigma_values)
    return _lattice_minimum(spec, theta_values, sigma_values, guard)


def xi_grid_minimum(thetas: Sequence[Fraction], sigmas: Sequence[Fraction],
                    spec: ClassicalSpec, resolution: int) -> XiMinimum:
    """Minimum of xi over the grid {k/resolution}^r; a diagnostic upper bound only."""
    xi = XiFunction(spec, tuple(Fraction(t) for t in thetas), tuple(Fraction(s) for s in sigmas))
    grid = [Fraction(k, resolution) for k in range(resolution)]
    best = min(product(grid, repeat=spec.r), key=lambda x: (xi(x), x))
    return XiMinimum(xi(best), tuple(best), "grid")


# --- Integrality per residue class ---

@dataclass(frozen=True)
class OrbitStep:
    """The xi minimum for one mu.

    Attributes:
        mu: Iteration index.
        thetas: psi_h^(mu)(Theta).
        sigmas: psi_h^(mu)(Sigma).
        minimum: Minimum of xi.
        minimizer: A point attaining it.
    """

    mu: int
    thetas: Vector
    sigmas: Vector
    minimum: int
    minimizer: Vector


@dataclass(frozen=True)
class ClassCheck:
    """Outcome of the integrality criterion for primes congruent to h modulo D.

    Attributes:
        h: Class representative.
        period: a, the order of h modulo D.
        holds: True if every xi minimum is nonnegative.
        steps: One entry per mu < a.
    """

    h: int
    period: int
    holds: bool
    steps: Tuple[OrbitStep, ...]

    def __bool__(self) -> bool:
        """Truth value of the criterion."""
        return self.holds


def thm56_check(spec: ClassicalSpec, h: int,
                guard: int = DEFAULT_ENUMERATION_GUARD) -> ClassCheck:
    """Integrality criterion for the primes congruent to h modulo D.

    The series has p-integral coefficients for every prime p = h (mod D) when
    xi(psi_h^(mu)(Theta), psi_h^(mu)(Sigma); x) >= 0 on [0, 1)^r for all
    mu below the order a of h modulo D.

    Raises:
        InvalidInputError: If gcd(h, D) != 1.
    """
    if h < 1 or math.gcd(h, spec.D) != 1:
        raise InvalidInputError(f"h = {h} is not a positive unit modulo {spec.D}")
    period = multiplicative_order(h, spec.D)
    steps = []
    for mu in range(period):
        thetas = tuple(psi_iterate(t, h, mu, spec.D) for t in spec.thetas)
        sigmas = tuple(psi_iterate(s, h, mu, spec.D) for s in spec.sigmas)
        found = xi_minimum(thetas, sigmas, spec, guard)
        steps.append(OrbitStep(mu, thetas, sigmas, found.minimum, found.minimizer))
    holds = all(step.minimum >= 0 for step in steps)
    logger.debug("Class %d mod %d: %s", h, spec.D, "holds" if holds else "fails")
    return ClassCheck(h, period, holds, tuple(steps))


@dataclass(frozen=True)
class ResidueCheck:
    """The criterion over all residue classes prime to D.

    Attributes:
        holds: True if every class passes.
        classes: Per-class results, in class order.
        note: Remark emitted on success.
    """

    holds: bool
    classes: Tuple[ClassCheck, ...]
    note: Optional[str] = None

    def __bool__(self) -> bool:
        """Truth value of the criterion."""
        return self.holds

    @property
    def failing(self) -> Tuple[ClassCheck, ...]:
        """Classes that fail."""
        return tuple(check for check in self.classes if not check.holds)


def cor57_check(spec: ClassicalSpec, guard: int = DEFAULT_ENUMERATION_GUARD,
                threads: int = 1) -> ResidueCheck:
    """Run thm56_check for the least positive representative of each unit class mod D.

    On success the coefficients are p-integral for every prime p not dividing D.
    """
    representatives = [h for h in range(1, spec.D + 1) if math.gcd(h, spec.D) == 1]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            classes = list(pool.map(lambda h: thm56_check(spec, h, guard), representatives))
    else:
        classes = [thm56_check(spec, h, guard) for h in representatives]
    holds = all(check.holds for check in classes)
    logger.info("Residue classes mod %d: %s", spec.D, "all pass" if holds else "some fail")
    return ResidueCheck(holds, tuple(classes), RECOMBINATION_NOTE if holds else None)


@dataclass(frozen=True)
class CrossCheck:
    """Both sides of the lattice / step-function equivalence for one mu.

    Attributes:
        lattice_side: The coset minimum equals r + sum psi(theta) + sum psi(1 - sigma).
        xi_side: The swept xi minimum is nonnegative.
        coset_minimum: The coset minimum.
        expected: r + sum psi(theta) + sum psi(1 - sigma).
        xi_minimum: The swept xi minimum.
    """

    lattice_side: bool
    xi_side: bool
    coset_minimum: Fraction
    expected: Fraction
    xi_minimum: int

    @property
    def agree(self) -> bool:
        """True if both sides give the same verdict."""
        return self.lattice_side == self.xi_side

    def __bool__(self) -> bool:
        """Agreement of the two sides."""
        return self.agree


def prop514_crosscheck(spec: ClassicalSpec, mu: int, p: int,
                       guard: int = DEFAULT_ENUMERATION_GUARD) -> CrossCheck:
    """Compare the lattice-coset equality with the xi sweep for one-variable specs.

    Raises:
        InvalidInputError: If r != 1 or p divides D.
    """
    if spec.r != 1:
        raise InvalidInputError("The cross-check needs a one-variable spec")
    require_prime(p)
    if spec.D % p == 0:
        raise InvalidInputError(f"{p} divides D = {spec.D}")
    cfg, v, beta = build_configuration(spec)
    thetas = tuple(psi_iterate(t, p, mu, spec.D) for t in spec.thetas)
    sigmas = tuple(psi_iterate(s, p, mu, spec.D) for s in spec.sigmas)
    expected = (spec.r + sum(thetas, Fraction(0))
                + sum((psi_iterate(1 - s, p, mu, spec.D) for s in spec.sigmas), Fraction(0)))
    period, betas, phi_sums = digit_shifted_betas(cfg, v, p)
    if phi_sums[mu % period] != expected:
        raise ConsistencyError(f"Digit-shifted weight {phi_sums[mu % period]} != {expected}")
    face = smallest_face(cfg, [-x for x in beta])
    result = coset_min_weight(cfg, face, [-x for x in betas[mu % period]], guard)
    swept = _sweep_minimum(spec, thetas, sigmas)
    return CrossCheck(result.minimum == expected, swept.minimum >= 0,
                      result.minimum, expected, swept.minimum)
