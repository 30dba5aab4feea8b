"""The series engine.

Exact coefficients [v]_l of the series Phi_v and of its normalized form
Phi_{v,pi}, their p-adic valuations (by factorization and by the digit-sum
formula), the integrality certificate procedure, witness families for
unboundedness and the formal check against the hypergeometric operators.

pi stands for a uniformizer of valuation 1/(p - 1); only its valuation is
ever used, so terms carry the pair (coefficient, pi exponent).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import count
from typing import Iterator, List, Optional, Sequence, Tuple

from gkz_integrality.arith import (
    is_p_integral,
    multiplicative_order,
    ord_p,
    padic_digits,
    require_boxed_vector,
    require_prime,
    weight_w_p,
    wt_p_vector,
)
from gkz_integrality.constants import (
    DEFAULT_BOX_RADIUS,
    DEFAULT_ENUMERATION_GUARD,
    DEFAULT_MAX_B_MULTIPLIER,
    DEFAULT_ORDER,
    DEFAULT_THREADS,
    INTEGRAL_CERTIFIED,
    MAX_TRUNCATION_LENGTH,
    UNBOUNDED_CERTIFIED,
    UNDECIDED,
)
from gkz_integrality.exceptions import (
    ConsistencyError,
    InvalidInputError,
    NotPIntegralError,
    ResourceGuardError,
)
from gkz_integrality.geometry import lower_bound_thm46
from gkz_integrality.lattice import (
    Configuration,
    check_box_guard,
    enumerate_Lv,
    graded_coefficients,
    kernel_basis,
    nsupp,
)
from gkz_integrality.utils import IntVector, Vector, lcm_denominators

logger = logging.getLogger(__name__)


# --- Search parameters ---

@dataclass(frozen=True)
class SearchParams:
    """Bounds for the witness search and the expansions.

    Attributes:
        max_b_multiplier: k; truncation lengths b range over a, 2a, ..., k*a.
        box_radius: Bound on the kernel-basis coefficients of l.
        order: Truncation order of expansions.
        guard: Maximal number of enumerated points.
        threads: Worker threads for the fan-out.
    """

    max_b_multiplier: int = DEFAULT_MAX_B_MULTIPLIER
    box_radius: int = DEFAULT_BOX_RADIUS
    order: int = DEFAULT_ORDER
    guard: int = DEFAULT_ENUMERATION_GUARD
    threads: int = DEFAULT_THREADS

    def __post_init__(self) -> None:
        """Validate the bounds."""
        if self.max_b_multiplier < 1:
            raise InvalidInputError("max_b_multiplier must be at least 1")
        if self.box_radius < 0 or self.order < 0:
            raise InvalidInputError("box radius and order must be nonnegative")
        if self.guard < 1 or self.threads < 1:
            raise InvalidInputError("guard and threads must be positive")


# --- Coefficients and valuations ---

@dataclass(frozen=True)
class SeriesTerm:
    """One term [v]_l * pi^(sum l) * lambda^(v + l) of Phi_{v,pi}.

    Attributes:
        l: The lattice vector.
        coefficient: [v]_l.
        pi_exponent: sum of the l_i.
        valuation: ord_p([v]_l) + pi_exponent / (p - 1), or None without a prime.
    """

    l: IntVector  # noqa: E741
    coefficient: Fraction
    pi_exponent: int
    valuation: Optional[Fraction] = None


def _bracket(x: Fraction, k: int) -> Fraction:
    """[x]_k: 1, 1/((x+1)...(x+k)) for k > 0, x(x-1)...(x+k+1) for k < 0."""
    result = Fraction(1)
    if k > 0:
        for j in range(1, k + 1):
            result /= x + j
    else:
        for j in range(-k):
            result *= x - j
    return result


def _check_support(v: Sequence[Fraction], l: Sequence[int],  # noqa: E741
                   cfg: Optional[Configuration]) -> None:
    if len(v) != len(l):
        raise InvalidInputError("v and l have different lengths")
    shifted = [x + y for x, y in zip(v, l)]
    if nsupp(shifted).indices != nsupp(v).indices:
        raise InvalidInputError(f"{tuple(l)} changes the negative support of v")
    if cfg is not None and any(cfg.combination(l)):
        raise InvalidInputError(f"{tuple(l)} is not a relation of the configuration")


def coefficient(v: Sequence[Fraction], l: Sequence[int],  # noqa: E741
                p: Optional[int] = None, cfg: Optional[Configuration] = None) -> SeriesTerm:
    """Return the term of Phi_{v,pi} at l.

    Args:
        v: Exponent vector.
        l: Lattice vector with nsupp(v + l) = nsupp(v).
        p: If given, the valuation is computed by factoring the coefficient.
        cfg: If given, l is also checked to be a relation of cfg.

    Raises:
        InvalidInputError: If l is not in L_v.

    Examples:
        >>> coefficient((-1, 0), (-4, 2)).coefficient
        Fraction(12, 1)
    """
    values = tuple(Fraction(x) for x in v)
    vector = tuple(int(x) for x in l)
    _check_support(values, vector, cfg)
    coef = Fraction(1)
    for x, k in zip(values, vector):
        coef *= _bracket(x, k)
    exponent = sum(vector)
    valuation = None
    if p is not None:
        valuation = ord_p(coef, p) + Fraction(exponent, p - 1)
    return SeriesTerm(vector, coef, exponent, valuation)


@dataclass(frozen=True)
class FormulaValuation:
    """Valuation of a term from p-adic digit sums.

    Attributes:
        value: (wt_p(v^(b) + l) - wt_p(v^(b))) / (p - 1).
        b: The least truncation length with 0 <= v_i^(b) + l_i <= p^b - 1.
        boxed_value: For boxed v, (b'/(p - 1)) (w_p(v + l/(1 - p^b')) - w_p(v)).
        boxed_b: The least multiple b' of the orbit period used for boxed_value.
    """

    value: Fraction
    b: int
    boxed_value: Optional[Fraction] = None
    boxed_b: Optional[int] = None


def _least_truncation(v: Sequence[Fraction], l: Sequence[int], p: int  # noqa: E741
                      ) -> Tuple[int, List[int]]:
    streams = [padic_digits(x, p) for x in v]
    truncations = [0] * len(v)
    power = 1
    for b in range(1, MAX_TRUNCATION_LENGTH + 1):
        truncations = [t + next(s) * power for t, s in zip(truncations, streams)]
        power *= p
        if all(0 <= t + k <= power - 1 for t, k in zip(truncations, l)):
            return b, truncations
    raise ResourceGuardError(f"No truncation length up to {MAX_TRUNCATION_LENGTH} fits l")


def _boxed_form(v: Tuple[Fraction, ...], l: Sequence[int], p: int  # noqa: E741
                ) -> Tuple[Fraction, int]:
    period = multiplicative_order(p, lcm_denominators(v))
    base = weight_w_p(v, p).weight
    b = period
    while b <= MAX_TRUNCATION_LENGTH:
        scale = 1 - p**b
        digits = [int(scale * x) + k for x, k in zip(v, l)]
        if all(0 <= d <= p**b - 1 for d in digits):
            return Fraction(b, p - 1) * (Fraction(wt_p_vector(digits, p), b) - base), b
        b += period
    raise ResourceGuardError(f"No multiple of {period} up to {MAX_TRUNCATION_LENGTH} fits l")


def valuation_by_formula(v: Sequence[Fraction], l: Sequence[int],  # noqa: E741
                         p: int) -> FormulaValuation:
    """Valuation of [v]_l * pi^(sum l) from the digit sums of truncations.

    Raises:
        NotPIntegralError: If v is not p-integral.
        InvalidInputError: If l changes the negative support of v.
        ConsistencyError: If the boxed form disagrees with the truncation form.

    Examples:
        >>> valuation_by_formula((-1, 0), (-8, 4), 3).value
        Fraction(-1, 1)
    """
    require_prime(p)
    values = tuple(Fraction(x) for x in v)
    vector = tuple(int(x) for x in l)
    for i, x in enumerate(values):
        if not is_p_integral(x, p):
            raise NotPIntegralError(f"Entry {i} = {x} is not {p}-integral")
    _check_support(values, vector, None)
    b, truncations = _least_truncation(values, vector, p)
    shifted = [t + k for t, k in zip(truncations, vector)]
    value = Fraction(wt_p_vector(shifted, p) - wt_p_vector(truncations, p), p - 1)
    if not all(-1 <= x <= 0 for x in values):
        return FormulaValuation(value, b)
    boxed_value, boxed_b = _boxed_form(values, vector, p)
    if boxed_value != value:
        raise ConsistencyError(f"Boxed valuation {boxed_value} != {value} for l={vector}")
    return FormulaValuation(value, b, boxed_value, boxed_b)


def expand(cfg: Configuration, v: Sequence[Fraction], p: int, order: int,
           guard: int = DEFAULT_ENUMERATION_GUARD) -> List[SeriesTerm]:
    """Expand Phi_{v,pi} over the lattice box of the given radius.

    Every term carries its factorization valuation, which is compared with
    the digit-sum formula.

    Raises:
        ConsistencyError: If the two valuations of some term disagree.
        ResourceGuardError: If the box of radius order holds more than guard points.
    """
    require_prime(p)
    values = tuple(Fraction(x) for x in v)
    if len(values) != cfg.N:
        raise InvalidInputError(f"Exponent vector has length {len(values)}, expected {cfg.N}")
    terms = []
    for l in enumerate_Lv(cfg, values, order, guard):  # noqa: E741
        term = coefficient(values, l, p)
        formula = valuation_by_formula(values, l, p)
        if formula.value != term.valuation:
            raise ConsistencyError(f"Valuation mismatch at l={l}: {term.valuation} != "
                                   f"{formula.value}")
        terms.append(term)
    logger.debug("Expanded %d terms to order %d", len(terms), order)
    return terms


# --- Certificates ---

@dataclass(frozen=True)
class Witness:
    """A boxed vector r in R_p(beta) lighter than v.

    Attributes:
        r: The vector r = v + l / (1 - p^b).
        b: Truncation length.
        l: The relation in L_v.
        weight: w_p(r).
    """

    r: Vector
    b: int
    l: IntVector  # noqa: E741
    weight: Fraction


@dataclass(frozen=True)
class ResidueClass:
    """The primes congruent to residue modulo modulus.

    Attributes:
        modulus: D.
        residue: p mod D.
    """

    modulus: int
    residue: int

    def contains(self, prime: int) -> bool:
        """True if prime lies in this class."""
        return prime % self.modulus == self.residue % self.modulus

    def describe(self) -> str:
        """Human-readable form such as "all primes ≡ 1 (mod 2)"."""
        if self.modulus == 1:
            return "all primes"
        return f"all primes ≡ {self.residue} (mod {self.modulus})"


@dataclass(frozen=True)
class Certificate:
    """Verdict on the p-integrality of Phi_{v,pi} with its justification.

    Attributes:
        status: integral_certified, unbounded_certified or undecided.
        v: The exponent vector.
        p: The prime.
        w_p_v: w_p(v).
        lower_bound: The lattice-coset lower bound for w_p on R_p(beta).
        witness: A lighter vector in R_p(beta), for unbounded_certified.
        residue_class: Primes to which the verdict extends.
        search_bounds: Bounds of the witness search.
        b_values: Truncation lengths searched.
        period: a, the orbit period of v.
        e: Coset period of the digit-shifted beta.
        per_mu_terms: Coset minima for mu < e.
        per_mu_equalities: Per-mu equalities for mu < a.
    """

    status: str
    v: Vector
    p: int
    w_p_v: Fraction
    lower_bound: Fraction
    witness: Optional[Witness]
    residue_class: ResidueClass
    search_bounds: SearchParams
    b_values: Tuple[int, ...] = ()
    period: int = 1
    e: int = 1
    per_mu_terms: Tuple[Fraction, ...] = ()
    per_mu_equalities: Tuple[bool, ...] = ()

    @property
    def is_integral(self) -> bool:
        """True for integral_certified."""
        return self.status == INTEGRAL_CERTIFIED


def _default_residue(p: int, *vectors: Sequence[Fraction]) -> ResidueClass:
    modulus = lcm_denominators([x for vec in vectors for x in vec])
    return ResidueClass(modulus, p % modulus)


def _search_b(cfg: Configuration, v: Vector, p: int, b: int, params: SearchParams,
              threshold: Fraction) -> Optional[Tuple[Fraction, int, int, Witness]]:
    """Lightest r = v + l/(1 - p^b) with l in the box, if lighter than threshold."""
    scale = 1 - p**b
    top = p**b - 1
    digits = [int(scale * x) for x in v]
    best: Optional[Tuple[Fraction, int, int, Witness]] = None
    for index, l in enumerate(enumerate_Lv(cfg, v, params.box_radius, params.guard)):  # noqa: E741
        shifted = [s + k for s, k in zip(digits, l)]
        if not all(0 <= s <= top for s in shifted):
            continue
        weight = Fraction(wt_p_vector(shifted, p), b)
        if weight >= threshold or (best is not None and weight >= best[0]):
            continue
        r = tuple(Fraction(s, scale) for s in shifted)
        best = (weight, b, index, Witness(r, b, l, weight))
    return best


def analyze(cfg: Configuration, v: Sequence[Fraction], p: int,
            params: Optional[SearchParams] = None) -> Certificate:
    """Decide p-integrality of Phi_{v,pi} for a boxed exponent vector v.

    The weight w_p(v) is compared with the lattice-coset lower bound. If they
    agree the series is certified integral. Otherwise vectors
    r = v + l/(1 - p^b) with b in {a, 2a, ..., k*a} and l in the L_v box are
    searched for one with w_p(r) < w_p(v), which certifies unbounded
    coefficients. Failing both, the result is undecided with the bounds.

    Args:
        cfg: The configuration.
        v: Exponent vector with entries in [-1, 0], p-integral.
        p: Prime.
        params: Search bounds; defaults from constants.

    Returns:
        The certificate. The lightest witness found is kept; ties go to the
        smallest b and then to the earliest l in graded order.

    Raises:
        InvalidInputError: If v is not in R_p(beta).
        ResourceGuardError: If an enumeration exceeds the guard.

    Examples:
        >>> cert = analyze(Configuration(((1,), (2,))), (0, Fraction(-1, 2)), 3)
        >>> cert.status, cert.w_p_v
        ('integral_certified', Fraction(1, 1))
    """
    params = params or SearchParams()
    require_prime(p)
    values = require_boxed_vector(v, p)
    if len(values) != cfg.N:
        raise InvalidInputError(f"Exponent vector has length {len(values)}, expected {cfg.N}")
    weight = weight_w_p(values, p)
    bound = lower_bound_thm46(cfg, values, p, params.guard, params.threads)
    equalities = tuple(bound.phi_sums[mu] == bound.term(mu) for mu in range(bound.period))
    b_values = tuple(weight.period * k for k in range(1, params.max_b_multiplier + 1))
    base = Certificate(UNDECIDED, values, p, weight.weight, bound.bound, None,
                       _default_residue(p, values), params, b_values, bound.period, bound.e,
                       bound.per_mu_terms, equalities)
    if bound.bound > weight.weight:
        raise ConsistencyError(f"Lower bound {bound.bound} exceeds w_p(v) = {weight.weight}")
    if weight.weight == bound.bound:
        logger.info("Integral at p=%d: w_p(v) = bound = %s", p, weight.weight)
        return replace(base, status=INTEGRAL_CERTIFIED, b_values=())

    check_box_guard(kernel_basis(cfg).rank, params.box_radius, params.guard)
    if params.threads > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            found = list(pool.map(
                lambda b: _search_b(cfg, values, p, b, params, weight.weight),
                b_values))
    else:
        found = [_search_b(cfg, values, p, b, params, weight.weight)
                 for b in b_values]
    hits = [hit for hit in found if hit is not None]
    if not hits:
        logger.info("Undecided at p=%d: %s <= w_p(R_p(beta)) <= %s",
                    p, bound.bound, weight.weight)
        return base
    witness = min(hits, key=lambda hit: hit[:3])[3]
    _validate_witness(cfg, values, p, witness)
    logger.info("Unbounded at p=%d: witness of weight %s at b=%d", p, witness.weight, witness.b)
    return replace(base, status=UNBOUNDED_CERTIFIED, witness=witness,
                   residue_class=_default_residue(p, values, witness.r))


def _validate_witness(cfg: Configuration, v: Vector, p: int, witness: Witness) -> None:
    """Round trip r in R_p(beta) and l = (1 - p^b)(r - v) in L_v."""
    require_boxed_vector(witness.r, p)
    if cfg.combination(witness.r) != cfg.combination(v):
        raise ConsistencyError("Witness has a different beta")
    scale = 1 - p**witness.b
    if tuple(int(scale * (x - y)) for x, y in zip(witness.r, v)) != witness.l:
        raise ConsistencyError("Witness does not reconstruct from (b, l)")
    if nsupp([x + k for x, k in zip(v, witness.l)]).indices != nsupp(v).indices:
        raise ConsistencyError("Witness relation leaves L_v")
    if Fraction(wt_p_vector([int(scale * x) for x in witness.r], p), witness.b) != witness.weight:
        raise ConsistencyError("Witness weight does not match w_p")


# --- Unbounded families and residue classes ---

@dataclass(frozen=True)
class FamilyMember:
    """One member of the witness family.

    Attributes:
        c: Index of the member.
        l: l^(c) = (1 - p^(bc)) (r - v).
        predicted: (bc/(p - 1)) (w_p(r) - w_p(v)).
    """

    c: int
    l: IntVector  # noqa: E741
    predicted: Fraction


def unbounded_family(v: Sequence[Fraction], r: Sequence[Fraction], p: int,
                     b: Optional[int] = None) -> Iterator[FamilyMember]:
    """Yield l^(c) for c = 1, 2, ... with predicted valuations.

    Each prediction is checked against valuation_by_formula.

    Args:
        v: Boxed exponent vector.
        r: Boxed vector with the same beta (not checked here).
        p: Prime.
        b: Truncation length with (1 - p^b) v, (1 - p^b) r integral; defaults to
            the least one.

    Raises:
        ConsistencyError: If a prediction is not realized.
    """
    values = require_boxed_vector(v, p)
    target = require_boxed_vector(r, p)
    if b is None:
        b = multiplicative_order(p, lcm_denominators(values + target))
    gap = weight_w_p(target, p).weight - weight_w_p(values, p).weight
    for c in count(1):
        scale = 1 - p**(b * c)
        l = tuple(int(scale * (x - y)) for x, y in zip(target, values))  # noqa: E741
        predicted = Fraction(b * c, p - 1) * gap
        actual = valuation_by_formula(values, l, p).value
        if actual != predicted:
            raise ConsistencyError(f"Family member {c}: predicted {predicted}, got {actual}")
        yield FamilyMember(c, l, predicted)


@dataclass(frozen=True)
class TransferStatement:
    """A certificate extended to a residue class of primes.

    Attributes:
        certificate: The certificate at its prime.
        residue_class: Class of primes covered.
        statement: The verdict in words.
    """

    certificate: Certificate
    residue_class: ResidueClass
    statement: str


def residue_transfer(cert: Certificate, modulus: Optional[int] = None) -> TransferStatement:
    """Extend a decided certificate to all primes congruent to p modulo D.

    Args:
        cert: An integral or unbounded certificate.
        modulus: D; defaults to the lcm of the denominators of v and the witness.

    Raises:
        InvalidInputError: If the certificate is undecided or D does not clear
            the denominators.

    Examples:
        >>> cert = analyze(Configuration(((1,), (2,))), (-1, 0), 3)
        >>> residue_transfer(cert, 2).statement
        'unbounded for all primes ≡ 1 (mod 2)'
    """
    if cert.status == UNDECIDED:
        raise InvalidInputError("An undecided certificate does not transfer")
    vectors: List[Sequence[Fraction]] = [cert.v]
    if cert.witness is not None:
        vectors.append(cert.witness.r)
    if modulus is None:
        modulus = lcm_denominators([x for vec in vectors for x in vec])
    if modulus < 1 or any((modulus * x).denominator != 1 for vec in vectors for x in vec):
        raise InvalidInputError(f"{modulus} does not clear the denominators")
    if cert.p % modulus == 0 and modulus > 1:
        raise InvalidInputError(f"{cert.p} divides the modulus {modulus}")
    residue = ResidueClass(modulus, cert.p % modulus)
    verdict = "integral" if cert.status == INTEGRAL_CERTIFIED else "unbounded"
    return TransferStatement(cert, residue, f"{verdict} for {residue.describe()}")


def transfer_check(cfg: Configuration, cert: Certificate, prime: int) -> bool:
    """Re-verify a decided certificate at another prime of its residue class.

    Raises:
        InvalidInputError: If prime is outside the class or v is not prime-integral.
    """
    require_prime(prime)
    if not cert.residue_class.contains(prime):
        raise InvalidInputError(f"{prime} is outside {cert.residue_class.describe()}")
    base = weight_w_p(cert.v, prime).weight
    if cert.status == UNBOUNDED_CERTIFIED and cert.witness is not None:
        if cfg.combination(cert.witness.r) != cfg.combination(cert.v):
            return False
        return weight_w_p(cert.witness.r, prime).weight < base
    if cert.status == INTEGRAL_CERTIFIED:
        return lower_bound_thm46(cfg, cert.v, prime, cert.search_bounds.guard).bound == base
    raise InvalidInputError("An undecided certificate does not transfer")


# --- Formal check against the operators ---

@dataclass(frozen=True)
class SystemCheck:
    """Outcome of applying the box and Euler operators to a truncation.

    Attributes:
        passed: True if every checked monomial cancels.
        box_checked: Interior monomials with a nonzero contribution.
        euler_checked: Terms checked against the Euler operators.
        failure: (basis index, lattice vector m) of the first surviving monomial.
    """

    passed: bool
    box_checked: int
    euler_checked: int
    failure: Optional[Tuple[int, IntVector]] = None

    def __bool__(self) -> bool:
        """Truth value of the check."""
        return self.passed


def _falling(values: Sequence[Fraction], powers: Sequence[int]) -> Fraction:
    result = Fraction(1)
    for x, k in zip(values, powers):
        for j in range(k):
            result *= x - j
    return result


def verify_hypergeometric_system(cfg: Configuration, v: Sequence[Fraction], order: int,
                                 guard: int = DEFAULT_ENUMERATION_GUARD) -> SystemCheck:
    """Apply the box operators of the kernel basis and the Euler operators to Phi_v.

    The truncation keeps the terms whose kernel-basis coefficients are bounded
    by order. For a basis relation l the coefficient of lambda^(v + m - l+)
    in the box operator applied to Phi_v is
    [v]_m (v + m)_(l+) - [v]_(m - l) (v + m - l)_(l-) with falling products,
    and it is checked for every m whose coefficient vector c and c - e_j both
    lie in the truncation.

    Raises:
        InvalidInputError: If the truncation leaves no nontrivial monomial.
        ResourceGuardError: If the box of radius order holds more than guard points.
    """
    values = tuple(Fraction(x) for x in v)
    if len(values) != cfg.N:
        raise InvalidInputError(f"Exponent vector has length {len(values)}, expected {cfg.N}")
    basis = kernel_basis(cfg)
    profile = nsupp(values)
    beta = cfg.combination(values)

    def term(m: IntVector) -> Fraction:
        if not profile.matches([x + k for x, k in zip(values, m)]):
            return Fraction(0)
        return coefficient(values, m).coefficient

    euler = 0
    for l in enumerate_Lv(cfg, values, order, guard):  # noqa: E741
        if cfg.combination([x + k for x, k in zip(values, l)]) != beta:
            return SystemCheck(False, 0, euler, (-1, l))
        euler += 1

    checked = 0
    for j, relation in enumerate(basis.vectors):
        plus = [max(k, 0) for k in relation]
        minus = [max(-k, 0) for k in relation]
        for coeffs in graded_coefficients(basis.rank, order):
            if coeffs[j] - 1 < -order:
                continue
            m = basis.combination(coeffs)
            previous = tuple(x - k for x, k in zip(m, relation))
            left = term(m) * _falling([x + k for x, k in zip(values, m)], plus)
            right = term(previous) * _falling([x + k for x, k in zip(values, previous)], minus)
            if left == 0 and right == 0:
                continue
            checked += 1
            if left != right:
                logger.info("Box operator %d leaves a monomial at m=%s", j, m)
                return SystemCheck(False, checked, euler, (j, m))
    if checked == 0:
        raise InvalidInputError(f"Truncation order {order} leaves no interior monomial")
    return SystemCheck(True, checked, euler)
