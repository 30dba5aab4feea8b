"""p-adic digit machinery on exact rationals.

Contains digit sums, factorial valuations, truncations of p-integral
rationals, the digit-shift maps phi_h / psi_h on boxed rationals and the
weight function w_p on vectors of boxed rationals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Tuple, Union

from sympy import isprime
from sympy.ntheory import multiplicity, n_order

from gkz_integrality.constants import MAX_ORDER_MODULUS
from gkz_integrality.exceptions import (
    ConsistencyError,
    InvalidInputError,
    NotPIntegralError,
    ResourceGuardError,
)
from gkz_integrality.utils import lcm_denominators

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


# --- Validation helpers ---

def require_prime(p: int) -> int:
    """Return p if it is a prime, raise InvalidInputError otherwise."""
    if isinstance(p, bool) or not isinstance(p, int) or not isprime(p):
        raise InvalidInputError(f"Expected a prime, got {p!r}")
    return p


def is_p_integral(x: Rational, p: int) -> bool:
    """Return True if the denominator of x is prime to p."""
    return Fraction(x).denominator % p != 0


def require_boxed_vector(r: Sequence[Rational], p: int) -> Tuple[Fraction, ...]:
    """Validate that every entry lies in [-1, 0] and is p-integral.

    Returns:
        The entries as Fractions.

    Raises:
        InvalidInputError: If an entry lies outside [-1, 0].
        NotPIntegralError: If p divides a denominator.
    """
    values = tuple(Fraction(x) for x in r)
    for i, x in enumerate(values):
        if not -1 <= x <= 0:
            raise InvalidInputError(f"Entry {i} = {x} is outside [-1, 0]")
        if not is_p_integral(x, p):
            raise NotPIntegralError(f"Entry {i} = {x} is not {p}-integral")
    return values


# --- Digit sums and factorial valuations ---

def wt_p(t: int, p: int) -> int:
    """Return the p-weight (base-p digit sum) of a nonnegative integer.

    Args:
        t: Nonnegative integer.
        p: Base (a prime in every caller).

    Returns:
        Sum of the base-p digits of t.

    Examples:
        >>> wt_p(13, 2)
        3
        >>> wt_p(9, 3)
        1
    """
    if t < 0:
        raise InvalidInputError(f"wt_p needs t >= 0, got {t}")
    if p < 2:
        raise InvalidInputError(f"Invalid base {p}")
    total = 0
    while t:
        t, digit = divmod(t, p)
        total += digit
    return total


def wt_p_vector(values: Sequence[int], p: int) -> int:
    """Componentwise p-weight of a vector of nonnegative integers."""
    return sum(wt_p(int(t), p) for t in values)


def alpha_p(t: int, p: int) -> int:
    """Return ord_p(t!) = (t - wt_p(t)) / (p - 1).

    Examples:
        >>> alpha_p(4, 2)
        3
        >>> alpha_p(9, 3)
        4
    """
    return (t - wt_p(t, p)) // (p - 1)


def beta_p(t: int, k: int, p: int) -> int:
    """Return ord_p of the falling product t(t-1)...(t-k+1).

    Args:
        t: Nonnegative integer.
        k: Number of factors, 0 <= k <= t.
        p: Prime.

    Returns:
        alpha_p(t) - alpha_p(t - k).

    Raises:
        InvalidInputError: If k > t or k < 0.

    Examples:
        >>> beta_p(9, 5, 3)
        3
    """
    if k < 0 or k > t:
        raise InvalidInputError(f"beta_p needs 0 <= k <= t, got t={t}, k={k}")
    return (k - wt_p(t, p) + wt_p(t - k, p)) // (p - 1)


def ord_p(x: Rational, p: int) -> int:
    """Exact p-adic valuation of a nonzero rational, by factoring out p."""
    x = Fraction(x)
    if x == 0:
        raise InvalidInputError("ord_p(0) is infinite")
    return int(multiplicity(p, abs(x.numerator))) - int(multiplicity(p, x.denominator))


# --- Truncations ---

def padic_digits(t: Rational, p: int) -> Iterator[int]:
    """Yield the base-p digits t_0, t_1, ... of a p-integral rational.

    Each digit is t mod p (the denominator is inverted modulo p), after which
    t is replaced by (t - digit) / p. The stream is infinite and eventually
    periodic.
    """
    t = Fraction(t)
    if not is_p_integral(t, p):
        raise NotPIntegralError(f"{t} is not {p}-integral")
    while True:
        digit = (t.numerator * pow(t.denominator, -1, p)) % p
        yield digit
        t = (t - digit) / p


def truncate(t: Rational, p: int, b: int) -> int:
    """Return t^(b), the integer in [0, p^b) congruent to t modulo p^b.

    Examples:
        >>> truncate(Fraction(-1, 3), 2, 3)
        5
        >>> truncate(7, 5, 4)
        7
    """
    if b < 1:
        raise InvalidInputError(f"Truncation length must be positive, got {b}")
    total = 0
    for i, digit in zip(range(b), padic_digits(t, p)):
        total += digit * p**i
    return total


def falling_product_valuation(t: Rational, k: int, p: int) -> int:
    """Return ord_p of t(t-1)...(t-k+1) for a p-integral rational t.

    Uses beta_p(t^(b), k) with the least b for which k <= t^(b); for
    nonnegative integers t < k the product contains 0 and an error is raised.
    """
    t = Fraction(t)
    if k == 0:
        return 0
    if t.denominator == 1 and 0 <= t < k:
        raise InvalidInputError(f"The falling product of {t} of length {k} vanishes")
    b = 1
    while truncate(t, p, b) < k:
        b += 1
    return beta_p(truncate(t, p, b), k, p)


@dataclass(frozen=True)
class PAdicRational:
    """A rational number with denominator prime to p.

    Attributes:
        value: The rational number.
        p: The prime.
    """

    value: Fraction
    p: int

    def __post_init__(self) -> None:
        """Validate p-integrality."""
        object.__setattr__(self, "value", Fraction(self.value))
        require_prime(self.p)
        if not is_p_integral(self.value, self.p):
            raise NotPIntegralError(f"{self.value} is not {self.p}-integral")

    def digits(self, count: int) -> Tuple[int, ...]:
        """Return the first count base-p digits."""
        return tuple(d for _, d in zip(range(count), padic_digits(self.value, self.p)))

    def truncate(self, b: int) -> int:
        """Return the truncation t^(b)."""
        return truncate(self.value, self.p, b)


# --- Digit shift maps ---

@dataclass(frozen=True)
class BoxedRational:
    """A rational in [-1, 0] (phi side) or [0, 1] (psi side) with a denominator bound.

    Attributes:
        value: The rational number.
        denominator: Positive integer D with D * value integral.
        side: "phi" for [-1, 0], "psi" for [0, 1].
    """

    value: Fraction
    denominator: int
    side: str = "phi"

    def __post_init__(self) -> None:
        """Validate the interval and the denominator bound."""
        object.__setattr__(self, "value", Fraction(self.value))
        if self.side not in ("phi", "psi"):
            raise InvalidInputError(f"Unknown side {self.side!r}")
        if self.denominator < 1 or (self.value * self.denominator).denominator != 1:
            raise InvalidInputError(
                f"{self.denominator} does not clear the denominator of {self.value}"
            )
        low, high = (-1, 0) if self.side == "phi" else (0, 1)
        if not low <= self.value <= high:
            raise InvalidInputError(f"{self.value} is outside [{low}, {high}]")

    @property
    def numerator(self) -> int:
        """D * value."""
        return int(self.value * self.denominator)


def _digit_shift(r: Rational, h: int, denominator: Optional[int], side: str) -> Fraction:
    boxed = BoxedRational(Fraction(r), denominator or Fraction(r).denominator, side)
    big_d = boxed.denominator
    if h < 1 or math.gcd(h, big_d) != 1:
        raise InvalidInputError(f"gcd({h}, {big_d}) != 1")
    s = boxed.numerator
    s0 = (s * pow(h, -1, big_d)) % big_d if big_d > 1 else 0
    if s0 == 0:
        # endpoints are fixed
        shifted = s
    else:
        shifted = s0 - big_d if side == "phi" else s0
    result = Fraction(shifted, big_d)
    gap = r - h * result if side == "phi" else h * result - r
    assert gap.denominator == 1 and 0 <= gap <= h - 1, (r, h, result)
    return result


def phi_h(r: Rational, h: int, denominator: Optional[int] = None) -> Fraction:
    """Return phi_h(r): the unique r' in [-1, 0] with D r' integral and r - h r' in {0..h-1}.

    Computed by modular inversion of h on the numerator s = D r.

    Args:
        r: Rational in [-1, 0].
        h: Positive integer prime to D.
        denominator: D; defaults to the denominator of r.

    Examples:
        >>> phi_h(Fraction(-1, 3), 2)
        Fraction(-2, 3)
        >>> phi_h(Fraction(-2, 3), 2)
        Fraction(-1, 3)
    """
    return _digit_shift(r, h, denominator, "phi")


def psi_h(r: Rational, h: int, denominator: Optional[int] = None) -> Fraction:
    """Return psi_h(r): the unique r' in [0, 1] with D r' integral and h r' - r in {0..h-1}.

    Examples:
        >>> psi_h(Fraction(1, 3), 2)
        Fraction(2, 3)
        >>> psi_h(Fraction(1, 2), 3)
        Fraction(1, 2)
    """
    return _digit_shift(r, h, denominator, "psi")


def phi_iterate(r: Rational, h: int, k: int, denominator: Optional[int] = None) -> Fraction:
    """Return the k-fold iterate phi_h^(k)(r)."""
    value = Fraction(r)
    for _ in range(k):
        value = phi_h(value, h, denominator)
    return value


def psi_iterate(r: Rational, h: int, k: int, denominator: Optional[int] = None) -> Fraction:
    """Return the k-fold iterate psi_h^(k)(r)."""
    value = Fraction(r)
    for _ in range(k):
        value = psi_h(value, h, denominator)
    return value


@lru_cache(maxsize=4096)
def phi_orbit(r: Fraction, h: int) -> Tuple[Fraction, ...]:
    """Return the periodic phi_h orbit (r, phi_h(r), ...) up to its first return."""
    orbit = [Fraction(r)]
    value = phi_h(r, h)
    while value != orbit[0]:
        orbit.append(value)
        value = phi_h(value, h)
    return tuple(orbit)


@lru_cache(maxsize=4096)
def psi_orbit(r: Fraction, h: int, denominator: int) -> Tuple[Fraction, ...]:
    """Return the periodic psi_h orbit of r for the denominator bound D."""
    orbit = [Fraction(r)]
    value = psi_h(r, h, denominator)
    while value != orbit[0]:
        orbit.append(value)
        value = psi_h(value, h, denominator)
    return tuple(orbit)


def multiplicative_order(h: int, modulus: int) -> int:
    """Return the multiplicative order of h modulo the given modulus (1 for modulus 1).

    Raises:
        ResourceGuardError: If the modulus exceeds MAX_ORDER_MODULUS.
        InvalidInputError: If h is not a unit modulo the modulus.
    """
    if modulus > MAX_ORDER_MODULUS:
        raise ResourceGuardError(f"Modulus {modulus} exceeds {MAX_ORDER_MODULUS}")
    if math.gcd(h, modulus) != 1:
        raise InvalidInputError(f"{h} is not invertible modulo {modulus}")
    if modulus == 1:
        return 1
    return int(n_order(h % modulus, modulus))


def pochhammer(z: Rational, k: int) -> Fraction:
    """Rising factorial (z)_k = z(z+1)...(z+k-1)."""
    result = Fraction(1)
    z = Fraction(z)
    for i in range(k):
        result *= z + i
    return result


# --- Weight function ---

@dataclass(frozen=True)
class WeightVector:
    """A vector of boxed p-integral rationals together with its weight w_p.

    Attributes:
        entries: The rationals r_1..r_N in [-1, 0].
        p: The prime.
        period: a, the order of p modulo the lcm of the denominators.
        weight: w_p(r) = wt_p((1 - p^a) r) / a.
    """

    entries: Tuple[Fraction, ...]
    p: int
    period: int
    weight: Fraction

    @property
    def digit_vector(self) -> Tuple[int, ...]:
        """s = (1 - p^a) r, a vector of integers in [0, p^a - 1]."""
        scale = 1 - self.p**self.period
        return tuple(int(scale * x) for x in self.entries)


def weight_w_p(r: Sequence[Rational], p: int) -> WeightVector:
    """Compute the weight w_p of a vector of boxed p-integral rationals.

    Args:
        r: Rationals in [-1, 0] with denominators prime to p.
        p: Prime.

    Returns:
        The WeightVector. Its weight equals the orbit-sum form
        (1 - p)/a * sum_mu sum_i phi_p^(mu)(r_i); the two are compared.

    Raises:
        NotPIntegralError: If p divides some denominator.

    Examples:
        >>> weight_w_p((Fraction(-1, 3), Fraction(-2, 3)), 2).weight
        Fraction(1, 1)
        >>> weight_w_p((-1, 0), 3).weight
        Fraction(2, 1)
    """
    require_prime(p)
    entries = require_boxed_vector(r, p)
    period = multiplicative_order(p, lcm_denominators(entries))
    scale = 1 - p**period
    digits = [int(scale * x) for x in entries]
    weight = Fraction(wt_p_vector(digits, p), period)
    orbit_weight = weight_by_orbits(entries, p, period)
    if orbit_weight != weight:
        raise ConsistencyError(f"w_p mismatch for {entries}: {weight} != {orbit_weight}")
    return WeightVector(entries, p, period, weight)


def weight_by_orbits(r: Sequence[Rational], p: int, period: Optional[int] = None) -> Fraction:
    """Return (1 - p)/a * sum over mu < a of sum_i phi_p^(mu)(r_i).

    Any multiple of the true period gives the same value.
    """
    entries = tuple(Fraction(x) for x in r)
    if period is None:
        period = multiplicative_order(p, lcm_denominators(entries))
    total = Fraction(0)
    for x in entries:
        orbit = phi_orbit(x, p)
        total += sum(orbit[mu % len(orbit)] for mu in range(period))
    return Fraction(1 - p, period) * total
