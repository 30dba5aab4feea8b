"""Denominator constants for algebraic power series in one variable.

For f = sum c_m X^m annihilated by F(X, f) = 0 (F of minimal Z-degree), the
tail f~ = sum_{m > M} c_m X^(m - M') satisfies rho * f~ = X * F0(X, f~) with
rho an integer and F0 integral. The recursion this induces gives
rho^m gamma_m integral for the coefficients gamma_m of f~, hence an integer N
with N^m c_m integral for all m >= 1.

Series are handled as truncated lists of Fractions; F and F0 are sympy
polynomials in X and Z.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import QQ, ZZ, Integer, Poly, factorint, symbols
from sympy.parsing.sympy_parser import parse_expr

from gkz_integrality.constants import MAX_TRUNCATION_LENGTH
from gkz_integrality.exceptions import (
    InvalidInputError,
    PrefixError,
    RecursionMismatchError,
)

logger = logging.getLogger(__name__)

X, Z = symbols("X Z")

_Coefficients = Dict[Tuple[int, int], Fraction]


# --- Polynomial and series helpers ---

def _coefficients(poly: Poly) -> _Coefficients:
    """{(i, j): a_ij} for F = sum a_ij X^i Z^j."""
    return {(int(i), int(j)): Fraction(int(c.p), int(c.q)) for (i, j), c in poly.terms() if c}


def _mul(a: Sequence[Fraction], b: Sequence[Fraction], length: Optional[int] = None
         ) -> List[Fraction]:
    """Product of coefficient lists, truncated to length terms if given."""
    if not a or not b:
        return []
    size = len(a) + len(b) - 1 if length is None else min(length, len(a) + len(b) - 1)
    out = [Fraction(0)] * size
    for i, x in enumerate(a):
        if x == 0 or i >= size:
            continue
        for j, y in enumerate(b[:size - i]):
            out[i + j] += x * y
    return out


def _add_into(target: List[Fraction], values: Sequence[Fraction], shift: int = 0,
              scale: Fraction = Fraction(1)) -> None:
    needed = shift + len(values)
    if len(target) < needed:
        target.extend([Fraction(0)] * (needed - len(target)))
    for i, x in enumerate(values):
        target[shift + i] += scale * x


def _powers(series: Sequence[Fraction], top: int, length: Optional[int]) -> List[List[Fraction]]:
    result = [[Fraction(1)]]
    for _ in range(top):
        result.append(_mul(result[-1], series, length))
    return result


def _evaluate(coeffs: _Coefficients, series: Sequence[Fraction],
              length: Optional[int] = None) -> List[Fraction]:
    """F(X, series), exact or truncated to length terms."""
    degree = max((j for _, j in coeffs), default=0)
    powers = _powers(series, degree, length)
    out: List[Fraction] = []
    for (i, j), a in coeffs.items():
        if length is not None and i >= length:
            continue
        part = powers[j] if length is None else powers[j][:length - i]
        _add_into(out, part, i, a)
    if length is not None:
        out = (out + [Fraction(0)] * length)[:length]
    return out


def _derivative(coeffs: _Coefficients) -> _Coefficients:
    return {(i, j - 1): a * j for (i, j), a in coeffs.items() if j > 0}


def _order(values: Sequence[Fraction]) -> Optional[int]:
    return next((i for i, x in enumerate(values) if x != 0), None)


def to_annihilator(value: Union[str, Poly]) -> Poly:
    """Parse an annihilator in X and Z into a Poly over QQ.

    Examples:
        >>> to_annihilator("Z**2 - 1 - X").degree(Z)
        2
    """
    if isinstance(value, Poly):
        return Poly(value.as_expr(), X, Z, domain=QQ)
    try:
        expr = parse_expr(value, local_dict={"X": X, "Z": Z})
        poly = Poly(expr, X, Z, domain=QQ)
    except Exception as exc:  # sympy raises a wide range of parse errors
        raise InvalidInputError(f"Cannot parse annihilator {value!r}: {exc}") from exc
    return poly


# --- Algebraic series ---

@dataclass(frozen=True)
class AlgebraicSeries:
    """A power series prefix together with an annihilating polynomial.

    Attributes:
        F: Polynomial in X, Z with rational coefficients and F(X, f) = 0.
        prefix: c_0, ..., c_T.
    """

    F: Poly
    prefix: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        """Check that F annihilates the prefix modulo X^(T+1)."""
        object.__setattr__(self, "F", to_annihilator(self.F))
        object.__setattr__(self, "prefix", tuple(Fraction(c) for c in self.prefix))
        if not self.prefix:
            raise PrefixError("The prefix is empty")
        if self.F.is_zero or self.F.degree(Z) < 1:
            raise InvalidInputError("The annihilator must involve Z")
        residual = _evaluate(_coefficients(self.F), self.prefix, len(self.prefix))
        failing = _order(residual)
        if failing is not None:
            raise PrefixError(f"F(X, f) has a nonzero coefficient at X^{failing}")

    @property
    def T(self) -> int:  # noqa: N802
        """Index of the last known coefficient."""
        return len(self.prefix) - 1

    @classmethod
    def from_simple_root(cls, F: Union[str, Poly], c0: Fraction,  # noqa: N803
                         length: int) -> AlgebraicSeries:
        """Generate the prefix of the root with f(0) = c0, when F_Z(0, c0) != 0.

        Raises:
            PrefixError: If c0 is not a simple root of F(0, Z).
        """
        if not 1 <= length <= MAX_TRUNCATION_LENGTH:
            raise InvalidInputError(f"Prefix length must lie in 1..{MAX_TRUNCATION_LENGTH}")
        poly = to_annihilator(F)
        coeffs = _coefficients(poly)
        start = Fraction(c0)
        if _evaluate(coeffs, [start], 1)[0] != 0:
            raise PrefixError(f"{start} is not a root of F(0, Z)")
        slope = _evaluate(_derivative(coeffs), [start], 1)[0]
        if slope == 0:
            raise PrefixError(f"{start} is a multiple root of F(0, Z)")
        prefix = [start]
        for m in range(1, length):
            residual = _evaluate(coeffs, prefix, m + 1)[m]
            prefix.append(-residual / slope)
        return cls(poly, tuple(prefix))


# --- Tail normalization ---

@dataclass(frozen=True)
class TailNormalization:
    """rho * f~ = X * F0(X, f~) for f~ = sum_{m > M} c_m X^(m - M').

    Attributes:
        mu: X-adic order of F_Z(X, f).
        M: 2 mu + 1.
        M_prime: mu + 1.
        rho: Integer factor.
        F0: Integral polynomial in X, Z.
        verified_order: The functional equation holds modulo X^verified_order.
    """

    mu: int
    M: int  # noqa: N815
    M_prime: int  # noqa: N815
    rho: int
    F0: Poly  # noqa: N815
    verified_order: int

    def tail(self, s: AlgebraicSeries) -> List[Fraction]:
        """Coefficients gamma_0, gamma_1, ... of f~ known from the prefix."""
        return [Fraction(0) if m + self.M_prime <= self.M else s.prefix[m + self.M_prime]
                for m in range(s.T - self.M_prime + 1)]


def _f1_coefficients(coeffs: _Coefficients, head: Sequence[Fraction], mu: int
                     ) -> Tuple[Fraction, _Coefficients]:
    """Return (phi_M(0), F1) for the truncation head = f_M."""
    big_m = len(head) - 1
    phi = _evaluate(_derivative(coeffs), head)
    if len(phi) <= mu or any(phi[:mu]) or phi[mu] == 0:
        raise PrefixError("F_Z(X, f_M) does not have the expected order")
    phi = phi[mu:]
    psi = _evaluate(coeffs, head)
    if any(psi[:big_m + 1]):
        raise PrefixError("F(X, f_M) is not divisible by X^(M+1)")
    psi = psi[big_m + 1:]

    # G_M(X, W) = sum_ij a_ij X^i sum_{k >= 2} C(j, k) f_M^(j-k) W^(k-2)
    degree = max(j for _, j in coeffs)
    powers = _powers(head, degree, None)
    g: Dict[int, List[Fraction]] = {}
    for (i, j), a in coeffs.items():
        for k in range(2, j + 1):
            _add_into(g.setdefault(k - 2, []), powers[j - k], i, a * comb(j, k))

    f1: _Coefficients = {}

    def put(i: int, j: int, value: Fraction) -> None:
        if value:
            f1[(i, j)] = f1.get((i, j), Fraction(0)) - value

    for i, value in enumerate(phi[1:]):
        put(i, 1, value)
    for i, value in enumerate(psi):
        put(i, 0, value)
    for k, poly in g.items():
        for i, value in enumerate(poly):
            put(i + k * (mu + 1), k + 2, value)
    return phi[0], {key: value for key, value in f1.items() if value}


def tail_normalize(s: AlgebraicSeries) -> TailNormalization:
    """Compute mu, M, M', rho and F0 and verify the functional equation on the prefix.

    Raises:
        PrefixError: If the prefix is too short to fix mu or to contain f_M.

    Examples:
        >>> tn = tail_normalize(AlgebraicSeries.from_simple_root("Z**2 - 1 - X", 1, 12))
        >>> tn.mu, tn.M, tn.M_prime, tn.rho
        (0, 1, 1, 8)
    """
    coeffs = _coefficients(s.F)
    derivative = _evaluate(_derivative(coeffs), s.prefix, len(s.prefix))
    mu = _order(derivative)
    if mu is None:
        raise PrefixError(f"F_Z(X, f) vanishes to order {s.T}; the prefix is too short")
    big_m, m_prime = 2 * mu + 1, mu + 1
    if big_m > s.T:
        raise PrefixError(f"The prefix must reach c_{big_m}, it stops at c_{s.T}")
    lead, f1 = _f1_coefficients(coeffs, s.prefix[:big_m + 1], mu)
    scale = lcm(lead.denominator, *(value.denominator for value in f1.values()))
    rho = int(lead * scale)
    f0 = {key: int(value * scale) for key, value in f1.items()}
    poly = Poly.from_dict({key: Integer(value) for key, value in f0.items()} or {(0, 0): 0},
                          X, Z, domain=ZZ)
    tn = TailNormalization(mu, big_m, m_prime, rho, poly, s.T - m_prime + 1)

    tail = tn.tail(s)
    length = len(tail)
    right = _evaluate({key: Fraction(value) for key, value in f0.items()}, tail, length)
    residual = [rho * g - (right[m - 1] if m else 0) for m, g in enumerate(tail)]
    failing = _order(residual)
    if failing is not None:
        raise PrefixError(f"rho f~ - X F0(X, f~) is nonzero at X^{failing}")
    logger.debug("Tail normalization mu=%d rho=%d with %d terms of F0", mu, rho, len(f0))
    return tn


# --- The denominator constant ---

@dataclass(frozen=True)
class DenominatorConstant:
    """An integer N with N^m c_m integral on the verified range.

    Attributes:
        N: The constant.
        tau: |rho|, which clears the tail.
        verified_up_to: N^m c_m is integral for 1 <= m <= verified_up_to.
    """

    N: int  # noqa: N815
    tau: int
    verified_up_to: int


def _scaled_tail(tn: TailNormalization, length: int) -> List[int]:
    """delta_m = rho^m gamma_m from the integral recursion."""
    f0 = {(int(i), int(j)): int(c) for (i, j), c in tn.F0.terms()}
    rho = tn.rho
    delta = [0] * length
    for m in range(1, length):
        powers = [[1] + [0] * (m - 1)]
        for _ in range(max((j for _, j in f0), default=0)):
            last = powers[-1]
            powers.append([sum(last[a] * delta[k - a] for a in range(k + 1)) for k in range(m)])
        total = 0
        for (i, j), a in f0.items():
            index = m - 1 - i
            if index >= 0:
                total += a * rho**i * powers[j][index]
        delta[m] = total
    return delta


def check_constant(n: int, prefix: Sequence[Fraction]) -> Optional[int]:
    """Return the first m >= 1 with n^m c_m not integral, or None.

    Examples:
        >>> check_constant(2, [1, Fraction(1, 2), Fraction(-1, 8)])
        2
    """
    for m, c in enumerate(prefix):
        if m and (Fraction(n) ** m * Fraction(c)).denominator != 1:
            return m
    return None


def denominator_constant(tn: TailNormalization, s: AlgebraicSeries) -> DenominatorConstant:
    """Return N with N^m c_m integral for 1 <= m <= T.

    The tail recursion rho^m gamma_m = sum mu_jh rho^j prod(rho^sigma gamma_sigma)
    is run in integers and compared with the prefix; N starts at tau = |rho|
    and is enlarged until c_1, ..., c_M are cleared.

    Raises:
        RecursionMismatchError: If the recursion disagrees with the prefix.
    """
    tail = tn.tail(s)
    delta = _scaled_tail(tn, len(tail))
    for m, (scaled, gamma) in enumerate(zip(delta, tail)):
        if Fraction(scaled) != Fraction(tn.rho) ** m * gamma:
            raise RecursionMismatchError(f"Recursion gives {scaled} for rho^{m} gamma_{m}")
    tau = abs(tn.rho)
    n = tau
    for m in range(1, min(tn.M, s.T) + 1):
        denominator = (Fraction(n) ** m * s.prefix[m]).denominator
        for prime, exponent in sorted(factorint(denominator).items()):
            n *= int(prime) ** (-(-exponent // m))
    failing = check_constant(n, s.prefix)
    if failing is not None:
        raise RecursionMismatchError(f"N = {n} fails at m = {failing}")
    logger.info("Denominator constant N=%d verified to m=%d", n, s.T)
    return DenominatorConstant(n, tau, s.T)


def reduce_constant(n: int, prefix: Sequence[Fraction]) -> int:
    """Strip prime factors from n while n^m c_m stays integral on the prefix.

    Examples:
        >>> reduce_constant(8, AlgebraicSeries.from_simple_root("Z**2 - 1 - X", 1, 30).prefix)
        4
    """
    if check_constant(n, prefix) is not None:
        raise InvalidInputError(f"{n} does not clear the prefix")
    for prime in sorted(factorint(n)):
        while n % prime == 0 and check_constant(n // prime, prefix) is None:
            n //= prime
    return n
