"""Exact arithmetic kernel.

Integers are Python ``int`` and rationals are :class:`fractions.Fraction`.
Polynomials over Z and over F_q are stored with ascending coefficients;
the F_q arithmetic itself is delegated to sympy's ``galoistools`` (which
works on descending lists), so the conversions live on the two poly types.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd
from tokenize import TokenError
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from sympy import Poly, Symbol, factorint, isprime, nextprime
from sympy.core.sympify import SympifyError
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.densearith import dup_mul, dup_sub
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_from_int_poly, gf_gcd, gf_monic, gf_quo, gf_rem, gf_sqf_part
from sympy.polys.polyerrors import BasePolynomialError

from .exceptions import (
    ElementSyntaxError,
    PrecisionFailureError,
    PreconditionError,
    PrimeNotFoundError,
)
from .logging_config import get_logger

logger = get_logger(__name__)

RationalLike = Union[int, Fraction, str]

_NAIVE_MAX_Q = 50
_NAIVE_MAX_DEGREE = 12


def as_fraction(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, Fraction, or decimal/"num/den" string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise PreconditionError(f"Not an exact rational: {value!r}") from e


def fraction_str(value: Fraction) -> str:
    """Serialize a rational as "num" or "num/den"."""
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


# --- primes ---------------------------------------------------------------


def is_prime(n: int) -> bool:
    """Primality via sympy: deterministic below 2^64, Baillie-PSW above."""
    if n < 0:
        raise PreconditionError("is_prime expects a nonnegative integer")
    return bool(isprime(n))


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    return int(nextprime(n))


def primes_from(start: int) -> Iterator[int]:
    """Yield the primes >= start in increasing order."""
    p = start - 1
    while True:
        p = next_prime(p)
        yield p


def _check_progression(a: int, m: int) -> None:
    if m < 1 or not 0 <= a < m:
        raise PreconditionError(f"Residue {a} must satisfy 0 <= a < m with m >= 1 (m={m})")
    if gcd(a, m) != 1:
        raise PreconditionError(f"gcd({a}, {m}) != 1: the progression holds at most one prime")


def find_prime_in_ap(
    lo: RationalLike,
    hi: RationalLike,
    a: int,
    m: int,
    exclude: Iterable[int] = (),
) -> int:
    """Smallest prime p with lo < p < hi, p = a (mod m) and p not excluded.

    Raises:
        PrimeNotFoundError: when the scan runs off the end of the interval.
    """
    lo_q, hi_q = as_fraction(lo), as_fraction(hi)
    if not 0 < lo_q < hi_q:
        raise PreconditionError(f"Interval must satisfy 0 < lo < hi, got ({lo_q}, {hi_q})")
    _check_progression(a, m)
    excluded = frozenset(exclude)

    start = floor(lo_q) + 1
    candidate = start + (a - start) % m
    scanned = 0
    while candidate < hi_q:
        scanned += 1
        if candidate not in excluded and is_prime(candidate):
            logger.debug("Prime found", prime=candidate, residue=a, modulus=m, scanned=scanned)
            return candidate
        candidate += m
    raise PrimeNotFoundError(lo_q, hi_q, a, m)


Bracket = Callable[[int], "tuple[Fraction, Fraction]"]


@dataclass(frozen=True)
class WindowEdge:
    """One end of a prime window: an exact rational or a refinable bracket.

    ``bracket(bits)`` must return rationals (lo, hi) enclosing the edge,
    tightening as ``bits`` grows.
    """

    exact: Optional[Fraction] = None
    bracket: Optional[Bracket] = None
    closed: bool = False

    def __post_init__(self):
        if (self.exact is None) == (self.bracket is None):
            raise PreconditionError("A window edge is either exact or bracketed, not both")


class _EdgeCursor:
    """Caches the current bracket of an edge and refines it only on ambiguity."""

    def __init__(self, edge: WindowEdge, bits: int, ceiling: int):
        self.edge = edge
        self.bits = bits
        self.ceiling = ceiling
        self.current = None if edge.bracket is None else edge.bracket(bits)

    def approx_floor(self) -> int:
        if self.edge.exact is not None:
            return floor(self.edge.exact)
        return floor(self.current[0])

    def compare(self, n: int) -> int:
        """Sign of n - edge, refining precision until decided."""
        if self.edge.exact is not None:
            diff = n - self.edge.exact
            return (diff > 0) - (diff < 0)
        while True:
            lo, hi = self.current
            if n < lo:
                return -1
            if n > hi:
                return 1
            if self.bits >= self.ceiling:
                raise PrecisionFailureError(f"Cannot separate {n} from a window edge at {self.bits} bits")
            self.bits = min(2 * self.bits, self.ceiling)
            logger.debug("Refining window edge", candidate=n, bits=self.bits)
            self.current = self.edge.bracket(self.bits)


def compare_to_edge(n: int, edge: WindowEdge, bits: int = 96, ceiling: int = 2048) -> int:
    """Sign of n - edge, decided exactly."""
    return _EdgeCursor(edge, bits, ceiling).compare(n)


def in_window(
    n: int, lower: WindowEdge, upper: Optional[WindowEdge], bits: int = 96, ceiling: int = 2048
) -> bool:
    """Is n inside the window, honouring which edges are closed?"""
    below = compare_to_edge(n, lower, bits, ceiling)
    if below < 0 or (below == 0 and not lower.closed):
        return False
    if upper is None:
        return True
    above = compare_to_edge(n, upper, bits, ceiling)
    return above < 0 or (above == 0 and upper.closed)


def find_prime_in_window(
    lower: WindowEdge,
    upper: Optional[WindowEdge],
    a: int = 0,
    m: int = 1,
    exclude: Iterable[int] = (),
    bits: int = 96,
    ceiling: int = 2048,
    max_candidates: Optional[int] = None,
) -> int:
    """Smallest admissible prime inside a window whose edges may be transcendental.

    ``upper=None`` scans upward without an upper edge, bounded by
    ``max_candidates``. Membership of every prime candidate is decided exactly.

    Raises:
        PrimeNotFoundError: the window (or the candidate budget) is exhausted.
        PrecisionFailureError: an edge could not be separated from a candidate.
    """
    if m > 1:
        _check_progression(a, m)
    excluded = frozenset(exclude)
    low = _EdgeCursor(lower, bits, ceiling)
    high = None if upper is None else _EdgeCursor(upper, bits, ceiling)

    start = max(low.approx_floor(), 0)
    candidate = start + (a - start) % m
    scanned = 0
    while True:
        if max_candidates is not None and scanned >= max_candidates:
            break
        scanned += 1
        if high is not None:
            position = high.compare(candidate)
            if position > 0 or (position == 0 and not upper.closed):
                break
        if candidate not in excluded and is_prime(candidate):
            position = low.compare(candidate)
            if position > 0 or (position == 0 and lower.closed):
                logger.debug("Window prime found", prime=candidate, scanned=scanned)
                return candidate
        candidate += m
    lo_repr = lower.exact if lower.exact is not None else low.current[0]
    hi_repr = "inf" if high is None else (upper.exact if upper.exact is not None else high.current[1])
    raise PrimeNotFoundError(lo_repr, hi_repr, a, m)


# --- polynomials ------------------------------------------------------------


def _strip(coeffs: Sequence[int]) -> tuple:
    values = list(coeffs)
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


@dataclass(frozen=True)
class PolyZ:
    """Integer polynomial, coefficients in ascending degree."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(int(c) for c in self.coeffs))

    @classmethod
    def pure_radical(cls, d: int, n: int) -> "PolyZ":
        """x^d - n."""
        return cls((-n,) + (0,) * (d - 1) + (1,))

    @classmethod
    def parse(cls, src: str, var: str = "x") -> "PolyZ":
        """Parse text such as "x^3-17" into an integer polynomial."""
        x = Symbol(var)
        try:
            expr = parse_expr(
                src,
                local_dict={var: x},
                transformations=standard_transformations + (convert_xor,),
            )
            poly = Poly(expr, x, domain=ZZ)
        except (SympifyError, SyntaxError, TokenError, TypeError, BasePolynomialError) as e:
            raise ElementSyntaxError(f"Cannot parse polynomial {src!r}: {e}") from e
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    def descending(self) -> list:
        return list(reversed(self.coeffs))

    def derivative(self) -> "PolyZ":
        return PolyZ(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def pure_radical_form(self) -> Optional["tuple[int, int]"]:
        """Return (d, n) when the polynomial is x^d - n with n > 0."""
        if self.degree < 1 or not self.is_monic():
            return None
        if any(self.coeffs[1:-1]) or self.coeffs[0] >= 0:
            return None
        return self.degree, -self.coeffs[0]

    def reduce(self, q: int) -> "PolyFq":
        return PolyFq(q, self.coeffs)

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}" if mono else str(abs(c))
            terms.append(("-" if c < 0 else "+") + body)
        text = "".join(terms)
        return text[1:] if text.startswith("+") else text


@dataclass(frozen=True)
class PolyFq:
    """Polynomial over the prime field F_q, ascending coefficients in [0, q)."""

    q: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(int(c) % self.q for c in self.coeffs))

    @classmethod
    def from_gf(cls, q: int, descending: Sequence[int]) -> "PolyFq":
        return cls(q, tuple(int(c) for c in reversed(list(descending))))

    def gf(self) -> list:
        """Descending coefficient list in sympy's galoistools convention."""
        return gf_from_int_poly(list(reversed(self.coeffs)), self.q)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lift(self) -> PolyZ:
        """Integer lift with coefficients in [0, q)."""
        return PolyZ(self.coeffs)

    def __str__(self) -> str:
        return f"{PolyZ(self.coeffs)} (mod {self.q})"


def _require_prime(q: int, what: str = "q") -> None:
    if not is_prime(q):
        raise PreconditionError(f"{what}={q} must be prime")


def dedekind_radical_split(f: PolyZ, q: int) -> "tuple[PolyFq, PolyFq, PolyFq]":
    """The (g, h, F) triple of the gcd form of Dedekind's criterion.

    g is the radical of f mod q, h = (f mod q) / g, and F = (G*H - f) / q
    reduced mod q for the [0, q) lifts G, H of g and h.
    """
    if not f.is_monic():
        raise PreconditionError(f"Dedekind's criterion needs a monic polynomial, got {f}")
    _require_prime(q)
    fbar = f.reduce(q).gf()
    g = gf_sqf_part(fbar, q, ZZ)
    h = gf_quo(fbar, g, q, ZZ)
    lifted = dup_mul([int(c) for c in g], [int(c) for c in h], ZZ)
    diff = dup_sub(lifted, f.descending(), ZZ)
    if any(int(c) % q for c in diff):
        raise AssertionError("lifted radical split does not reduce to f mod q")
    F = [int(c) // q for c in diff]
    return PolyFq.from_gf(q, g), PolyFq.from_gf(q, h), PolyFq(q, tuple(reversed(F)))


def dedekind_index_coprime(f: PolyZ, q: int) -> bool:
    """True iff the prime q does not divide the index [O_K : Z[theta]] for a root theta of f."""
    g, h, F = dedekind_radical_split(f, q)
    common = gf_gcd(gf_gcd(F.gf(), g.gf(), q, ZZ), h.gf(), q, ZZ)
    return len(common) <= 1


def _monic_candidates(q: int, degree: int) -> Iterator[list]:
    for lower in itertools.product(range(q), repeat=degree):
        yield [1] + list(lower)


def factor_fq_naive(f: PolyFq) -> "list[tuple[PolyFq, int]]":
    """Factor into monic irreducibles by exhaustive trial division.

    Only for small fields and degrees; this is a cross-check, not a factorizer.
    """
    q = f.q
    if q > _NAIVE_MAX_Q or f.degree > _NAIVE_MAX_DEGREE:
        raise PreconditionError(f"Naive factorization needs q <= {_NAIVE_MAX_Q} and degree <= {_NAIVE_MAX_DEGREE}")
    if f.is_zero():
        raise PreconditionError("Cannot factor the zero polynomial")
    _require_prime(q)
    _, rest = gf_monic(f.gf(), q, ZZ)
    factors = []
    k = 1
    while 2 * k <= len(rest) - 1:
        for candidate in _monic_candidates(q, k):
            multiplicity = 0
            while len(rest) - 1 >= k and not gf_rem(rest, candidate, q, ZZ):
                rest = gf_quo(rest, candidate, q, ZZ)
                multiplicity += 1
            if multiplicity:
                factors.append((PolyFq.from_gf(q, candidate), multiplicity))
        k += 1
    if len(rest) > 1:
        factors.append((PolyFq.from_gf(q, rest), 1))
    return factors


# --- radical fields -----------------------------------------------------------


def pure_radical_discriminant(d: int, n: int) -> int:
    """|disc Z[n^(1/d)]| = d^d * n^(d-1) for irreducible x^d - n."""
    if d < 1 or n < 1:
        raise PreconditionError(f"Need d >= 1 and n >= 1, got d={d}, n={n}")
    return d**d * n ** (d - 1)


def _require_odd_prime(value: int, name: str) -> None:
    if value % 2 == 0 or not is_prime(value):
        raise PreconditionError(f"{name}={value} must be an odd prime")


def fermat_quotient_divides(p: int, d: int) -> bool:
    """True iff d^2 divides p^d - p, i.e. p^(d-1) = 1 (mod d^2)."""
    _require_odd_prime(p, "p")
    _require_odd_prime(d, "d")
    if p == d:
        raise PreconditionError("p and d must be distinct")
    return pow(p, d - 1, d * d) == 1


def fermat_quotient_residue(d: int) -> int:
    """((d-1)^(d-1) - 1) / d mod d; equals 1 for every odd prime d."""
    _require_odd_prime(d, "d")
    r = pow(d - 1, d - 1, d * d)
    return ((r - 1) // d) % d


def eisenstein_applicable(d: int, n: int) -> bool:
    """True iff some prime divides n exactly once, making x^d - n irreducible."""
    if d < 2 or n < 2:
        return False
    if is_prime(n):
        return True
    return any(e == 1 for e in factorint(n).values())
