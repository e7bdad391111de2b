"""Certified real/complex enclosures, polynomial roots and Mahler measure.

Interval endpoints are exact dyadic rationals. Ring operations are done
exactly and then rounded outward to a ``2**-bits`` grid; square roots use
integer square roots; transcendental functions go through a private mpmath
interval context (:class:`IntervalContext`), never the global ``iv``.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, isqrt
from typing import Callable, Iterable, Iterator, Optional, TypeVar, Union

from mpmath import MPContext
from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import NoConvergence
from sympy import Poly, Symbol, integer_nthroot
from sympy.polys.domains import ZZ

from .config import settings
from .exactcore import PolyZ, as_fraction
from .exceptions import NonConvergenceError, PrecisionFailureError, PreconditionError
from .logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
Number = Union[int, Fraction]

_GUARD_BITS = 16
_DECIMAL_PLACES = 15


def _round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(floor(x * scale), scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(ceil(x * scale), scale)


def sqrt_down(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2**-bits not exceeding sqrt(x)."""
    if x <= 0:
        return Fraction(0)
    scaled = (x.numerator << (2 * bits)) // x.denominator
    return Fraction(isqrt(scaled), 1 << bits)


def sqrt_up(x: Fraction, bits: int) -> Fraction:
    """Smallest multiple of 2**-bits not below sqrt(x)."""
    if x <= 0:
        return Fraction(0)
    root = sqrt_down(x, bits)
    return root if root * root == x else root + Fraction(1, 1 << bits)


def decimal_string(x: Fraction, places: int = _DECIMAL_PLACES, round_up: bool = False) -> str:
    """Fixed-point rendering of x, rounded toward -inf (or +inf when round_up)."""
    scaled = x * 10**places
    n = ceil(scaled) if round_up else floor(scaled)
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


@dataclass(frozen=True)
class RealInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"Empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Number) -> "RealInterval":
        x = Fraction(x)
        return cls(x, x)

    @classmethod
    def around(cls, x: Number, radius: Number) -> "RealInterval":
        x, radius = Fraction(x), abs(Fraction(radius))
        return cls(x - radius, x + radius)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def __add__(self, other: "IntervalLike") -> "RealInterval":
        other = as_interval(other)
        return RealInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "RealInterval":
        return RealInterval(-self.hi, -self.lo)

    def __sub__(self, other: "IntervalLike") -> "RealInterval":
        return self + (-as_interval(other))

    def __rsub__(self, other: "IntervalLike") -> "RealInterval":
        return as_interval(other) - self

    def __mul__(self, other: "IntervalLike") -> "RealInterval":
        other = as_interval(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RealInterval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other: "IntervalLike") -> "RealInterval":
        other = as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError(f"Division by an interval containing zero: {other}")
        return self * RealInterval(1 / other.hi, 1 / other.lo)

    def __abs__(self) -> "RealInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval(Fraction(0), max(-self.lo, self.hi))

    def square(self) -> "RealInterval":
        a = abs(self)
        return RealInterval(a.lo * a.lo, a.hi * a.hi)

    def sqrt(self, bits: int) -> "RealInterval":
        if self.hi < 0:
            raise PreconditionError(f"sqrt of a negative interval {self}")
        return RealInterval(sqrt_down(self.lo, bits), sqrt_up(self.hi, bits))

    def clamp_low(self, floor_value: Number) -> "RealInterval":
        """Pointwise max(floor_value, x)."""
        f = Fraction(floor_value)
        return RealInterval(max(self.lo, f), max(self.hi, f))

    def rounded(self, bits: int) -> "RealInterval":
        """Outward rounding onto the 2**-bits grid."""
        return RealInterval(_round_down(self.lo, bits), _round_up(self.hi, bits))

    def contains(self, x: Union[Number, "RealInterval"]) -> bool:
        if isinstance(x, RealInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def overlaps(self, other: "RealInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def inflate(self, slack: Number) -> "RealInterval":
        slack = abs(Fraction(slack))
        return RealInterval(self.lo - slack, self.hi + slack)

    def hull(self, other: "RealInterval") -> "RealInterval":
        return RealInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    @staticmethod
    def maximum(values: Iterable["RealInterval"]) -> "RealInterval":
        """Enclosure of the max of the enclosed quantities."""
        items = list(values)
        if not items:
            raise PreconditionError("max of no intervals")
        return RealInterval(max(v.lo for v in items), max(v.hi for v in items))

    @staticmethod
    def minimum(values: Iterable["RealInterval"]) -> "RealInterval":
        items = list(values)
        if not items:
            raise PreconditionError("min of no intervals")
        return RealInterval(min(v.lo for v in items), min(v.hi for v in items))

    def to_json(self, places: int = _DECIMAL_PLACES) -> dict:
        return {"lo": decimal_string(self.lo, places), "hi": decimal_string(self.hi, places, round_up=True)}

    @classmethod
    def from_json(cls, data: dict) -> "RealInterval":
        return cls(as_fraction(data["lo"]), as_fraction(data["hi"]))

    def __str__(self) -> str:
        return f"[{decimal_string(self.lo, 12)}, {decimal_string(self.hi, 12, round_up=True)}]"


IntervalLike = Union[RealInterval, int, Fraction]


def as_interval(x: IntervalLike) -> RealInterval:
    if isinstance(x, RealInterval):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; convert with Fraction first")
    return RealInterval.point(x)


@dataclass(frozen=True)
class ComplexBox:
    """Axis-aligned box re x im in the complex plane."""

    re: RealInterval
    im: RealInterval

    @classmethod
    def point(cls, re: Number, im: Number = 0) -> "ComplexBox":
        return cls(RealInterval.point(re), RealInterval.point(im))

    @classmethod
    def around(cls, re: Number, im: Number, rad: Number) -> "ComplexBox":
        """The square of half-side rad centered at re + i*im."""
        return cls(RealInterval.around(re, rad), RealInterval.around(im, rad))

    @classmethod
    def from_complex(cls, z: complex, rad: float = 0.0) -> "ComplexBox":
        return cls.around(Fraction(z.real), Fraction(z.imag), Fraction(rad))

    @property
    def center(self) -> complex:
        return complex(float(self.re.mid), float(self.im.mid))

    @property
    def rad(self) -> Fraction:
        """Upper bound on the half-diagonal."""
        half = (self.re.width / 2) ** 2 + (self.im.width / 2) ** 2
        return sqrt_up(half, 64)

    def __add__(self, other: "ComplexBox") -> "ComplexBox":
        return ComplexBox(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexBox") -> "ComplexBox":
        return ComplexBox(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexBox":
        return ComplexBox(-self.re, -self.im)

    def __mul__(self, other: Union["ComplexBox", IntervalLike]) -> "ComplexBox":
        if not isinstance(other, ComplexBox):
            factor = as_interval(other)
            return ComplexBox(self.re * factor, self.im * factor)
        return ComplexBox(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def scale(self, factor: RealInterval) -> "ComplexBox":
        return ComplexBox(self.re * factor, self.im * factor)

    def conjugate(self) -> "ComplexBox":
        return ComplexBox(self.re, -self.im)

    def rounded(self, bits: int) -> "ComplexBox":
        return ComplexBox(self.re.rounded(bits), self.im.rounded(bits))

    def abs_squared(self) -> RealInterval:
        return self.re.square() + self.im.square()

    def abs(self, bits: int) -> RealInterval:
        """Enclosure of {|z| : z in box}."""
        return self.abs_squared().sqrt(bits)

    def contains_zero(self) -> bool:
        return self.re.contains(0) and self.im.contains(0)

    def to_csv_row(self) -> str:
        return f"{float(self.re.mid)!r},{float(self.im.mid)!r},{float(self.rad)!r}"

    @classmethod
    def from_csv_row(cls, row: str) -> "ComplexBox":
        """Parse "re,im[,rad]"; numbers are read as exact decimals."""
        fields = [f.strip() for f in row.split(",")]
        if len(fields) not in (2, 3) or not all(fields):
            raise PreconditionError(f"Expected 're,im[,rad]', got {row!r}")
        re, im = as_fraction(fields[0]), as_fraction(fields[1])
        rad = as_fraction(fields[2]) if len(fields) == 3 else Fraction(0)
        if rad < 0:
            raise PreconditionError(f"Negative radius in {row!r}")
        return cls.around(re, im, rad)


@dataclass(frozen=True)
class PointTuple:
    """Unordered tuple of complex boxes; multiplicities count."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise PreconditionError("A point tuple needs at least one point")

    @classmethod
    def from_complex(cls, values: Iterable[complex]) -> "PointTuple":
        return cls(tuple(ComplexBox.from_complex(complex(v)) for v in values))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[ComplexBox]:
        return iter(self.points)

    def __getitem__(self, index: int) -> ComplexBox:
        return self.points[index]

    def moduli(self, bits: int) -> "list[RealInterval]":
        return [z.abs(bits) for z in self.points]

    def norm(self, bits: int) -> RealInterval:
        """Enclosure of the largest modulus."""
        return RealInterval.maximum(self.moduli(bits))

    def centers(self) -> "list[complex]":
        return [z.center for z in self.points]

    def max_rad(self) -> Fraction:
        return max(z.rad for z in self.points)

    def to_csv(self) -> str:
        return "\n".join(z.to_csv_row() for z in self.points) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PointTuple":
        rows = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        return cls(tuple(ComplexBox.from_csv_row(r) for r in rows))


class IntervalContext:
    """A private mpmath interval context at a fixed working precision."""

    def __init__(self, bits: int):
        self.bits = bits
        self._iv = MPIntervalContext()
        self._iv.prec = bits + _GUARD_BITS

    def _raw(self, x: Fraction, rnd: str):
        return libmp.from_rational(x.numerator, x.denominator, self._iv.prec, rnd)

    def lift(self, x: IntervalLike):
        x = as_interval(x)
        return self._iv.make_mpf((self._raw(x.lo, libmp.round_floor), self._raw(x.hi, libmp.round_ceiling)))

    def lower(self, value) -> RealInterval:
        a, b = value._mpi_
        try:
            lo = Fraction(*libmp.to_rational(a))
            hi = Fraction(*libmp.to_rational(b))
        except ValueError as e:
            raise PrecisionFailureError(f"Unbounded enclosure at {self.bits} bits") from e
        return RealInterval(lo, hi).rounded(self.bits)

    def exp(self, x: IntervalLike) -> RealInterval:
        return self.lower(self._iv.exp(self.lift(x)))

    def log(self, x: IntervalLike) -> RealInterval:
        x = as_interval(x)
        if x.lo <= 0:
            raise PreconditionError(f"log of a non-positive interval {x}")
        return self.lower(self._iv.log(self.lift(x)))

    def pow(self, base: IntervalLike, exponent: IntervalLike) -> RealInterval:
        """base**exponent for a positive base."""
        return self.exp(self.log(base) * as_interval(exponent))

    def pi(self) -> RealInterval:
        return self.lower(self._iv.pi)

    def cis(self, turns: Fraction) -> ComplexBox:
        """Enclosure of exp(2*pi*i*turns)."""
        turns = Fraction(turns) % 1
        exact = {
            Fraction(0): (1, 0),
            Fraction(1, 4): (0, 1),
            Fraction(1, 2): (-1, 0),
            Fraction(3, 4): (0, -1),
        }
        if turns in exact:
            return ComplexBox.point(*exact[turns])
        angle = self._iv.mpf(2) * self._iv.pi * self.lift(turns)
        return ComplexBox(self.lower(self._iv.cos(angle)), self.lower(self._iv.sin(angle)))


def radical_root(n: Number, d: int, bits: int) -> RealInterval:
    """Enclosure of the real root n**(1/d), n >= 0, exact when the root is rational dyadic."""
    n = Fraction(n)
    if d < 1 or n < 0:
        raise PreconditionError(f"radical_root needs d >= 1 and n >= 0, got d={d}, n={n}")
    scaled_num = n.numerator << (bits * d)
    floor_scaled, divisible = divmod(scaled_num, n.denominator)
    root, exact = integer_nthroot(floor_scaled, d)
    lo = Fraction(int(root), 1 << bits)
    if exact and divisible == 0:
        return RealInterval(lo, lo)
    return RealInterval(lo, lo + Fraction(1, 1 << bits))


def with_refinement(fn: Callable[[int], T], bits: Optional[int] = None, ceiling: Optional[int] = None) -> T:
    """Call fn(bits), doubling bits on NonConvergenceError until the ceiling."""
    bits = bits or settings.NORTHCOTT_PRECISION_BITS
    ceiling = ceiling or settings.NORTHCOTT_PRECISION_CEILING
    while True:
        try:
            return fn(bits)
        except NonConvergenceError as e:
            if bits >= ceiling:
                raise PrecisionFailureError(f"Precision ceiling {ceiling} reached: {e}") from e
            bits = min(2 * bits, ceiling)
            logger.debug("Escalating precision", bits=bits, reason=str(e))


def bits_for(tol: Fraction) -> int:
    """Grid bits fine enough to leave room for a tolerance."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    return max(53, ceil(1 / tol).bit_length() + 32)


# --- roots ------------------------------------------------------------------


def _pure_radical_roots(d: int, n: int, bits: int) -> PointTuple:
    ctx = IntervalContext(bits)
    modulus = radical_root(n, d, bits)
    return PointTuple(tuple(ctx.cis(Fraction(j, d)).scale(modulus).rounded(bits) for j in range(d)))


def _complex_fraction(z) -> "tuple[Fraction, Fraction]":
    return Fraction(*libmp.to_rational(z.real._mpf_)), Fraction(*libmp.to_rational(z.imag._mpf_))


def _cmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _abs2(a) -> Fraction:
    return a[0] * a[0] + a[1] * a[1]


def _certified_squarefree_roots(coeffs_desc: "list[int]", tol: Fraction, bits: int) -> "list[ComplexBox]":
    n = len(coeffs_desc) - 1
    if n == 1:
        root = Fraction(-coeffs_desc[1], coeffs_desc[0])
        return [ComplexBox.point(root)]
    mp = MPContext()
    mp.prec = bits
    try:
        seeds = mp.polyroots(coeffs_desc, maxsteps=200, extraprec=bits)
    except NoConvergence as e:
        raise NonConvergenceError(f"root iteration did not converge at {bits} bits") from e
    zs = [tuple(_round_down(c, bits) for c in _complex_fraction(mp.mpc(z))) for z in seeds]

    lc2 = Fraction(coeffs_desc[0]) ** 2
    radii = []
    for i, z in enumerate(zs):
        value = (Fraction(0), Fraction(0))
        for c in coeffs_desc:
            value = _cmul(value, z)
            value = (value[0] + c, value[1])
        denominator = lc2
        for j, w in enumerate(zs):
            if j != i:
                denominator *= _abs2((z[0] - w[0], z[1] - w[1]))
        if denominator == 0:
            raise NonConvergenceError("coincident root seeds")
        radii.append(sqrt_up(n * n * _abs2(value) / denominator, bits))

    for i in range(n):
        for j in range(i + 1, n):
            gap = sqrt_down(_abs2((zs[i][0] - zs[j][0], zs[i][1] - zs[j][1])), bits)
            if radii[i] + radii[j] >= gap:
                raise NonConvergenceError("inclusion disks overlap")
    if max(radii) > tol:
        raise NonConvergenceError(f"inclusion radius {float(max(radii)):.3e} above tol")
    return [ComplexBox.around(z[0], z[1], r) for z, r in zip(zs, radii)]


def complex_roots(
    f: PolyZ,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
    ceiling: Optional[int] = None,
) -> PointTuple:
    """All complex roots of f, with multiplicity, each boxed within radius tol.

    Pure radicals x^d - n are emitted in closed form; other polynomials are
    split into squarefree parts, seeded by mpmath's simultaneous iteration and
    certified with Weierstrass inclusion disks.

    Raises:
        PrecisionFailureError: certification failed up to the precision ceiling.
    """
    tol = Fraction(tol)
    if f.is_zero() or f.degree < 1:
        raise PreconditionError("complex_roots needs a polynomial of degree >= 1")
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    start = max(bits or settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))

    radical = f.pure_radical_form()
    if radical is not None:
        d, n = radical
        return _pure_radical_roots(d, n, start)

    x = Symbol("x")
    _, parts = Poly.from_list(f.descending(), x, domain=ZZ).sqf_list()
    boxes: list = []
    for part, multiplicity in parts:
        coeffs = [int(c) for c in part.all_coeffs()]
        roots = with_refinement(lambda b, c=coeffs: _certified_squarefree_roots(c, tol, b), start, ceiling)
        for root in roots:
            boxes.extend([root] * multiplicity)
    return PointTuple(tuple(boxes))


def mahler_measure(
    f: PolyZ,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
    ceiling: Optional[int] = None,
) -> RealInterval:
    """Enclosure of |lead(f)| * prod max(1, |root|), of width at most tol."""
    tol = Fraction(tol)
    if f.is_zero():
        raise PreconditionError("Mahler measure of the zero polynomial")
    lead = RealInterval.point(abs(f.leading))
    if f.degree < 1:
        return lead
    ceiling = ceiling or settings.NORTHCOTT_PRECISION_CEILING
    root_tol = tol
    work_bits = max(bits or settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    while True:
        roots = complex_roots(f, root_tol, work_bits, ceiling)
        measure = lead
        for z in roots:
            measure = (measure * z.abs(work_bits).clamp_low(1)).rounded(work_bits)
        if measure.width <= tol:
            return measure
        if work_bits >= ceiling:
            raise PrecisionFailureError(f"Mahler measure width {float(measure.width):.3e} above tol at ceiling")
        root_tol /= 1 << 16
        work_bits = min(2 * work_bits, ceiling)
        logger.debug("Tightening Mahler measure", bits=work_bits)
