"""Radical towers, their elements and embeddings, and height functions."""

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import prod
from tokenize import TokenError
from typing import Iterable, Iterator, Optional, Sequence, Union

from sympy import Poly, Symbol
from sympy.core.sympify import SympifyError
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.domains import ZZ
from sympy.polys.polyerrors import BasePolynomialError

from .config import OrderingMode, settings
from .exactcore import (
    PolyZ,
    as_fraction,
    dedekind_index_coprime,
    eisenstein_applicable,
    fraction_str,
    is_prime,
)
from .exceptions import (
    ElementSyntaxError,
    EmptyTowerError,
    ExponentOutOfRangeError,
    IndeterminateError,
    InvalidStepError,
    NonConvergenceError,
    PreconditionError,
    UnknownVariableError,
    ZeroElementError,
)
from .logging_config import get_logger
from .models import StepRecord, TowerRecord
from .numerics import (
    ComplexBox,
    IntervalContext,
    PointTuple,
    RealInterval,
    bits_for,
    radical_root,
    with_refinement,
)

logger = get_logger(__name__)

Number = Union[int, Fraction]


@dataclass(frozen=True)
class RadicalStep:
    """Adjoin a root of x^d - p."""

    p: int
    d: int
    interval: Optional["tuple[Fraction, Fraction]"] = None

    @property
    def polynomial(self) -> PolyZ:
        return PolyZ.pure_radical(self.d, self.p)

    @property
    def congruence(self) -> bool:
        """p = d - 1 (mod d^2)."""
        return self.p % (self.d * self.d) == self.d - 1

    @property
    def eisenstein(self) -> bool:
        return eisenstein_applicable(self.d, self.p)

    @property
    def monogenic(self) -> bool:
        """Dedekind's criterion at both ramified primes p and d."""
        f = self.polynomial
        return all(dedekind_index_coprime(f, q) for q in sorted({self.p, self.d}))

    @property
    def in_interval(self) -> Optional[bool]:
        if self.interval is None:
            return None
        lo, hi = self.interval
        return lo < self.p < hi

    def generator_house(self, bits: int) -> RealInterval:
        return radical_root(self.p, self.d, bits)

    def to_record(self) -> StepRecord:
        interval = None if self.interval is None else [fraction_str(v) for v in self.interval]
        return StepRecord(p=str(self.p), d=str(self.d), interval=interval)


@dataclass(frozen=True)
class RadicalTower:
    """Z[p1^(1/d1), ..., pk^(1/dk)] with an ordering discipline on its primes."""

    steps: tuple
    ordering_mode: OrderingMode = OrderingMode.WEAK

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "ordering_mode", OrderingMode(self.ordering_mode))

    @classmethod
    def from_pairs(
        cls, pairs: Iterable["tuple[int, int]"], ordering_mode: Union[OrderingMode, str] = OrderingMode.WEAK
    ) -> "RadicalTower":
        return cls(tuple(RadicalStep(int(p), int(d)) for p, d in pairs), OrderingMode(ordering_mode))

    @classmethod
    def from_record(cls, record: TowerRecord) -> "RadicalTower":
        steps = []
        for s in record.steps:
            interval = None
            if s.interval is not None:
                if len(s.interval) != 2:
                    raise PreconditionError(f"Interval must have two endpoints, got {s.interval}")
                interval = (as_fraction(s.interval[0]), as_fraction(s.interval[1]))
            steps.append(RadicalStep(int(s.p), int(s.d), interval))
        return cls(tuple(steps), OrderingMode(record.ordering_mode))

    def to_record(self) -> TowerRecord:
        return TowerRecord(ordering_mode=self.ordering_mode.value, steps=[s.to_record() for s in self.steps])

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def degrees(self) -> "tuple[int, ...]":
        return tuple(s.d for s in self.steps)

    @property
    def radicands(self) -> "tuple[int, ...]":
        return tuple(s.p for s in self.steps)

    @property
    def degree(self) -> int:
        """[K_k : Q], assuming degree multiplicativity."""
        return prod(self.degrees)

    def step(self, i: int) -> RadicalStep:
        """The i-th step, 1-based."""
        if not 1 <= i <= len(self.steps):
            raise InvalidStepError(f"Step {i} outside 1..{len(self.steps)}")
        return self.steps[i - 1]

    def prefix(self, i: int) -> "RadicalTower":
        """The subtower made of steps 1..i (i may be 0)."""
        if not 0 <= i <= len(self.steps):
            raise InvalidStepError(f"Prefix length {i} outside 0..{len(self.steps)}")
        return RadicalTower(self.steps[:i], self.ordering_mode)

    def degree_multiplicative(self) -> bool:
        """Prime radicands and distinct prime degrees, which make [K_k : Q] = prod d_i."""
        return (
            all(is_prime(s.p) and is_prime(s.d) for s in self.steps)
            and len(set(self.degrees)) == len(self.degrees)
        )

    def validate(self) -> "list[str]":
        """Every violation of the tower's ordering discipline, in step order."""
        violations = []
        for i, s in enumerate(self.steps, start=1):
            if not is_prime(s.p):
                violations.append(f"step {i}: p={s.p} is not prime")
            if not is_prime(s.d):
                violations.append(f"step {i}: d={s.d} is not prime")
        if self.ordering_mode is OrderingMode.STRICT:
            for i in range(1, len(self.steps)):
                prev, cur = self.steps[i - 1], self.steps[i]
                if min(cur.p, cur.d) <= max(prev.p, prev.d):
                    violations.append(
                        f"step {i + 1}: min(p, d)={min(cur.p, cur.d)} does not exceed "
                        f"max(p, d)={max(prev.p, prev.d)} of step {i}"
                    )
        else:
            seen: dict = {}
            for i, s in enumerate(self.steps, start=1):
                for role, value in (("d", s.d), ("p", s.p)):
                    if value in seen:
                        violations.append(f"step {i}: {role}={value} already used at {seen[value]}")
                    else:
                        seen[value] = f"step {i} ({role})"
        return violations

    @property
    def is_valid(self) -> bool:
        return not self.validate()

    def generator(self, i: int) -> "TowerElement":
        self.step(i)
        exponents = tuple(1 if j == i - 1 else 0 for j in range(len(self.steps)))
        return TowerElement.from_terms({exponents: 1}, self.degrees)

    def constant(self, c: int) -> "TowerElement":
        return TowerElement.from_terms({(0,) * len(self.steps): c}, self.degrees)

    def multiply(self, a: "TowerElement", b: "TowerElement") -> "TowerElement":
        """Product in the tower ring, reducing x_i^d_i to p_i."""
        terms: dict = {}
        for ma, ca in a.terms:
            for mb, cb in b.terms:
                coeff = ca * cb
                exps = []
                for (ea, eb, s) in zip(ma, mb, self.steps):
                    total = ea + eb
                    if total >= s.d:
                        total -= s.d
                        coeff *= s.p
                    exps.append(total)
                key = tuple(exps)
                terms[key] = terms.get(key, 0) + coeff
        return TowerElement.from_terms(terms, self.degrees)


@dataclass(frozen=True)
class TowerElement:
    """Integer combination of monomials x1^m1 ... xk^mk with 0 <= mi < di."""

    terms: tuple
    degrees: tuple

    @classmethod
    def from_terms(cls, terms: dict, degrees: Sequence[int]) -> "TowerElement":
        degrees = tuple(degrees)
        cleaned = []
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(degrees):
                raise PreconditionError(f"Exponent vector {exps} does not match {len(degrees)} generators")
            for i, (e, d) in enumerate(zip(exps, degrees), start=1):
                if not 0 <= e < d:
                    raise ExponentOutOfRangeError(f"x{i}^{e}: exponent must lie in 0..{d - 1}")
            if coeff:
                cleaned.append((exps, int(coeff)))
        return cls(tuple(sorted(cleaned)), degrees)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps, _ in self.terms)

    def involves(self, i: int) -> bool:
        """Whether some term has a positive power of x_i (1-based)."""
        return any(exps[i - 1] > 0 for exps, _ in self.terms)

    def generator_index(self) -> Optional[int]:
        """i when the element is exactly x_i."""
        if len(self.terms) != 1:
            return None
        exps, coeff = self.terms[0]
        if coeff != 1 or sum(exps) != 1:
            return None
        return exps.index(1) + 1

    def split_top(self) -> "dict[int, TowerElement]":
        """Write the element as sum over n of a_n(x1..x_{k-1}) * x_k^n."""
        if not self.degrees:
            raise EmptyTowerError("An element of Z has no top generator")
        grouped: dict = {}
        for exps, coeff in self.terms:
            grouped.setdefault(exps[-1], {})[exps[:-1]] = coeff
        return {n: TowerElement.from_terms(t, self.degrees[:-1]) for n, t in sorted(grouped.items())}

    def __neg__(self) -> "TowerElement":
        return TowerElement(tuple((e, -c) for e, c in self.terms), self.degrees)

    def __add__(self, other: "TowerElement") -> "TowerElement":
        terms = self.as_dict()
        for e, c in other.terms:
            terms[e] = terms.get(e, 0) + c
        return TowerElement.from_terms(terms, self.degrees)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self.terms:
            factors = [f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(exps, start=1) if e]
            if not factors:
                body = str(abs(coeff))
            elif abs(coeff) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(abs(coeff))] + factors)
            parts.append(("-" if coeff < 0 else "+") + body)
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text


def parse_element(src: str, tower: RadicalTower) -> TowerElement:
    """Parse integer polynomial text in x1..xk into a tower element.

    Exponents are not reduced: x_i^m with m >= d_i is rejected.
    """
    names = [f"x{i}" for i in range(1, len(tower) + 1)]
    symbols = {name: Symbol(name) for name in names}
    try:
        expr = parse_expr(src, local_dict=symbols, transformations=standard_transformations + (convert_xor,))
    except (SympifyError, SyntaxError, TypeError, TokenError) as e:
        raise ElementSyntaxError(f"Cannot parse element {src!r}: {e}") from e

    unknown = sorted(str(s) for s in getattr(expr, "free_symbols", set()) if str(s) not in symbols)
    if unknown:
        raise UnknownVariableError(f"Unknown variable(s) {', '.join(unknown)}; tower has {', '.join(names)}")
    gens = [symbols[n] for n in names]
    try:
        poly = Poly(expr, *gens, domain=ZZ) if gens else None
    except (BasePolynomialError, TypeError, ValueError) as e:
        raise ElementSyntaxError(f"Not an integer polynomial in {', '.join(names)}: {src!r}") from e
    if poly is None:
        raise EmptyTowerError("Elements need a tower with at least one step")
    return TowerElement.from_terms({m: int(c) for m, c in poly.terms()}, tower.degrees)


# --- embeddings -------------------------------------------------------------


def _monomial_moduli(tower: RadicalTower, elt: TowerElement, bits: int) -> dict:
    roots = [radical_root(s.p, s.d, bits) for s in tower.steps]
    moduli = {}
    for exps, _ in elt.terms:
        value = RealInterval.point(1)
        for r, e in zip(roots, exps):
            for _ in range(e):
                value = (value * r).rounded(bits)
        moduli[exps] = value
    return moduli


def embedding_indices(tower: RadicalTower) -> Iterator["tuple[int, ...]"]:
    """(j1, ..., jk) in lexicographic order; x_i maps to p_i^(1/d_i) * zeta_{d_i}^{j_i}."""
    return itertools.product(*(range(d) for d in tower.degrees))


def _embeddings_at(tower: RadicalTower, elt: TowerElement, bits: int) -> PointTuple:
    ctx = IntervalContext(bits)
    moduli = _monomial_moduli(tower, elt, bits)
    cis_cache: dict = {}
    values = []
    for index in embedding_indices(tower):
        total = ComplexBox.point(0)
        for exps, coeff in elt.terms:
            turns = sum(Fraction(j * m, d) for j, m, d in zip(index, exps, tower.degrees)) % 1
            if turns not in cis_cache:
                cis_cache[turns] = ctx.cis(turns)
            total = total + cis_cache[turns].scale(moduli[exps] * coeff)
        values.append(total.rounded(bits))
    return PointTuple(tuple(values))


def embeddings(
    tower: RadicalTower,
    elt: TowerElement,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
    ceiling: Optional[int] = None,
) -> PointTuple:
    """The prod d_i images of elt, one box per embedding of the top field.

    Raises:
        PrecisionFailureError: boxes could not be shrunk below tol.
    """
    tol = Fraction(tol)
    if not tower.steps:
        raise EmptyTowerError("Embeddings need at least one step")
    if not tower.degree_multiplicative():
        raise PreconditionError("Tower degrees must be distinct primes over prime radicands")
    if elt.degrees != tower.degrees:
        raise PreconditionError("Element belongs to a different tower")

    def attempt(b: int) -> PointTuple:
        points = _embeddings_at(tower, elt, b)
        if points.max_rad() > tol:
            raise NonConvergenceError(f"embedding boxes wider than tol at {b} bits")
        return points

    start = max(bits or settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    return with_refinement(attempt, start, ceiling)


# --- heights ----------------------------------------------------------------


class HeightKind(str, Enum):
    HOUSE = "house"
    WEIL = "weil"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class HeightValue:
    value: RealInterval
    kind: HeightKind
    gamma: Optional[Fraction] = None


def _require_nonzero(elt: TowerElement) -> None:
    if elt.is_zero():
        raise ZeroElementError("Height of the zero element is undefined here")


def _constant_value(elt: TowerElement) -> int:
    return elt.terms[0][1]


def house(
    tower: RadicalTower,
    elt: TowerElement,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
    ceiling: Optional[int] = None,
) -> HeightValue:
    """Maximum modulus over all embeddings, enclosed within tol."""
    _require_nonzero(elt)
    tol = Fraction(tol)
    if elt.is_constant():
        return HeightValue(RealInterval.point(abs(_constant_value(elt))), HeightKind.HOUSE)
    start = max(bits or settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    index = elt.generator_index()
    if index is not None:
        return HeightValue(tower.step(index).generator_house(start), HeightKind.HOUSE)

    def attempt(b: int) -> RealInterval:
        points = _embeddings_at(tower, elt, b)
        value = points.norm(b)
        if value.width > tol:
            raise NonConvergenceError(f"house enclosure wider than tol at {b} bits")
        return value

    if not tower.degree_multiplicative():
        raise PreconditionError("Tower degrees must be distinct primes over prime radicands")
    return HeightValue(with_refinement(attempt, start, ceiling), HeightKind.HOUSE)


def weil_height_integral(
    tower: RadicalTower,
    elt: TowerElement,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
    ceiling: Optional[int] = None,
) -> HeightValue:
    """Average of log max(1, |sigma(elt)|) over all embeddings; the Weil height of an algebraic integer."""
    _require_nonzero(elt)
    tol = Fraction(tol)
    start = max(bits or settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    if elt.is_constant():
        c = abs(_constant_value(elt))
        value = RealInterval.point(0) if c == 1 else IntervalContext(start).log(c)
        return HeightValue(value, HeightKind.WEIL)
    index = elt.generator_index()
    if index is not None:
        s = tower.step(index)
        return HeightValue(IntervalContext(start).log(s.p) / s.d, HeightKind.WEIL)

    def attempt(b: int) -> RealInterval:
        ctx = IntervalContext(b)
        points = _embeddings_at(tower, elt, b)
        total = RealInterval.point(0)
        for z in points:
            modulus = z.abs(b)
            if modulus.hi > 1:
                total = total + ctx.log(modulus.clamp_low(1))
        value = (total / len(points)).rounded(b)
        if value.width > tol:
            raise NonConvergenceError(f"height enclosure wider than tol at {b} bits")
        return value

    if not tower.degree_multiplicative():
        raise PreconditionError("Tower degrees must be distinct primes over prime radicands")
    return HeightValue(with_refinement(attempt, start, ceiling), HeightKind.WEIL)


def weighted_height(gamma: Number, degree: int, h: RealInterval, bits: Optional[int] = None) -> RealInterval:
    """degree**gamma * h."""
    if degree < 1:
        raise PreconditionError(f"degree must be >= 1, got {degree}")
    gamma = Fraction(gamma)
    if gamma == 0 or degree == 1:
        return h
    if gamma.denominator == 1:
        g = int(gamma)
        factor = RealInterval.point(Fraction(degree) ** g)
    else:
        factor = IntervalContext(bits or settings.NORTHCOTT_PRECISION_BITS).pow(degree, gamma)
    return h * factor


def element_degree_over_Q(
    tower: RadicalTower,
    elt: TowerElement,
    tol: Number = Fraction(1, 10**9),
    bits: Optional[int] = None,
) -> int:
    """Degree of elt over Q: the number of distinct embedding values.

    Raises:
        IndeterminateError: the boxes do not split into equal, well separated clusters.
    """
    _require_nonzero(elt)
    if elt.is_constant():
        return 1
    index = elt.generator_index()
    if index is not None:
        return tower.step(index).d
    points = embeddings(tower, elt, tol, bits)
    n = len(points)
    order = sorted(range(n), key=lambda i: points[i].re.lo)
    neighbours: list = [set() for _ in range(n)]
    for a_pos, i in enumerate(order):
        zi = points[i]
        for j in order[a_pos + 1 :]:
            zj = points[j]
            if zj.re.lo > zi.re.hi:
                break
            if zi.im.overlaps(zj.im) and zi.re.overlaps(zj.re):
                neighbours[i].add(j)
                neighbours[j].add(i)

    seen: set = set()
    sizes = []
    for i in range(n):
        if i in seen:
            continue
        cluster = {i} | neighbours[i]
        for j in cluster:
            if neighbours[j] | {j} != cluster:
                raise IndeterminateError("Embedding boxes overlap without forming clean clusters; lower tol")
        seen |= cluster
        sizes.append(len(cluster))
    if len(set(sizes)) != 1 or n % sizes[0]:
        raise IndeterminateError(f"Unequal cluster sizes {sorted(set(sizes))}; lower tol")
    return n // sizes[0]
