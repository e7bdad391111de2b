"""Brute-force oracles for the test suites.

Everything here uses plain double-precision midpoint arithmetic (numpy) or
exact sympy determinants, never the certified interval path, so it can serve
as an independent cross-check of the enclosures produced elsewhere.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterator, Optional, Sequence, Union

import numpy as np
from sympy import Matrix

from .config import settings
from .exactcore import PolyFq, PolyZ, factor_fq_naive
from .exceptions import (
    DegreeTooLargeError,
    EmptyStreamError,
    InvalidStepError,
    PreconditionError,
    TooLargeError,
)
from .heights import RadicalTower, TowerElement, house
from .logging_config import get_logger
from .numerics import PointTuple, RealInterval

logger = get_logger(__name__)

Number = Union[int, Fraction]

_RESULTANT_MAX_DEGREE = 12
_BLOCK = 1 << 15


@dataclass(frozen=True)
class EnumerationSpec:
    """Coefficient vectors over the monomial basis of O_i with entries in [-C, C].

    ``mask`` restricts which monomial slots may be nonzero. With
    ``include_constants`` off, slots not involving x_i are pinned to zero.
    """

    tower: RadicalTower
    step_index: int
    coeff_bound: int
    include_constants: bool = True
    mask: Optional[FrozenSet[tuple]] = None

    def __post_init__(self):
        if self.coeff_bound < 0:
            raise PreconditionError(f"Coefficient bound must be >= 0, got {self.coeff_bound}")
        if not 1 <= self.step_index <= len(self.tower):
            raise InvalidStepError(f"Step {self.step_index} outside 1..{len(self.tower)}")
        if self.mask is not None:
            object.__setattr__(self, "mask", frozenset(tuple(m) for m in self.mask))

    @property
    def field(self) -> RadicalTower:
        return self.tower.prefix(self.step_index)

    @property
    def degrees(self) -> "tuple[int, ...]":
        return self.field.degrees

    def slots(self) -> "list[tuple[int, ...]]":
        """Active monomial slots in lexicographic order."""
        top = self.step_index - 1
        active = []
        for exps in itertools.product(*(range(d) for d in self.degrees)):
            if self.mask is not None and exps not in self.mask:
                continue
            if not self.include_constants and exps[top] == 0:
                continue
            active.append(exps)
        return active

    def new_slot_flags(self) -> np.ndarray:
        top = self.step_index - 1
        return np.array([exps[top] > 0 for exps in self.slots()], dtype=bool)

    def count(self) -> int:
        """(2C+1)^D - (2C+1)^D' with D active slots, D' of them free of x_i."""
        flags = self.new_slot_flags()
        base = 2 * self.coeff_bound + 1
        return base ** len(flags) - base ** int((~flags).sum())


def _check_cap(spec: EnumerationSpec) -> int:
    total = (2 * spec.coeff_bound + 1) ** len(spec.slots())
    if total > settings.NORTHCOTT_ENUMERATION_CAP:
        raise TooLargeError(
            f"Enumeration of {total} coefficient vectors exceeds the cap of {settings.NORTHCOTT_ENUMERATION_CAP}"
        )
    return total


def _coefficient_blocks(spec: EnumerationSpec) -> Iterator[np.ndarray]:
    """Blocks of rows of coefficients, each with a nonzero entry on a slot involving x_i."""
    total = _check_cap(spec)
    flags = spec.new_slot_flags()
    if not flags.any() or spec.coeff_bound == 0:
        return
    base = 2 * spec.coeff_bound + 1
    radix = base ** np.arange(len(flags), dtype=np.int64)
    for start in range(0, total, _BLOCK):
        index = np.arange(start, min(start + _BLOCK, total), dtype=np.int64)
        digits = (index[:, None] // radix[None, :]) % base - spec.coeff_bound
        keep = np.any(digits[:, flags] != 0, axis=1)
        if keep.any():
            yield digits[keep]


def _element(spec: EnumerationSpec, slots: Sequence[tuple], row: np.ndarray) -> TowerElement:
    return TowerElement.from_terms({s: int(c) for s, c in zip(slots, row) if c}, spec.degrees)


def enumerate_new_elements(spec: EnumerationSpec) -> Iterator[TowerElement]:
    """Every element of O_i outside O_(i-1) whose coefficients lie in [-C, C], once each.

    Raises:
        TooLargeError: the coefficient space exceeds NORTHCOTT_ENUMERATION_CAP.
    """
    slots = spec.slots()
    for block in _coefficient_blocks(spec):
        for row in block:
            yield _element(spec, slots, row)


def _embedding_matrix(spec: EnumerationSpec) -> np.ndarray:
    """Values of every active monomial under every embedding (slots x embeddings)."""
    steps = spec.field.steps
    roots = np.array([float(s.p) ** (1.0 / s.d) for s in steps])
    columns = list(itertools.product(*(range(s.d) for s in steps)))
    slots = spec.slots()
    matrix = np.empty((len(slots), len(columns)), dtype=np.complex128)
    degrees = np.array([s.d for s in steps], dtype=np.float64)
    for r, exps in enumerate(slots):
        e = np.array(exps, dtype=np.float64)
        modulus = float(np.prod(roots**e))
        for c, index in enumerate(columns):
            angle = 2 * math.pi * float(np.sum(np.array(index) * e / degrees))
            matrix[r, c] = modulus * complex(math.cos(angle), math.sin(angle))
    return matrix


def midpoint_houses(spec: EnumerationSpec) -> Iterator["tuple[np.ndarray, np.ndarray]"]:
    """(coefficient rows, houses) per enumeration block, in enumeration order."""
    matrix = _embedding_matrix(spec)
    for block in _coefficient_blocks(spec):
        values = block.astype(np.float64) @ matrix
        yield block, np.max(np.abs(values), axis=1)


def midpoint_weil_heights(spec: EnumerationSpec) -> Iterator["tuple[np.ndarray, np.ndarray]"]:
    """(coefficient rows, Weil heights) per block; heights average log max(1, |sigma(a)|)."""
    matrix = _embedding_matrix(spec)
    for block in _coefficient_blocks(spec):
        moduli = np.abs(block.astype(np.float64) @ matrix)
        yield block, np.mean(np.log(np.maximum(moduli, 1.0)), axis=1)


@dataclass(frozen=True)
class MinHouse:
    value: RealInterval
    witness: TowerElement
    midpoint: float
    count: int


def empirical_min_house(spec: EnumerationSpec, tol: Number = Fraction(1, 10**9)) -> MinHouse:
    """Smallest house over the enumeration, with the element attaining it.

    The witness's house is certified; the lower end also covers every other
    candidate's midpoint house less its rounding slack.

    Raises:
        TooLargeError: as for enumerate_new_elements.
        EmptyStreamError: nothing was enumerated.
    """
    best = math.inf
    best_row = None
    count = 0
    for block, houses in midpoint_houses(spec):
        count += len(houses)
        k = int(np.argmin(houses))
        if houses[k] < best:
            best, best_row = float(houses[k]), block[k].copy()
    if best_row is None:
        raise EmptyStreamError("Enumeration produced no elements")

    witness = _element(spec, spec.slots(), best_row)
    certified = house(spec.field, witness, tol).value
    slack = 64 * 2.0**-53 * (1.0 + best) * len(spec.slots()) * float(spec.coeff_bound)
    lo = min(certified.lo, Fraction(max(best - slack, 0.0)))
    logger.debug("Empirical minimum house", elements=count, midpoint=best, witness=str(witness))
    return MinHouse(RealInterval(lo, certified.hi), witness, best, count)


def brute_discrepancy(points: PointTuple, grid_n: int) -> float:
    """Grid minimum of D_u over grid_n rotations spread across one period 2 pi / d."""
    if grid_n < 8:
        raise PreconditionError(f"grid_n must be >= 8, got {grid_n}")
    centers = np.array(points.centers(), dtype=np.complex128)
    d = len(centers)
    thetas = 2 * np.pi * np.arange(grid_n) / (grid_n * d)
    offsets = 2 * np.pi * np.arange(d) / d
    targets = np.exp(1j * (thetas[:, None] + offsets[None, :]))
    dist = np.abs(centers[None, None, :] - targets[:, :, None])
    return float(np.min(np.max(np.min(dist, axis=2), axis=1)))


def discriminant_via_resultant(f: PolyZ) -> int:
    """|Res(f, f')| from the Sylvester matrix; equals |disc f| for monic f."""
    if not f.is_monic():
        raise PreconditionError(f"{f} is not monic")
    n = f.degree
    if n > _RESULTANT_MAX_DEGREE:
        raise DegreeTooLargeError(f"Degree {n} exceeds {_RESULTANT_MAX_DEGREE}")
    if n < 1:
        raise DegreeTooLargeError("Resultant needs a polynomial of degree >= 1")
    a = f.descending()
    b = f.derivative().descending()
    m = len(b) - 1
    size = n + m
    rows = []
    for i in range(m):
        rows.append([0] * i + a + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + b + [0] * (size - m - 1 - i))
    return abs(int(Matrix(rows).det(method="bareiss")))


def dedekind_factored_form(f: PolyZ, q: int) -> bool:
    """Dedekind's criterion from the factorization of f mod q.

    With f = prod phi_i^e_i (mod q), g = prod phi_i and h = f / g (lifted),
    q is coprime to the index iff no phi_i with e_i >= 2 divides (g h - f) / q.
    """
    if not f.is_monic():
        raise PreconditionError(f"Dedekind's criterion needs a monic polynomial, got {f}")
    factors = factor_fq_naive(f.reduce(q))
    g = PolyZ((1,))
    h = PolyZ((1,))
    for phi, e in factors:
        lifted = phi.lift()
        g = _mul(g, lifted)
        for _ in range(e - 1):
            h = _mul(h, lifted)
    diff = _sub(_mul(g, h), f)
    if any(c % q for c in diff.coeffs):
        raise AssertionError("factored lift does not reduce to f mod q")
    F = PolyFq(q, tuple(c // q for c in diff.coeffs))
    for phi, e in factors:
        if e >= 2 and _divides(phi, F):
            return False
    return True


def _mul(a: PolyZ, b: PolyZ) -> PolyZ:
    out = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            out[i + j] += x * y
    return PolyZ(tuple(out))


def _sub(a: PolyZ, b: PolyZ) -> PolyZ:
    return PolyZ(tuple(x - y for x, y in itertools.zip_longest(a.coeffs, b.coeffs, fillvalue=0)))


def _divides(phi: PolyFq, F: PolyFq) -> bool:
    """Does the monic phi divide F over F_q? Schoolbook long division."""
    q = phi.q
    rest = list(F.coeffs)
    k = phi.degree
    while len(rest) - 1 >= k and rest:
        lead = rest[-1]
        shift = len(rest) - 1 - k
        for i, c in enumerate(phi.coeffs):
            rest[shift + i] = (rest[shift + i] - lead * c) % q
        while rest and rest[-1] == 0:
            rest.pop()
    return not rest
