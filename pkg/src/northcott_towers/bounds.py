"""Lower bounds for the house and the Weil height, and per-tower reports."""

from fractions import Fraction
from typing import Iterable, Literal, Optional, Sequence, Union

from .config import settings
from .discrepancy import discrepancy, discrepancy_factor, eta_radical_step, normalized_tuple
from .exactcore import fraction_str, is_prime
from .exceptions import (
    DegreeTooLargeError,
    EmptyTowerError,
    NotInTopGeneratorError,
    PreconditionError,
    ZeroTupleError,
)
from .heights import RadicalTower, TowerElement, embeddings, house, weighted_height
from .logging_config import get_logger
from .models import BoundsReport, Enclosure
from .numerics import (
    ComplexBox,
    IntervalContext,
    PointTuple,
    RealInterval,
    bits_for,
    complex_roots,
    radical_root,
)

logger = get_logger(__name__)

Number = Union[int, Fraction]
Coefficient = Union[int, Fraction, complex, ComplexBox]
Window = Literal["above", "below"]


def enclosure(value: RealInterval) -> Enclosure:
    return Enclosure(**value.to_json())


def _bits(tol: Fraction) -> int:
    return max(settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))


def _as_box(c: Coefficient) -> ComplexBox:
    if isinstance(c, ComplexBox):
        return c
    if isinstance(c, complex):
        return ComplexBox.from_complex(c)
    return ComplexBox.point(Fraction(c))


def _coefficients(B: Sequence[Coefficient]) -> "list[ComplexBox]":
    boxes = [_as_box(c) for c in B]
    while boxes and boxes[-1].re.lo == boxes[-1].re.hi == 0 and boxes[-1].im.lo == boxes[-1].im.hi == 0:
        boxes.pop()
    return boxes


def _l2(boxes: Iterable[ComplexBox], bits: int) -> RealInterval:
    total = RealInterval.point(0)
    for b in boxes:
        total = total + b.abs_squared()
    return total.sqrt(bits)


def _int_power(x: RealInterval, n: int, bits: int) -> RealInterval:
    value = RealInterval.point(1)
    for _ in range(n):
        value = (value * x).rounded(bits)
    return value


def l2_lower_bound(points: PointTuple, B: Sequence[Coefficient], tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """(1 - d^(3/2) D(xi) max(1, |xi_i|)^(d-2)) * l2(B), a lower bound for max_i |B(xi_i)|.

    The discrepancy factor is dropped for constant B.
    """
    tol = Fraction(tol)
    bits = _bits(tol)
    d = len(points)
    coeffs = _coefficients(B)
    n = len(coeffs) - 1
    if n >= d:
        raise DegreeTooLargeError(f"deg B = {n} must be below the number of points {d}")
    norm = _l2(coeffs, bits)
    if n <= 0:
        return norm
    disc = discrepancy(points, tol).value
    spread = _int_power(points.norm(bits).clamp_low(1), max(d - 2, 0), bits)
    d_three_halves = RealInterval.point(d) * RealInterval.point(d).sqrt(bits)
    factor = RealInterval.point(1) - d_three_halves * disc * spread
    return (factor * norm).rounded(bits)


def scaled_l2_lower_bound(
    points: PointTuple, B: Sequence[Coefficient], tol: Number = Fraction(1, 10**9)
) -> RealInterval:
    """(1 - d^(3/2) D(xi/|xi|)) * sqrt(sum |b_i * |xi|^i|^2)."""
    tol = Fraction(tol)
    bits = _bits(tol)
    d = len(points)
    coeffs = _coefficients(B)
    n = len(coeffs) - 1
    if n >= d:
        raise DegreeTooLargeError(f"deg B = {n} must be below the number of points {d}")
    norm = points.norm(bits)
    if norm.lo <= 0:
        raise ZeroTupleError("The points must not all vanish")
    scaled = [b.scale(_int_power(norm, i, bits)) for i, b in enumerate(coeffs)]
    size = _l2(scaled, bits)
    if n <= 0:
        return size
    disc = discrepancy(normalized_tuple(points, bits), tol).value
    return (discrepancy_factor(d, disc, bits) * size).rounded(bits)


def windowed_l2_lower_bound(
    points: PointTuple,
    B: Sequence[Coefficient],
    indices: Sequence[int],
    exponents: Sequence[int],
    tol: Number = Fraction(1, 10**9),
) -> RealInterval:
    """(1 - |I|^(3/2) D_I) * sqrt(sum_{j in J} |b_j|^2) - sum_{k not in J} |b_k|.

    ``indices`` (I) are 0-based positions into points, all on the unit circle;
    ``exponents`` (J) must span less than |I|.
    """
    tol = Fraction(tol)
    bits = _bits(tol)
    index_set = sorted(set(indices))
    exponent_set = sorted(set(exponents))
    if not index_set or not all(0 <= i < len(points) for i in index_set):
        raise PreconditionError(f"Index set {indices} must be a nonempty subset of 0..{len(points) - 1}")
    if not exponent_set or min(exponent_set) < 0:
        raise PreconditionError("Exponent set must be nonempty and nonnegative")
    if exponent_set[-1] - exponent_set[0] >= len(index_set):
        raise PreconditionError(f"max J - min J must be below |I| = {len(index_set)}")
    for i in index_set:
        if not points[i].abs(bits).inflate(tol).contains(1):
            raise PreconditionError(f"Point {i} is not on the unit circle")

    coeffs = _coefficients(B)
    inside = [coeffs[j] for j in exponent_set if j < len(coeffs)]
    outside = RealInterval.point(0)
    for k, b in enumerate(coeffs):
        if k not in exponent_set:
            outside = outside + b.abs(bits)
    sub = PointTuple(tuple(points[i] for i in index_set))
    disc = discrepancy(sub, tol).value
    return (discrepancy_factor(len(index_set), disc, bits) * _l2(inside, bits) - outside).rounded(bits)


def house_lower_bound(tower: RadicalTower, elt: TowerElement, tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """max over sigma of (1 - d^(3/2) D(tau_sigma/|tau_sigma|)) * |sigma(a_n)| * |tau_sigma|^n.

    elt is read as sum_n a_n x_k^n over the subtower; n is its top degree
    in x_k and sigma runs over the subtower's embeddings.
    """
    tol = Fraction(tol)
    bits = _bits(tol)
    if not tower.steps:
        raise EmptyTowerError("No top generator in an empty tower")
    k = len(tower)
    parts = elt.split_top()
    n = max(parts)
    if n == 0:
        raise NotInTopGeneratorError(f"{elt} does not involve x{k}")
    top = tower.step(k)
    lead = parts[n]

    roots = complex_roots(top.polynomial, tol, bits)
    disc = discrepancy(normalized_tuple(roots, bits), tol).value
    factor = discrepancy_factor(top.d, disc, bits)
    size = _int_power(radical_root(top.p, top.d, bits), n, bits)

    if k == 1:
        lead_moduli = [RealInterval.point(abs(lead.terms[0][1]))]
    else:
        lead_moduli = embeddings(tower.prefix(k - 1), lead, tol, bits).moduli(bits)
    return RealInterval.maximum((factor * m * size).rounded(bits) for m in lead_moduli)


def new_element_house_bound(tower: RadicalTower, i: int, tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """Every element of O_i outside O_{i-1} has house at least this."""
    return eta_radical_step(tower, i, tol)


def weil_gap_bound(gamma: Number, p: int, d: int, bits: Optional[int] = None) -> RealInterval:
    """d^gamma * (log p / (2d) - log d / (2(d-1))); may be non-positive."""
    if d < 2 or not is_prime(p) or not is_prime(d):
        raise PreconditionError(f"Need primes p and d >= 2, got p={p}, d={d}")
    bits = bits or settings.NORTHCOTT_PRECISION_BITS
    ctx = IntervalContext(bits)
    inner = ctx.log(p) / (2 * d) - ctx.log(d) / (2 * (d - 1))
    return weighted_height(gamma, d, inner, bits).rounded(bits)


def large_ring_bound(points: PointTuple, tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """house * (1 - d^(3/2) D(c)) with c the normalized conjugates."""
    tol = Fraction(tol)
    bits = _bits(tol)
    norm = points.norm(bits)
    disc = discrepancy(normalized_tuple(points, bits), tol).value
    return (norm * discrepancy_factor(len(points), disc, bits)).rounded(bits)


def gamma_northcott_growth(gamma: Number, p: int, d: int, bits: Optional[int] = None) -> RealInterval:
    """d^(gamma-1) * (log p - log d)."""
    bits = bits or settings.NORTHCOTT_PRECISION_BITS
    ctx = IntervalContext(bits)
    return weighted_height(Fraction(gamma) - 1, d, ctx.log(p) - ctx.log(d), bits).rounded(bits)


def generator_weighted_height(gamma: Number, p: int, d: int, bits: Optional[int] = None) -> RealInterval:
    """h_gamma of p^(1/d), i.e. d^(gamma-1) * log p."""
    bits = bits or settings.NORTHCOTT_PRECISION_BITS
    return weighted_height(Fraction(gamma) - 1, d, IntervalContext(bits).log(p), bits).rounded(bits)


def window_membership(value: RealInterval, t: Fraction, d: int, window: Window, bits: int) -> bool:
    """Is value certainly inside (t, 2^(1/d) t) ("above") or (2^(-1/d) t, t) ("below")?"""
    root2 = radical_root(2, d, bits)
    if window == "above":
        return value.lo > t and value.hi < (root2 * t).lo
    if window == "below":
        return value.lo > (RealInterval.point(t) / root2).hi and value.hi < t
    raise PreconditionError(f"Unknown window {window!r}")


def northcott_report(
    tower: RadicalTower,
    tol: Number = Fraction(1, 10**9),
    claimed_limit: Optional[Fraction] = None,
    window: Optional[Window] = None,
) -> BoundsReport:
    """Per-step eta and house of the generators, with finite-prefix minima.

    The minima describe the steps at hand only; they are evidence for, not a
    computation of, the liminf over an infinite tower.
    """
    if not tower.steps:
        raise EmptyTowerError("A report needs at least one step")
    tol = Fraction(tol)
    etas = [eta_radical_step(tower, i, tol) for i in range(1, len(tower) + 1)]
    houses = [house(tower, tower.generator(i), tol).value for i in range(1, len(tower) + 1)]
    report = BoundsReport(
        eta_values=[enclosure(v) for v in etas],
        house_values=[enclosure(v) for v in houses],
        prefix_liminf_eta=enclosure(RealInterval.minimum(etas)),
        prefix_min_house=enclosure(RealInterval.minimum(houses)),
        informative=[v.lo > 0 for v in etas],
    )
    if claimed_limit is not None:
        limit = Fraction(claimed_limit)
        chosen = window or "above"
        bits = _bits(tol)
        flags = [window_membership(h, limit, s.d, chosen, bits) for h, s in zip(houses, tower.steps)]
        report = report.model_copy(
            update={"claimed_limit": fraction_str(limit), "window": chosen, "window_flags": flags}
        )
    logger.debug("Bounds report", steps=len(tower), prefix_min_house=report.prefix_min_house.lo)
    return report
