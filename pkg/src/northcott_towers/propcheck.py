"""Seeded property suites for the lower bounds and the arithmetic facts behind the constructions.

Each suite pairs a hypothesis strategy (or, for small finite families, an
exhaustive grid) with a check that records the margin by which a bound holds
(observed minus bound, or bound minus observed for upper bounds). A margin
below ``-3 * tol`` is a violation. An instance outside a bound's hypotheses
is skipped; any other library error counts against the suite.
"""

import cmath
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

import hypothesis
import hypothesis.strategies as st
from hypothesis import HealthCheck, Phase, Verbosity, given
from sympy import Poly, Symbol, primerange
from sympy.polys.domains import ZZ

from .bounds import (
    house_lower_bound,
    l2_lower_bound,
    new_element_house_bound,
    scaled_l2_lower_bound,
    weil_gap_bound,
    windowed_l2_lower_bound,
)
from .config import settings
from .discrepancy import discrepancy, lift_tuple, product_tuple
from .exactcore import (
    PolyZ,
    dedekind_index_coprime,
    fermat_quotient_divides,
    fermat_quotient_residue,
    find_prime_in_ap,
    next_prime,
    pure_radical_discriminant,
)
from .exceptions import NorthcottError, PreconditionError, PrimeNotFoundError
from .heights import RadicalStep, RadicalTower, TowerElement, house, weil_height_integral
from .logging_config import get_logger
from .models import SuiteResult
from .numerics import ComplexBox, PointTuple, RealInterval, decimal_string
from .oracle import dedekind_factored_form, discriminant_via_resultant

logger = get_logger(__name__)

DEFAULT_TOL = Fraction(1, 10**6)
_MAX_EXAMPLES = 5
_BITS = 96

_SMALL_TOWERS = (
    ((5, 3),),
    ((2, 3),),
    ((7, 5),),
    ((3, 2),),
    ((131, 11),),
    ((5, 3), (7, 2)),
    ((2, 5), (3, 2)),
)


@dataclass(frozen=True)
class Outcome:
    margin: Optional[Fraction]  # None when the instance fell outside the hypotheses
    detail: str
    error: bool = False


Check = Callable[[Any, Fraction], Outcome]


@dataclass(frozen=True)
class Suite:
    """A check and where its instances come from: a strategy, or an exhaustive grid."""

    check: Check
    instances: Optional[int]  # None runs the whole grid
    strategy: Optional[st.SearchStrategy] = None
    grid: Optional[Callable[[], Iterator[Any]]] = None


# --- strategies ----------------------------------------------------------------

angles = st.floats(0, 2 * math.pi, exclude_max=True)


@st.composite
def polar(draw, max_radius: float) -> complex:
    return cmath.rect(draw(st.floats(0, max_radius)), draw(angles))


@st.composite
def rotated_roots(draw, d: int, radius: float = 1.0, jitter: float = 0.0) -> "list[complex]":
    """The d-th roots of unity, rotated, scaled and each moved by at most jitter."""
    u = draw(angles)
    moves = draw(st.lists(polar(jitter), min_size=d, max_size=d))
    return draw(st.permutations([cmath.rect(radius, u + 2 * math.pi * j / d) + moves[j] for j in range(d)]))


@st.composite
def point_lists(draw, d: int, max_modulus: float = 3.0) -> "list[complex]":
    if draw(st.booleans()):
        return draw(st.lists(polar(max_modulus), min_size=d, max_size=d))
    radius = draw(st.floats(0.3, max_modulus - 0.1))
    return draw(rotated_roots(d, radius=radius, jitter=0.05))


def _nonzero_lead(coeffs: "list[complex]") -> "list[complex]":
    if coeffs[-1] == 0:
        coeffs[-1] = complex(1, 0)
    return coeffs


def gaussian_coefficients(count: int, bound: int = 5) -> st.SearchStrategy:
    parts = st.integers(-bound, bound)
    return st.lists(st.builds(complex, parts, parts), min_size=count, max_size=count).map(_nonzero_lead)


def _jitter_for(m: int) -> float:
    """Largest perturbation that keeps the matching to rotated m-th roots one-to-one."""
    return 0.45 if m == 1 else min(0.5, 0.45 * math.sin(math.pi / m))


@st.composite
def near_roots_of_unity(draw, m: int) -> PointTuple:
    jitter = _jitter_for(m) * draw(st.floats(0, 1))
    return PointTuple.from_complex(draw(rotated_roots(m, jitter=jitter)))


towers = st.sampled_from(_SMALL_TOWERS).map(RadicalTower.from_pairs)


@st.composite
def elements(draw, tower: RadicalTower, bound: int = 3, top: bool = True) -> TowerElement:
    """An element with a nonzero coefficient on some slot involving the top generator.

    With ``top=False`` the element lies in the field below the top generator instead.
    """
    degrees = tower.degrees
    slots = [s for s in itertools.product(*(range(d) for d in degrees)) if top or s[-1] == 0]
    coefficient = st.integers(-bound, bound)
    terms = draw(st.dictionaries(st.sampled_from(slots), coefficient, max_size=len(slots)))
    forced = draw(st.sampled_from([s for s in slots if s[-1] > 0] if top else slots))
    if not terms.get(forced):
        terms[forced] = draw(coefficient.filter(bool))
    return TowerElement.from_terms(terms, degrees)


@st.composite
def l2_instances(draw):
    d = draw(st.integers(2, 8))
    points = PointTuple.from_complex(draw(point_lists(d)))
    return points, draw(gaussian_coefficients(draw(st.integers(1, d))))


@st.composite
def windowed_instances(draw):
    d = draw(st.integers(2, 8))
    u = draw(angles)
    wobble = draw(st.lists(st.floats(-0.1, 0.1), min_size=d, max_size=d))
    points = PointTuple.from_complex(cmath.rect(1.0, u + 2 * math.pi * j / d + wobble[j]) for j in range(d))
    indices = sorted(draw(st.sets(st.integers(0, d - 1), min_size=1)))
    low = draw(st.integers(0, 3))
    window = range(low, low + len(indices))
    exponents = sorted(draw(st.sets(st.sampled_from(window), min_size=1)))
    coeffs = draw(gaussian_coefficients(max(exponents) + 1 + draw(st.integers(0, 3))))
    return points, coeffs, indices, exponents


@st.composite
def lift_instances(draw):
    m = draw(st.integers(1, 5))
    return draw(near_roots_of_unity(m)), draw(st.integers(1, 7))


_COPRIME_PAIRS = [(m, n) for m in range(1, 6) for n in range(1, 6) if math.gcd(m, n) == 1]


@st.composite
def product_instances(draw):
    m, n = draw(st.sampled_from(_COPRIME_PAIRS))
    return draw(near_roots_of_unity(m)), draw(near_roots_of_unity(n))


@st.composite
def tower_elements(draw):
    tower = draw(towers)
    return tower, draw(elements(tower))


@st.composite
def linear_instances(draw):
    """A tower with a1 * x_top + a0, a1 nonzero and a0 taken from the field below."""
    tower = draw(towers)
    a1 = draw(elements(tower, top=False))
    a0 = draw(st.one_of(st.none(), elements(tower, top=False)))
    return tower, a1, a0


@st.composite
def weil_gap_instances(draw):
    d = draw(st.sampled_from((2, 3, 5, 7)))
    p = draw(st.sampled_from([p for p in primerange(2, 5000 // d + 1) if p != d]))
    tower = RadicalTower.from_pairs([(p, d)])
    return tower, draw(elements(tower, bound=2))


odd_primes = st.integers(2, 200).map(next_prime)
residue_instances = st.tuples(odd_primes, st.integers(1, 2000))
chain_instances = st.tuples(st.sampled_from((3, 5, 7)), st.integers(1, 2000))


# --- helpers -----------------------------------------------------------------------


def _max_value(points: PointTuple, coeffs: Sequence[complex]) -> RealInterval:
    """Enclosure of max_i |B(xi_i)| by Horner's rule on boxes."""
    boxes = [ComplexBox.from_complex(c) for c in coeffs]
    values = []
    for xi in points:
        acc = boxes[-1]
        for b in reversed(boxes[:-1]):
            acc = (acc * xi + b).rounded(_BITS)
        values.append(acc.abs(_BITS))
    return RealInterval.maximum(values)


def _prime_in_class(d: int, multiplier: int) -> int:
    """The least prime p = d - 1 (mod d^2) above multiplier * d^2, within a few hundred periods if possible."""
    start = multiplier * d * d
    try:
        return find_prime_in_ap(start, start + 400 * d * d, d - 1, d * d)
    except PrimeNotFoundError:
        return find_prime_in_ap(d * d, 10**9, d - 1, d * d)


def _linear_element(tower: RadicalTower, a1: TowerElement, a0: Optional[TowerElement]) -> TowerElement:
    terms = {exps[:-1] + (1,): c for exps, c in a1.terms}
    for exps, c in a0.terms if a0 is not None else ():
        terms[exps] = c
    return TowerElement.from_terms(terms, tower.degrees)


_X = Symbol("x")


def dedekind_grid(max_degree: int = 5, bound: int = 3, primes: Sequence[int] = (2, 3, 5)) -> Iterator[tuple]:
    """Every monic f of degree <= max_degree with coefficients in [-bound, bound], irreducible over Q, with each q."""
    for degree in range(1, max_degree + 1):
        for lower in itertools.product(range(-bound, bound + 1), repeat=degree):
            f = PolyZ(lower + (1,))
            if degree > 1 and not Poly(f.descending(), _X, domain=ZZ).is_irreducible:
                continue
            for q in primes:
                yield f, q


# --- checks -----------------------------------------------------------------------


def check_l2_bound(instance, tol: Fraction) -> Outcome:
    points, coeffs = instance
    bound = l2_lower_bound(points, coeffs, tol)
    return Outcome(_max_value(points, coeffs).hi - bound.lo, f"d={len(points)} B={coeffs}")


def check_scaled_l2_bound(instance, tol: Fraction) -> Outcome:
    points, coeffs = instance
    bound = scaled_l2_lower_bound(points, coeffs, tol)
    return Outcome(_max_value(points, coeffs).hi - bound.lo, f"d={len(points)} B={coeffs}")


def check_windowed_l2_bound(instance, tol: Fraction) -> Outcome:
    points, coeffs, indices, exponents = instance
    bound = windowed_l2_lower_bound(points, coeffs, indices, exponents, tol)
    detail = f"d={len(points)} I={indices} J={exponents} B={coeffs}"
    return Outcome(_max_value(points, coeffs).hi - bound.lo, detail)


def check_root_lift(instance, tol: Fraction) -> Outcome:
    alpha, n = instance
    d_alpha = discrepancy(alpha, tol).value
    if d_alpha.hi > Fraction(1, 2):
        return Outcome(None, f"m={len(alpha)} D(alpha) above 1/2")
    d_lift = discrepancy(lift_tuple(alpha, n, _BITS), tol).value
    return Outcome(Fraction(2, n) * d_alpha.hi - d_lift.lo, f"m={len(alpha)} n={n} alpha={alpha.centers()}")


def check_product(instance, tol: Fraction) -> Outcome:
    alpha, beta = instance
    d_alpha = discrepancy(alpha, tol).value
    d_beta = discrepancy(beta, tol).value
    d_prod = discrepancy(product_tuple(alpha, beta, _BITS), tol).value
    bound = (1 + d_alpha.hi) * (1 + d_beta.hi) - 1
    return Outcome(bound - d_prod.lo, f"m={len(alpha)} n={len(beta)}")


def check_house_bound(instance, tol: Fraction) -> Outcome:
    tower, elt = instance
    lower = house_lower_bound(tower, elt, tol)
    observed = house(tower, elt, tol).value
    return Outcome(observed.hi - lower.lo, f"tower={tower.degrees}/{tower.radicands} elt={elt}")


def check_new_element(instance, tol: Fraction) -> Outcome:
    tower, elt = instance
    lower = new_element_house_bound(tower, len(tower), tol)
    observed = house(tower, elt, tol).value
    return Outcome(observed.hi - lower.lo, f"tower={tower.degrees}/{tower.radicands} elt={elt}")


def check_linear_element(instance, tol: Fraction) -> Outcome:
    """house(a1 x + a0) >= house(a1) house(x) for the top generator x and a1, a0 from the field below."""
    tower, a1, a0 = instance
    elt = _linear_element(tower, a1, a0)
    generator = tower.generator(len(tower))
    product = house(tower, a1, tol).value * house(tower, generator, tol).value
    observed = house(tower, elt, tol).value
    return Outcome(observed.hi - product.lo, f"tower={tower.degrees}/{tower.radicands} elt={elt}")


def check_weil_gap(instance, tol: Fraction) -> Outcome:
    tower, elt = instance
    step = tower.step(1)
    bound = weil_gap_bound(0, step.p, step.d, _BITS)
    if bound.lo <= 0:
        return Outcome(None, f"p={step.p} d={step.d} bound not positive")
    observed = weil_height_integral(tower, elt, tol).value
    return Outcome(observed.hi - bound.lo, f"p={step.p} d={step.d} elt={elt}")


def check_fermat_residue(instance, tol: Fraction) -> Outcome:
    d, multiplier = instance
    if fermat_quotient_residue(d) != 1:
        return Outcome(Fraction(-1), f"residue of d={d} is not 1")
    p = _prime_in_class(d, multiplier)
    if fermat_quotient_divides(p, d):
        return Outcome(Fraction(-1), f"d^2 divides p^d - p for p={p} d={d}")
    return Outcome(Fraction(0), f"p={p} d={d}")


def check_dedekind(instance, tol: Fraction) -> Outcome:
    f, q = instance
    gcd_form = dedekind_index_coprime(f, q)
    factored = dedekind_factored_form(f, q)
    margin = Fraction(0) if gcd_form == factored else Fraction(-1)
    return Outcome(margin, f"f={f} q={q} gcd={gcd_form} factored={factored}")


def check_monogenic_chain(instance, tol: Fraction) -> Outcome:
    d, multiplier = instance
    p = _prime_in_class(d, multiplier)
    step = RadicalStep(p, d)
    ok = step.congruence and not fermat_quotient_divides(p, d) and step.monogenic
    if ok and d <= 6 and p <= 10**6:
        ok = discriminant_via_resultant(step.polynomial) == pure_radical_discriminant(d, p)
    return Outcome(Fraction(0) if ok else Fraction(-1), f"p={p} d={d}")


SUITES: Dict[str, Suite] = {
    "l2-bound": Suite(check_l2_bound, 1000, strategy=l2_instances()),
    "scaled-l2-bound": Suite(check_scaled_l2_bound, 1000, strategy=l2_instances()),
    "windowed-l2-bound": Suite(check_windowed_l2_bound, 1000, strategy=windowed_instances()),
    "root-lift": Suite(check_root_lift, 500, strategy=lift_instances()),
    "product": Suite(check_product, 500, strategy=product_instances()),
    "house-bound": Suite(check_house_bound, 200, strategy=tower_elements()),
    "new-element": Suite(check_new_element, 200, strategy=tower_elements()),
    "linear-element": Suite(check_linear_element, 200, strategy=linear_instances()),
    "weil-gap": Suite(check_weil_gap, 200, strategy=weil_gap_instances()),
    "fermat-residue": Suite(check_fermat_residue, 200, strategy=residue_instances),
    "dedekind": Suite(check_dedekind, None, grid=dedekind_grid),
    "monogenic-chain": Suite(check_monogenic_chain, 100, strategy=chain_instances),
}


def draw_instances(suite: Suite, count: Optional[int], seed: int) -> List[Any]:
    """The suite's instances: a seeded hypothesis draw, or the grid in order.

    Hypothesis stops early on strategies with few distinct values, so a draw
    may hold fewer than ``count`` instances.
    """
    if suite.grid is not None:
        return list(itertools.islice(suite.grid(), count))
    if suite.strategy is None:
        raise PreconditionError("A suite needs a strategy or a grid")
    drawn: List[Any] = []

    @hypothesis.seed(seed)
    @hypothesis.settings(
        max_examples=count or 1,
        database=None,
        deadline=None,
        derandomize=False,
        phases=[Phase.generate],
        suppress_health_check=list(HealthCheck),
        verbosity=Verbosity.quiet,
    )
    @given(suite.strategy)
    def collect(instance):
        drawn.append(instance)

    collect()
    return drawn[:count]


def run_suite(
    name: str,
    seed: Optional[int] = None,
    instances: Optional[int] = None,
    tol: Fraction = DEFAULT_TOL,
    threads: Optional[int] = None,
) -> SuiteResult:
    """Run a named suite; the result does not depend on the thread count.

    Raises:
        KeyError: unknown suite name.
    """
    suite = SUITES[name]
    seed = settings.NORTHCOTT_SEED if seed is None else seed
    count = suite.instances if instances is None else instances
    workers = threads or settings.NORTHCOTT_THREADS
    tol = Fraction(tol)
    cases = draw_instances(suite, count, seed)

    def one(index: int) -> Outcome:
        try:
            return suite.check(cases[index], tol)
        except PreconditionError as e:
            logger.debug("Instance skipped", suite=name, index=index, error=str(e))
            return Outcome(None, f"instance {index}: {e}")
        except NorthcottError as e:
            logger.warning("Instance failed", suite=name, index=index, error=str(e))
            return Outcome(None, f"instance {index}: {type(e).__name__}: {e}", error=True)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, range(len(cases))))
    else:
        outcomes = [one(i) for i in range(len(cases))]

    margins = [o.margin for o in outcomes if o.margin is not None]
    failures = [o for o in outcomes if o.error or (o.margin is not None and o.margin < -3 * tol)]
    errors = sum(o.error for o in outcomes)
    worst = min(margins) if margins else None
    result = SuiteResult(
        name=name,
        seed=seed,
        instances=len(cases),
        violations=len(failures),
        errors=errors,
        skipped=len(cases) - len(margins) - errors,
        worst_margin=None if worst is None else decimal_string(worst),
        examples=[o.detail for o in failures[:_MAX_EXAMPLES]],
    )
    logger.info("Suite finished", suite=name, seed=seed, instances=len(cases), violations=result.violations)
    return result
