"""Certificate-emitting tower constructors and independent certificate verification.

Three families are built:

* house towers: p_i = d_i - 1 (mod d_i^2) drawn from (T^d/2, T^d) ("thm12a"),
  (T^d, 2T^d) ("thm12b") or the latter with targets T_j shrinking to t
  ("thm12c");
* Weil towers: p_i fresh in (e^(2t d_i), 2 e^(2t d_i)) ("thm14");
* weighted towers: log p_i in [d_i^c, log 2 + d_i^c] with c = 1 - gamma + epsilon/2
  and d_(i+1) >= 2 d_i ("thm16").

Every prime is the least admissible one found by an ascending scan, so the
verifier can re-run the same selection and demand the same answer.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Optional, Sequence, Union

from pydantic import ValidationError

from . import __version__
from .bounds import (
    enclosure,
    gamma_northcott_growth,
    generator_weighted_height,
    northcott_report,
    weil_gap_bound,
)
from .config import OrderingMode, settings
from .discrepancy import discrepancy, normalized_tuple
from .exactcore import (
    WindowEdge,
    as_fraction,
    find_prime_in_ap,
    find_prime_in_window,
    fraction_str,
    in_window,
    is_prime,
    next_prime,
)
from .exceptions import (
    InvalidParamsError,
    MalformedCertificateError,
    PreconditionError,
    PrimeNotFoundError,
    SearchExhaustedError,
)
from .heights import RadicalStep, RadicalTower
from .logging_config import get_logger
from .models import (
    BoundsReport,
    Certificate,
    Enclosure,
    Mismatch,
    RootConditionCheck,
    SkippedStep,
    StepChecks,
    StepRecord,
    Toolchain,
    VerificationReport,
    WindowRecord,
)
from .numerics import IntervalContext, PointTuple, RealInterval, bits_for

logger = get_logger(__name__)

Number = Union[int, Fraction]

HOUSE_BELOW = "thm12a"
HOUSE_ABOVE = "thm12b"
HOUSE_CONVERGING = "thm12c"
WEIL = "thm14"
WEIGHTED = "thm16"

HOUSE_VARIANTS = (HOUSE_BELOW, HOUSE_ABOVE, HOUSE_CONVERGING)
# CLI spellings of the certificate variant names
VARIANT_ALIASES = {
    "a": HOUSE_BELOW,
    "b": HOUSE_ABOVE,
    "c": HOUSE_CONVERGING,
    "house-below": HOUSE_BELOW,
    "house-above": HOUSE_ABOVE,
    "house-converging": HOUSE_CONVERGING,
    "weil": WEIL,
    "weighted": WEIGHTED,
}

_MAX_SKIPS = 64

_MANDATORY = {
    HOUSE_BELOW: ("primality", "interval_member", "congruence", "monogenic", "prime_fresh", "eisenstein"),
    HOUSE_ABOVE: ("primality", "interval_member", "congruence", "monogenic", "prime_fresh", "eisenstein"),
    HOUSE_CONVERGING: ("primality", "interval_member", "congruence", "monogenic", "prime_fresh", "eisenstein"),
    WEIL: ("primality", "interval_member", "prime_fresh", "eisenstein"),
    WEIGHTED: ("primality", "interval_member", "eisenstein"),
}

_POLICIES = {
    HOUSE_BELOW: "least p = d-1 mod d^2 in (T^d/2, T^d); degrees {degrees}",
    HOUSE_ABOVE: "least p = d-1 mod d^2 in (T^d, 2T^d); degrees {degrees}",
    HOUSE_CONVERGING: "least p = d-1 mod d^2 in (T_j^d, 2T_j^d), T_j = t(1+2^-j) in diagonal order; degrees {degrees}",
    WEIL: "least fresh prime in (e^(2td), 2e^(2td)), widened upward when empty; degrees {degrees}",
    WEIGHTED: "least fresh prime with log p in [d^c, log 2 + d^c], else least prime there (flagged); degrees {degrees}",
}


def resolve_variant(name: str) -> str:
    variant = VARIANT_ALIASES.get(name, name)
    if variant not in _MANDATORY:
        raise InvalidParamsError(f"Unknown variant {name!r}")
    return variant


# --- schedules ---------------------------------------------------------------


def diagonal_target(step: int) -> int:
    """Target index served by the 1-based step in the order 1; 1,2; 1,2,3; ..."""
    if step < 1:
        raise PreconditionError("steps are 1-based")
    row = 1
    while step > row:
        step -= row
        row += 1
    return step


def converging_target(t: Fraction, j: int) -> Fraction:
    """T_j = t (1 + 2^-j)."""
    return t * (1 + Fraction(1, 2**j))


def _degree_policy(variant: str, ordering: OrderingMode) -> str:
    if variant == WEIGHTED:
        return "doubling"
    if variant in HOUSE_VARIANTS and ordering is OrderingMode.STRICT:
        return "strict"
    return "successive"


def degree_candidates(policy: str, d_seed: int, previous: Optional[RadicalStep], used: "set[int]") -> Iterator[int]:
    """Candidate degrees for the next step, in the order they are tried."""
    if previous is None:
        start = d_seed
    elif policy == "strict":
        start = max(previous.p, previous.d) + 1
    elif policy == "doubling":
        start = 2 * previous.d
    else:
        start = previous.d + 1
    d = start - 1
    while True:
        d = next_prime(d)
        if policy == "successive" and d in used:
            continue
        yield d


# --- prime selection ------------------------------------------------------------


@dataclass
class Selection:
    p: int
    interval: Optional["tuple[Fraction, Fraction]"] = None
    window: Optional[WindowRecord] = None
    notes: list = field(default_factory=list)


def _exp_edge(exponent_fn, closed: bool) -> WindowEdge:
    def bracket(bits: int) -> "tuple[Fraction, Fraction]":
        value = IntervalContext(bits).exp(exponent_fn(bits))
        return value.lo, value.hi

    return WindowEdge(bracket=bracket, closed=closed)


def _edge_enclosure(edge: WindowEdge, scale: int = 1) -> Enclosure:
    if edge.exact is not None:
        return enclosure(RealInterval.point(edge.exact * scale))
    lo, hi = edge.bracket(settings.NORTHCOTT_PRECISION_BITS)
    return enclosure(RealInterval(lo * scale, hi * scale))


def _scaled_edge(edge: WindowEdge, scale: int, closed: bool) -> WindowEdge:
    if edge.exact is not None:
        return WindowEdge(exact=edge.exact * scale, closed=closed)
    base = edge.bracket

    def bracket(bits: int) -> "tuple[Fraction, Fraction]":
        lo, hi = base(bits)
        return lo * scale, hi * scale

    return WindowEdge(bracket=bracket, closed=closed)


def house_interval(variant: str, target: Fraction, d: int) -> "tuple[Fraction, Fraction]":
    power = target**d
    if variant == HOUSE_BELOW:
        return power / 2, power
    return power, 2 * power


def weil_lower_edge(params: dict, d: int) -> WindowEdge:
    """e^(2td), exact when the base b = e^(2t) is given as a rational."""
    if "exp_base" in params:
        return WindowEdge(exact=as_fraction(params["exp_base"]) ** d)
    t = as_fraction(params["t"])
    if t == 0:
        return WindowEdge(exact=Fraction(1))
    return _exp_edge(lambda bits: RealInterval.point(2 * t * d), closed=False)


def weighted_lower_edge(params: dict, d: int) -> WindowEdge:
    """e^(d^c) with c = 1 - gamma + epsilon/2."""
    c = 1 - as_fraction(params["gamma"]) + as_fraction(params["epsilon"]) / 2
    return _exp_edge(lambda bits: IntervalContext(bits).pow(d, c), closed=True)


def _window_scan(lower: WindowEdge, upper: Optional[WindowEdge], exclude: "set[int]", max_candidates=None) -> int:
    return find_prime_in_window(
        lower,
        upper,
        exclude=exclude,
        bits=settings.NORTHCOTT_PRECISION_BITS,
        ceiling=settings.NORTHCOTT_PRECISION_CEILING,
        max_candidates=max_candidates,
    )


def select_prime(variant: str, params: dict, d: int, step_index: int, used: "set[int]") -> Selection:
    """The canonical prime for a step of degree d; PrimeNotFoundError if there is none."""
    exclude = set(used) | {d}
    if variant in HOUSE_VARIANTS:
        t = as_fraction(params["t"])
        target = converging_target(t, diagonal_target(step_index)) if variant == HOUSE_CONVERGING else t
        lo, hi = house_interval(variant, target, d)
        p = find_prime_in_ap(lo, hi, d - 1, d * d, exclude)
        return Selection(p, interval=(lo, hi))

    if variant == WEIL:
        lower = weil_lower_edge(params, d)
        upper = _scaled_edge(lower, 2, closed=False)
        record = WindowRecord(lower=_edge_enclosure(lower), upper=_edge_enclosure(lower, 2))
        try:
            p = _window_scan(lower, upper, exclude)
            interval = (lower.exact, 2 * lower.exact) if lower.exact is not None else None
            return Selection(p, interval=interval, window=None if interval else record)
        except PrimeNotFoundError:
            p = _window_scan(lower, None, exclude, settings.NORTHCOTT_SEARCH_SPAN)
            widened = WindowRecord(lower=record.lower, widened=True)
            return Selection(p, window=widened, notes=["window held no admissible prime; widened upward"])

    if variant == WEIGHTED:
        lower = weighted_lower_edge(params, d)
        upper = _scaled_edge(lower, 2, closed=True)
        record = WindowRecord(
            lower=_edge_enclosure(lower), upper=_edge_enclosure(lower, 2), lower_closed=True, upper_closed=True
        )
        try:
            return Selection(_window_scan(lower, upper, exclude), window=record)
        except PrimeNotFoundError:
            p = _window_scan(lower, upper, set())
            return Selection(p, window=record, notes=[f"no fresh prime in window; took {p} (freshness waived)"])

    raise InvalidParamsError(f"Unknown variant {variant!r}")


def _window_text(variant: str, params: dict, d: int, step_index: int) -> str:
    if variant in HOUSE_VARIANTS:
        t = as_fraction(params["t"])
        target = converging_target(t, diagonal_target(step_index)) if variant == HOUSE_CONVERGING else t
        lo, hi = house_interval(variant, target, d)
        return f"({fraction_str(lo)}, {fraction_str(hi)}) with p = {d - 1} mod {d * d}"
    if variant == WEIL:
        return f"(e^(2t*{d}), 2e^(2t*{d}))"
    return f"[e^({d}^c), 2e^({d}^c)]"


# --- step checks --------------------------------------------------------------


def _member(p: int, lower: WindowEdge, upper: Optional[WindowEdge]) -> bool:
    return in_window(p, lower, upper, settings.NORTHCOTT_PRECISION_BITS, settings.NORTHCOTT_PRECISION_CEILING)


def step_checks(
    variant: str, step: RadicalStep, prior: Sequence[RadicalStep], member: bool, notes: Sequence[str] = ()
) -> StepChecks:
    """Recompute every flag of one step from (p, d), its window membership and the steps before it."""
    prior_primes = {s.p for s in prior} | {s.d for s in prior}
    fresh = step.p not in prior_primes and step.d not in prior_primes and step.p != step.d
    primality = is_prime(step.p) and is_prime(step.d)
    checks = StepChecks(
        primality=primality,
        interval_member=member,
        congruence=step.congruence if variant in HOUSE_VARIANTS else None,
        monogenic=step.monogenic if primality else False,
        prime_fresh=fresh,
        eisenstein=step.eisenstein,
        violation_notes=list(notes),
    )
    if not fresh and variant == WEIGHTED:
        checks.violation_notes.append("prime freshness waived for an early step")
    if variant in (WEIL, WEIGHTED) and not checks.monogenic:
        checks.violation_notes.append("monogenicity not required for this variant")
    return checks


def _membership(variant: str, params: dict, step: RadicalStep, record: StepRecord) -> bool:
    """Is p inside the window written in the record?"""
    if record.interval is not None:
        lo, hi = (as_fraction(v) for v in record.interval)
        closed = variant == WEIGHTED
        return (lo <= step.p <= hi) if closed else (lo < step.p < hi)
    if record.window is None:
        return False
    if variant == WEIL:
        lower = weil_lower_edge(params, step.d)
        upper = None if record.window.widened else _scaled_edge(lower, 2, closed=False)
    else:
        lower = weighted_lower_edge(params, step.d)
        upper = _scaled_edge(lower, 2, closed=True)
    return _member(step.p, lower, upper)


# --- reports ------------------------------------------------------------------


def _params_tol(params: dict) -> Fraction:
    return as_fraction(params["tol"]) if "tol" in params else settings.tolerance


def build_report(variant: str, params: dict, tower: RadicalTower) -> BoundsReport:
    tol = _params_tol(params)
    bits = max(settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    if variant in (HOUSE_BELOW, HOUSE_ABOVE):
        window = "below" if variant == HOUSE_BELOW else "above"
        return northcott_report(tower, tol, as_fraction(params["t"]), window)
    report = northcott_report(tower, tol)
    if variant == WEIL:
        ctx = IntervalContext(bits)
        weil = [enclosure(ctx.log(s.p) / s.d) for s in tower.steps]
        if "exp_base" in params:
            t = ctx.log(as_fraction(params["exp_base"])) / 2
            window = [enclosure(t).lo, enclosure(2 * t).hi]
        else:
            t_exact = as_fraction(params["t"])
            window = [fraction_str(t_exact), fraction_str(2 * t_exact)]
        return report.model_copy(update={"weil_heights": weil, "weil_target_window": window})
    if variant == WEIGHTED:
        gamma, epsilon = as_fraction(params["gamma"]), as_fraction(params["epsilon"])
        return report.model_copy(
            update={
                "weighted_heights": [
                    enclosure(generator_weighted_height(gamma - epsilon, s.p, s.d, bits)) for s in tower.steps
                ],
                "weil_gap_bounds": [enclosure(weil_gap_bound(gamma, s.p, s.d, bits)) for s in tower.steps],
                "growth": [enclosure(gamma_northcott_growth(gamma, s.p, s.d, bits)) for s in tower.steps],
            }
        )
    return report


# --- construction -------------------------------------------------------------


def _build(
    variant: str,
    params: dict,
    k: int,
    d_seed: int,
    ordering: OrderingMode,
    skip_exhausted: bool,
) -> Certificate:
    policy = _degree_policy(variant, ordering)
    steps: list = []
    records: list = []
    checks: list = []
    skipped: list = []
    used: set = set()
    logger.info("Constructing tower", variant=variant, steps=k, d_seed=d_seed, ordering=ordering.value)

    while len(steps) < k:
        index = len(steps) + 1
        previous = steps[-1] if steps else None
        for attempt, d in enumerate(degree_candidates(policy, d_seed, previous, used)):
            try:
                selection = select_prime(variant, params, d, index, used)
                break
            except PrimeNotFoundError as e:
                window = _window_text(variant, params, d, index)
                if not skip_exhausted or attempt >= _MAX_SKIPS:
                    raise SearchExhaustedError(index, d, window, str(e)) from e
                logger.info("Skipping exhausted degree", step=index, d=d)
                skipped.append(SkippedStep(d=str(d), reason=f"no admissible prime in {window}"))
        step = RadicalStep(selection.p, d, selection.interval)
        record = step.to_record()
        record.window = selection.window
        if variant == HOUSE_CONVERGING:
            j = diagonal_target(index)
            record.target_index = j
            record.target = fraction_str(converging_target(as_fraction(params["t"]), j))
        member = _membership(variant, params, step, record)
        checks.append(step_checks(variant, step, steps, member, selection.notes))
        logger.debug("Step selected", step=index, p=step.p, d=d)
        steps.append(step)
        records.append(record)
        used |= {step.p, step.d}

    tower = RadicalTower(tuple(steps), ordering)
    for note in tower.validate():
        step_no = int(note.split(":")[0].split()[1])
        checks[step_no - 1].violation_notes.append(note)

    return Certificate(
        variant=variant,
        params=params,
        tower={"ordering_mode": ordering.value, "steps": records},
        per_step=checks,
        report=build_report(variant, params, tower),
        toolchain=Toolchain(
            version=__version__,
            ordering_mode=ordering.value,
            search_policy=_POLICIES[variant].format(degrees=policy),
        ),
        skipped=skipped,
    )


def _check_count(k: int) -> None:
    if k < 1:
        raise InvalidParamsError(f"k must be >= 1, got {k}")


def _tol_param(tol: Optional[Number]) -> str:
    return fraction_str(Fraction(tol) if tol is not None else settings.tolerance)


def construct_house_tower(
    variant: str,
    t: Union[Number, str],
    k: int,
    d_seed: int,
    ordering: Optional[Union[OrderingMode, str]] = None,
    skip_exhausted: Optional[bool] = None,
    tol: Optional[Number] = None,
) -> Certificate:
    """A tower whose generator houses sit just below t, just above t, or converge to t from above.

    Raises:
        SearchExhaustedError: some degree's window holds no admissible prime.
        InvalidParamsError: t <= 1, k < 1 or d_seed not an odd prime.
    """
    variant = resolve_variant(variant)
    if variant not in HOUSE_VARIANTS:
        raise InvalidParamsError(f"{variant} is not a house variant")
    t = as_fraction(t)
    if t <= 1:
        raise InvalidParamsError(f"t must exceed 1, got {t}")
    _check_count(k)
    if d_seed < 3 or not is_prime(d_seed):
        raise InvalidParamsError(f"d_seed must be an odd prime, got {d_seed}")
    ordering = OrderingMode(ordering or settings.NORTHCOTT_ORDERING)
    skip = settings.NORTHCOTT_SKIP_EXHAUSTED if skip_exhausted is None else skip_exhausted
    params = {"t": fraction_str(t), "k": str(k), "d_seed": str(d_seed), "tol": _tol_param(tol)}
    return _build(variant, params, k, d_seed, ordering, skip)


def construct_weil_tower(
    k: int,
    d_seed: int,
    t: Optional[Union[Number, str]] = None,
    exp_base: Optional[Union[Number, str]] = None,
    skip_exhausted: Optional[bool] = None,
    tol: Optional[Number] = None,
) -> Certificate:
    """A tower over Q whose generators have Weil heights log(p_i)/d_i tending to 2t.

    Give either t >= 0 or the rational base b = e^(2t) >= 1.
    """
    if (t is None) == (exp_base is None):
        raise InvalidParamsError("Give exactly one of t and exp_base")
    _check_count(k)
    if not is_prime(d_seed):
        raise InvalidParamsError(f"d_seed must be prime, got {d_seed}")
    params = {"k": str(k), "d_seed": str(d_seed), "tol": _tol_param(tol)}
    if t is not None:
        t = as_fraction(t)
        if t < 0:
            raise InvalidParamsError(f"t must be >= 0, got {t}")
        params["t"] = fraction_str(t)
    else:
        base = as_fraction(exp_base)
        if base < 1:
            raise InvalidParamsError(f"exp_base must be >= 1, got {base}")
        params["exp_base"] = fraction_str(base)
    skip = settings.NORTHCOTT_SKIP_EXHAUSTED if skip_exhausted is None else skip_exhausted
    return _build(WEIL, params, k, d_seed, OrderingMode.WEAK, skip)


def construct_weighted_tower(
    gamma: Union[Number, str],
    epsilon: Union[Number, str],
    k: int,
    d_seed: int,
    skip_exhausted: Optional[bool] = None,
    tol: Optional[Number] = None,
) -> Certificate:
    """A tower that is gamma-Northcott but has generators of vanishing (gamma - epsilon)-weighted height."""
    gamma, epsilon = as_fraction(gamma), as_fraction(epsilon)
    if not 0 <= gamma <= 1:
        raise InvalidParamsError(f"gamma must lie in [0, 1], got {gamma}")
    if epsilon <= 0:
        raise InvalidParamsError(f"epsilon must be positive, got {epsilon}")
    _check_count(k)
    if not is_prime(d_seed):
        raise InvalidParamsError(f"d_seed must be prime, got {d_seed}")
    params = {
        "gamma": fraction_str(gamma),
        "epsilon": fraction_str(epsilon),
        "k": str(k),
        "d_seed": str(d_seed),
        "tol": _tol_param(tol),
    }
    skip = settings.NORTHCOTT_SKIP_EXHAUSTED if skip_exhausted is None else skip_exhausted
    return _build(WEIGHTED, params, k, d_seed, OrderingMode.WEAK, skip)


# --- root towers ---------------------------------------------------------------


def check_root_conditions(
    data: Sequence["tuple[PointTuple, int]"],
    tol: Number = Fraction(1, 10**9),
    ratio_slack: Number = Fraction(1, 20),
) -> "list[RootConditionCheck]":
    """Check D(c) <= m^(-3/2) (1 - house^(1/n - 1)), s >= 1 and (s/house)^(1/n) ~ 1 per generator.

    Each entry holds the conjugates of a generator and its root index n.
    Degree multiplicativity is recorded as asserted by the caller.
    """
    tol = Fraction(tol)
    slack = Fraction(ratio_slack)
    bits = max(settings.NORTHCOTT_PRECISION_BITS, bits_for(tol))
    ctx = IntervalContext(bits)
    results = []
    for index, (points, n) in enumerate(data, start=1):
        if n <= 1:
            raise PreconditionError(f"Root index must exceed 1, got {n}")
        m = len(points)
        moduli = points.moduli(bits)
        top = RealInterval.maximum(moduli)
        s = RealInterval.minimum(moduli)
        disc = discrepancy(normalized_tuple(points, bits), tol).value
        m_factor = RealInterval.point(m) * RealInterval.point(m).sqrt(bits)
        threshold = (RealInterval.point(1) - ctx.pow(top, Fraction(1, n) - 1)) / m_factor
        ratio = ctx.pow(s / top, Fraction(1, n)) if s.lo > 0 else RealInterval.point(0)
        results.append(
            RootConditionCheck(
                index=index,
                discrepancy_ok=disc.hi <= threshold.lo,
                s_at_least_one=s.lo >= 1,
                ratio_near_one=abs(ratio - 1).hi <= slack,
                discrepancy=enclosure(disc),
                threshold=enclosure(threshold),
                house=enclosure(top),
                s=enclosure(s),
            )
        )
    return results


# --- verification ------------------------------------------------------------


_REQUIRED_PARAMS = {
    HOUSE_BELOW: ("t", "k", "d_seed"),
    HOUSE_ABOVE: ("t", "k", "d_seed"),
    HOUSE_CONVERGING: ("t", "k", "d_seed"),
    WEIL: ("k", "d_seed"),
    WEIGHTED: ("gamma", "epsilon", "k", "d_seed"),
}


def load_certificate(source: Union[Certificate, dict, str, bytes]) -> Certificate:
    """Parse and schema-check a certificate.

    Raises:
        MalformedCertificateError: on schema errors, misaligned steps or non-numeric fields.
    """
    if isinstance(source, Certificate):
        cert = source
    else:
        try:
            if isinstance(source, (str, bytes)):
                cert = Certificate.model_validate_json(source)
            else:
                cert = Certificate.model_validate(source)
        except ValidationError as e:
            raise MalformedCertificateError(
                f"Certificate does not match schema v1: {e.error_count()} error(s)"
            ) from e
    if len(cert.tower.steps) != len(cert.per_step):
        raise MalformedCertificateError("per_step is not aligned with the tower steps")
    missing = [name for name in _REQUIRED_PARAMS[cert.variant] if name not in cert.params]
    if cert.variant == WEIL and ("t" in cert.params) == ("exp_base" in cert.params):
        missing.append("t|exp_base")
    if missing:
        raise MalformedCertificateError(f"Missing params for {cert.variant}: {', '.join(missing)}")
    try:
        for s in cert.tower.steps:
            if int(s.p) < 2 or int(s.d) < 2:
                raise MalformedCertificateError(f"Step values must be integers >= 2, got p={s.p}, d={s.d}")
        for value in cert.params.values():
            as_fraction(value)
    except (ValueError, PreconditionError) as e:
        raise MalformedCertificateError(f"Non-numeric field in certificate: {e}") from e
    return cert


def _flag(value: Optional[bool]) -> str:
    return "null" if value is None else str(value).lower()


def _compare_enclosures(field_name: str, recorded, recomputed, mismatches: list, step=None) -> None:
    if recorded is None and recomputed is None:
        return
    if (recorded is None) != (recomputed is None) or len(recorded) != len(recomputed):
        mismatches.append(Mismatch(step=step, field=field_name, recorded=str(recorded), recomputed=str(recomputed)))
        return
    for i, (a, b) in enumerate(zip(recorded, recomputed), start=1):
        if not RealInterval.from_json(a.model_dump()).overlaps(RealInterval.from_json(b.model_dump())):
            mismatches.append(
                Mismatch(step=i, field=field_name, recorded=json.dumps(a.model_dump()), recomputed=json.dumps(b.model_dump()))
            )


def _verify_report(cert: Certificate, tower: RadicalTower, mismatches: list) -> None:
    recomputed = build_report(cert.variant, cert.params, tower)
    recorded = cert.report
    for name in ("eta_values", "house_values", "weil_heights", "weighted_heights", "weil_gap_bounds", "growth"):
        _compare_enclosures(f"report.{name}", getattr(recorded, name), getattr(recomputed, name), mismatches)
    for name in ("prefix_liminf_eta", "prefix_min_house"):
        _compare_enclosures(f"report.{name}", [getattr(recorded, name)], [getattr(recomputed, name)], mismatches)
    for name in ("informative", "window_flags", "claimed_limit", "window", "label"):
        if getattr(recorded, name) != getattr(recomputed, name):
            mismatches.append(
                Mismatch(
                    field=f"report.{name}",
                    recorded=json.dumps(getattr(recorded, name)),
                    recomputed=json.dumps(getattr(recomputed, name)),
                )
            )


def _has_prime(variant: str, params: dict, d: int, index: int, used: "set[int]") -> bool:
    try:
        select_prime(variant, params, d, index, used)
    except PrimeNotFoundError:
        return False
    return True


def verify_certificate(source: Union[Certificate, dict, str, bytes]) -> VerificationReport:
    """Re-derive every step flag, window and report entry; pass iff nothing differs.

    Raises:
        MalformedCertificateError: the input is not a schema-v1 certificate.
    """
    cert = load_certificate(source)
    variant, params = cert.variant, cert.params
    ordering = OrderingMode(cert.tower.ordering_mode)
    policy = _degree_policy(variant, ordering)
    d_seed = int(params.get("d_seed", "0"))
    skipped_degrees = {int(s.d) for s in cert.skipped}
    mismatches: list = []
    steps: list = []
    used: set = set()

    def mismatch(step_no: Optional[int], name: str, recorded: Any, recomputed: Any) -> None:
        mismatches.append(Mismatch(step=step_no, field=name, recorded=str(recorded), recomputed=str(recomputed)))

    if cert.toolchain.ordering_mode != cert.tower.ordering_mode:
        mismatch(None, "toolchain.ordering_mode", cert.toolchain.ordering_mode, cert.tower.ordering_mode)
    if str(len(cert.tower.steps)) != params.get("k"):
        mismatch(None, "params.k", params.get("k"), len(cert.tower.steps))

    for index, (record, recorded_checks) in enumerate(zip(cert.tower.steps, cert.per_step), start=1):
        p, d = int(record.p), int(record.d)
        interval = None
        if record.interval is not None and len(record.interval) == 2:
            interval = (as_fraction(record.interval[0]), as_fraction(record.interval[1]))
        step = RadicalStep(p, d, interval)

        previous = steps[-1] if steps else None
        expected_d = None
        for candidate in degree_candidates(policy, d_seed, previous, used):
            if candidate not in skipped_degrees:
                expected_d = candidate
                break
            if _has_prime(variant, params, candidate, index, used):
                mismatch(index, f"skipped d={candidate}", "exhausted", "admissible prime exists")
        if d != expected_d:
            mismatch(index, "d", d, expected_d)

        notes: list = []
        try:
            selection = select_prime(variant, params, d, index, used)
            notes = selection.notes
            if selection.p != p:
                mismatch(index, "p", p, selection.p)
            expected_interval = (
                None if selection.interval is None else [fraction_str(v) for v in selection.interval]
            )
            if record.interval != expected_interval:
                mismatch(index, "interval", record.interval, expected_interval)
            if (record.window is None) != (selection.window is None):
                mismatch(index, "window", record.window, selection.window)
            elif record.window is not None and record.window.widened != selection.window.widened:
                mismatch(index, "window.widened", record.window.widened, selection.window.widened)
        except PrimeNotFoundError as e:
            mismatch(index, "p", p, f"no admissible prime ({e})")

        if variant == HOUSE_CONVERGING:
            j = diagonal_target(index)
            target = fraction_str(converging_target(as_fraction(params["t"]), j))
            if record.target_index != j or record.target != target:
                mismatch(index, "target", f"{record.target_index}:{record.target}", f"{j}:{target}")

        member = _membership(variant, params, step, record)
        recomputed = step_checks(variant, step, steps, member, notes)
        for name in ("primality", "interval_member", "congruence", "monogenic", "prime_fresh", "eisenstein"):
            got, want = getattr(recorded_checks, name), getattr(recomputed, name)
            if got != want:
                mismatch(index, name, _flag(got), _flag(want))
        for name in _MANDATORY[variant]:
            if getattr(recomputed, name) is False:
                mismatch(index, f"{name} (required)", _flag(getattr(recorded_checks, name)), "false")

        steps.append(step)
        used |= {p, d}

    tower = RadicalTower(tuple(steps), ordering)
    if any(s.p < 2 or s.d < 2 for s in steps) or not tower.degree_multiplicative():
        mismatch(None, "tower", "valid", "degrees are not distinct primes over prime radicands")
    else:
        _verify_report(cert, tower, mismatches)

    for m in mismatches:
        logger.info("Certificate mismatch", step=m.step, field=m.field, recorded=m.recorded, recomputed=m.recomputed)
    return VerificationReport(passed=not mismatches, steps_checked=len(steps), mismatches=mismatches)
