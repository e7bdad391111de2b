"""Command-line entry point: one subcommand per operation, JSON (or CSV) on stdout."""

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import structlog
from pydantic import BaseModel, ValidationError

from northcott_towers import __version__
from northcott_towers.bounds import enclosure, new_element_house_bound, northcott_report
from northcott_towers.config import OrderingMode, overridden, settings
from northcott_towers.construct import (
    HOUSE_VARIANTS,
    VARIANT_ALIASES,
    WEIGHTED,
    WEIL,
    construct_house_tower,
    construct_weighted_tower,
    construct_weil_tower,
    resolve_variant,
    verify_certificate,
)
from northcott_towers.discrepancy import discrepancy, eta_polynomial, eta_radical_step
from northcott_towers.exactcore import (
    PolyZ,
    as_fraction,
    dedekind_index_coprime,
    dedekind_radical_split,
    find_prime_in_ap,
)
from northcott_towers.exceptions import (
    IndeterminateError,
    NonConvergenceError,
    NorthcottError,
    PrecisionFailureError,
    PreconditionError,
    PrimeNotFoundError,
    SearchExhaustedError,
)
from northcott_towers.heights import (
    RadicalTower,
    element_degree_over_Q,
    house,
    parse_element,
    weighted_height,
    weil_height_integral,
)
from northcott_towers.logging_config import get_logger, setup_logging
from northcott_towers.models import Certificate
from northcott_towers.numerics import PointTuple, bits_for, complex_roots
from northcott_towers.oracle import EnumerationSpec, empirical_min_house
from northcott_towers.propcheck import SUITES, run_suite

logger = get_logger(__name__)

setup_logging(settings.LOG_LEVEL)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_SEARCH_EXHAUSTED = 3
EXIT_PRECISION = 4

Payload = Union[Dict[str, Any], List[Any]]
Rows = List[List[Any]]


@dataclass
class CommandResult:
    """Exit code plus the payload for stdout (and optional CSV rows)."""

    exit_code: int
    payload: Payload
    rows: Optional[Rows] = None


class UsageError(PreconditionError):
    """Arguments are individually valid but do not make sense together."""

    pass


# --- argument helpers -----------------------------------------------------------


def parse_tower(text: str, ordering: Optional[str] = None) -> RadicalTower:
    """Parse "p:d,p:d,..." into a tower."""
    pairs = []
    for chunk in text.split(","):
        try:
            p, d = chunk.strip().split(":")
            pairs.append((int(p), int(d)))
        except ValueError as e:
            raise UsageError(f"Tower steps must look like p:d, got {chunk!r}") from e
    return RadicalTower.from_pairs(pairs, ordering or settings.NORTHCOTT_ORDERING)


def parse_mask(text: str) -> frozenset:
    """Parse "0,1;1,0" into exponent tuples."""
    try:
        return frozenset(tuple(int(e) for e in slot.split(",")) for slot in text.split(";") if slot.strip())
    except ValueError as e:
        raise UsageError(f"Mask slots must be comma-separated exponents, got {text!r}") from e


def read_text(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _dump(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(mode="json", by_alias=True)


# --- subcommands ------------------------------------------------------------


def cmd_construct(args: argparse.Namespace) -> CommandResult:
    variant = resolve_variant(args.variant)
    tol = args.tol
    if variant in HOUSE_VARIANTS:
        if args.t is None:
            raise UsageError("--t is required for the house variants")
        cert = construct_house_tower(
            variant, args.t, args.k, args.d_seed, args.ordering, args.skip_exhausted or None, tol
        )
    elif variant == WEIL:
        cert = construct_weil_tower(args.k, args.d_seed, args.t, args.exp_base, args.skip_exhausted or None, tol)
    else:
        if args.gamma is None or args.epsilon is None:
            raise UsageError("--gamma and --epsilon are required for the weighted variant")
        cert = construct_weighted_tower(
            args.gamma, args.epsilon, args.k, args.d_seed, args.skip_exhausted or None, tol
        )
    rows = [["step", "p", "d", "primality", "interval_member", "congruence", "monogenic", "prime_fresh", "eisenstein"]]
    for i, (step, checks) in enumerate(zip(cert.tower.steps, cert.per_step), start=1):
        rows.append(
            [
                i,
                step.p,
                step.d,
                checks.primality,
                checks.interval_member,
                checks.congruence,
                checks.monogenic,
                checks.prime_fresh,
                checks.eisenstein,
            ]
        )
    return CommandResult(EXIT_OK, _dump(cert), rows)


def cmd_verify(args: argparse.Namespace) -> CommandResult:
    path = args.certificate or args.certificate_flag
    if path is None:
        raise UsageError("verify needs a certificate path, or - for stdin")
    report = verify_certificate(read_text(path))
    rows = [["step", "field", "recorded", "recomputed"]]
    rows += [[m.step, m.field, m.recorded, m.recomputed] for m in report.mismatches]
    code = EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED
    return CommandResult(code, _dump(report), rows)


def cmd_house(args: argparse.Namespace) -> CommandResult:
    tower = parse_tower(args.tower, args.ordering)
    elt = parse_element(args.element, tower)
    value = house(tower, elt, args.tol).value
    enc = enclosure(value)
    return CommandResult(EXIT_OK, {"element": str(elt), "house": enc.model_dump()}, [["lo", "hi"], [enc.lo, enc.hi]])


def cmd_height(args: argparse.Namespace) -> CommandResult:
    tower = parse_tower(args.tower, args.ordering)
    elt = parse_element(args.element, tower)
    h = weil_height_integral(tower, elt, args.tol)
    payload: Dict[str, Any] = {"element": str(elt), "kind": "weil", "height": enclosure(h.value).model_dump()}
    if args.gamma is not None:
        bits = max(settings.NORTHCOTT_PRECISION_BITS, bits_for(args.tol))
        degree = element_degree_over_Q(tower, elt, args.tol, bits)
        weighted = weighted_height(as_fraction(args.gamma), degree, h.value, bits)
        payload.update(
            {"kind": "weighted", "gamma": args.gamma, "degree": degree, "height": enclosure(weighted).model_dump()}
        )
    enc = payload["height"]
    return CommandResult(EXIT_OK, payload, [["kind", "lo", "hi"], [payload["kind"], enc["lo"], enc["hi"]]])


def cmd_discrepancy(args: argparse.Namespace) -> CommandResult:
    points = PointTuple.from_csv(read_text(args.points))
    result = discrepancy(points, args.tol)
    enc = enclosure(result.value)
    payload = {"value": enc.model_dump(), "argmin_theta": repr(result.argmin_theta), "points": len(points)}
    return CommandResult(EXIT_OK, payload, [["lo", "hi", "argmin_theta"], [enc.lo, enc.hi, result.argmin_theta]])


def cmd_eta(args: argparse.Namespace) -> CommandResult:
    if args.tower is not None:
        if args.step is None:
            raise UsageError("--step is required with --tower")
        value = eta_radical_step(parse_tower(args.tower, args.ordering), args.step, args.tol)
    elif args.poly is not None:
        value = eta_polynomial(complex_roots(PolyZ.parse(args.poly), args.tol), args.tol)
    elif args.points is not None:
        value = eta_polynomial(PointTuple.from_csv(read_text(args.points)), args.tol)
    else:
        raise UsageError("Give one of --tower/--step, --poly or --points")
    enc = enclosure(value)
    payload = {"eta": enc.model_dump(), "informative": value.lo > 0}
    return CommandResult(EXIT_OK, payload, [["lo", "hi"], [enc.lo, enc.hi]])


def cmd_dedekind(args: argparse.Namespace) -> CommandResult:
    f = PolyZ.parse(args.poly)
    coprime = dedekind_index_coprime(f, args.q)
    g, h, F = dedekind_radical_split(f, args.q)
    payload = {"index_coprime": coprime, "g": str(g.lift()), "h": str(h.lift()), "F": str(F.lift())}
    return CommandResult(EXIT_OK, payload, [["index_coprime"], [coprime]])


def cmd_find_prime(args: argparse.Namespace) -> CommandResult:
    p = find_prime_in_ap(args.lo, args.hi, args.a, args.m)
    return CommandResult(EXIT_OK, {"prime": str(p)}, [["prime"], [p]])


def cmd_bounds_report(args: argparse.Namespace) -> CommandResult:
    tower = parse_tower(args.tower, args.ordering)
    limit = None if args.claimed_limit is None else as_fraction(args.claimed_limit)
    report = northcott_report(tower, args.tol, limit, args.window)
    header = ["step", "p", "d", "eta_lo", "eta_hi", "house_lo", "house_hi"]
    if report.window_flags is not None:
        header.append("in_window")
    rows = [header]
    for i, (step, eta, h) in enumerate(zip(tower.steps, report.eta_values, report.house_values), start=1):
        row = [i, step.p, step.d, eta.lo, eta.hi, h.lo, h.hi]
        if report.window_flags is not None:
            row.append(report.window_flags[i - 1])
        rows.append(row)
    return CommandResult(EXIT_OK, _dump(report), rows)


def cmd_enumerate_min_house(args: argparse.Namespace) -> CommandResult:
    tower = parse_tower(args.tower, args.ordering)
    mask = None if args.mask is None else parse_mask(args.mask)
    spec = EnumerationSpec(tower, args.step, args.coeff_bound, not args.no_constants, mask)
    result = empirical_min_house(spec, args.tol)
    bound = enclosure(new_element_house_bound(tower, args.step, args.tol))
    value = enclosure(result.value)
    payload = {
        "min_house": value.model_dump(),
        "witness": str(result.witness),
        "count": result.count,
        "new_element_bound": bound.model_dump(),
    }
    rows = [["min_lo", "min_hi", "witness", "count"], [value.lo, value.hi, str(result.witness), result.count]]
    return CommandResult(EXIT_OK, payload, rows)


def cmd_lemma_check(args: argparse.Namespace) -> CommandResult:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(name, args.seed, args.instances, args.tol, args.threads) for name in names]
    rows = [["suite", "seed", "instances", "violations", "skipped", "worst_margin"]]
    rows += [[r.name, r.seed, r.instances, r.violations, r.skipped, r.worst_margin] for r in results]
    payload: Payload = [dict(_dump(r), passed=r.passed) for r in results]
    if len(results) == 1:
        payload = payload[0]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_VERIFICATION_FAILED
    return CommandResult(code, payload, rows)


COMMANDS: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "house": cmd_house,
    "height": cmd_height,
    "discrepancy": cmd_discrepancy,
    "eta": cmd_eta,
    "dedekind": cmd_dedekind,
    "find-prime": cmd_find_prime,
    "bounds-report": cmd_bounds_report,
    "enumerate-min-house": cmd_enumerate_min_house,
    "lemma-check": cmd_lemma_check,
}


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as a one-line reason on stderr."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except PreconditionError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_fraction, default=None, help="Enclosure width target (default 1e-9).")
    common.add_argument("--precision-ceiling", type=int, default=None, help="Maximum working precision in bits.")
    common.add_argument("--ordering", choices=[m.value for m in OrderingMode], default=None)
    common.add_argument("--seed", type=int, default=None, help="Seed for property suites.")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", default=None, help="Write the payload to FILE instead of stdout.")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for property suites.")

    parser = _Parser(prog="northcott", description="Radical towers with prescribed Northcott numbers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", parents=[common], help="Build a tower and emit its certificate")
    p.add_argument("--variant", required=True, choices=[*VARIANT_ALIASES, *HOUSE_VARIANTS, WEIL, WEIGHTED])
    p.add_argument("--t", default=None, help="Target t (rational).")
    p.add_argument("--exp-base", default=None, help="Rational base b = e^(2t) for the weil variant.")
    p.add_argument("--gamma", default=None)
    p.add_argument("--epsilon", default=None)
    p.add_argument("--steps", "--k", dest="k", type=int, required=True, help="Number of steps.")
    p.add_argument("--d-seed", type=int, required=True, help="First degree.")
    p.add_argument("--skip-exhausted", action="store_true", help="Skip degrees whose window holds no prime.")

    p = sub.add_parser("verify", parents=[common], help="Re-verify a certificate")
    p.add_argument("certificate", nargs="?", default=None, help="Certificate JSON file, or - for stdin.")
    p.add_argument("--certificate", dest="certificate_flag", default=None, help=argparse.SUPPRESS)

    for name, help_text in (("house", "House of a tower element"), ("height", "Weil or weighted height")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--tower", required=True, help='Steps as "p:d,p:d".')
        p.add_argument("--element", required=True, help='Element such as "x1*x2 + 3".')
        if name == "height":
            p.add_argument("--gamma", default=None, help="Report the gamma-weighted height instead.")

    p = sub.add_parser("discrepancy", parents=[common], help="Discrepancy of a point tuple")
    p.add_argument("--points", required=True, help='CSV rows "re,im[,rad]", or - for stdin.')

    p = sub.add_parser("eta", parents=[common], help="eta of a radical step or a polynomial")
    p.add_argument("--tower", default=None)
    p.add_argument("--step", type=int, default=None)
    p.add_argument("--poly", default=None)
    p.add_argument("--points", default=None)

    p = sub.add_parser("dedekind", parents=[common], help="Dedekind's criterion at a prime")
    p.add_argument("--poly", required=True)
    p.add_argument("--q", type=int, required=True)

    p = sub.add_parser("find-prime", parents=[common], help="Least prime in an interval and residue class")
    p.add_argument("--lo", type=_fraction, required=True)
    p.add_argument("--hi", type=_fraction, required=True)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--m", type=int, default=1)

    p = sub.add_parser("bounds-report", parents=[common], help="Per-step eta and house report")
    p.add_argument("--tower", required=True)
    p.add_argument("--claimed-limit", default=None)
    p.add_argument("--window", choices=["above", "below"], default=None)

    p = sub.add_parser("enumerate-min-house", parents=[common], help="Brute-force minimum house")
    p.add_argument("--tower", required=True)
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--coeff-bound", type=int, required=True)
    p.add_argument("--no-constants", action="store_true", help="Pin slots without x_i to zero.")
    p.add_argument("--mask", default=None, help='Allowed exponent slots, e.g. "0;1;2" or "0,1;1,1".')

    p = sub.add_parser("lemma-check", parents=[common], help="Run a seeded property suite")
    p.add_argument("--suite", required=True, choices=[*sorted(SUITES), "all"])
    p.add_argument("--instances", type=int, default=None)
    return parser


# --- output -------------------------------------------------------------------


def render(result: CommandResult, fmt: str) -> str:
    if fmt == "csv" and result.rows is not None:
        buffer = io.StringIO()
        csv.writer(buffer, lineterminator="\n").writerows(result.rows)
        return buffer.getvalue()
    return json.dumps(result.payload, indent=2) + "\n"


def _exit_code(error: Exception) -> int:
    if isinstance(error, (SearchExhaustedError, PrimeNotFoundError)):
        return EXIT_SEARCH_EXHAUSTED
    if isinstance(error, (PrecisionFailureError, NonConvergenceError, IndeterminateError)):
        return EXIT_PRECISION
    return EXIT_USAGE


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    overrides: Dict[str, Any] = {}
    if args.precision_ceiling is not None:
        overrides["NORTHCOTT_PRECISION_CEILING"] = args.precision_ceiling
    if args.ordering is not None:
        overrides["NORTHCOTT_ORDERING"] = args.ordering
    if args.threads is not None:
        overrides["NORTHCOTT_THREADS"] = args.threads
    if args.seed is not None:
        overrides["NORTHCOTT_SEED"] = args.seed
    if args.tol is not None:
        overrides["NORTHCOTT_TOL"] = float(args.tol)

    try:
        with structlog.contextvars.bound_contextvars(command=args.command), overridden(**overrides):
            if args.tol is None:
                args.tol = settings.tolerance
            logger.debug("Running command", overrides=overrides)
            result = COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"northcott: invalid setting: {e.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except (NorthcottError, ValueError, OSError) as e:
        code = _exit_code(e)
        logger.info("Command failed", command=args.command, error=str(e), exit_code=code)
        print(f"northcott {args.command}: {e}", file=sys.stderr)
        return code

    text = render(result, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return result.exit_code


def main_cli() -> None:
    """Console-script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main_cli()
