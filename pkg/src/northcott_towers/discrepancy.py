"""Finite discrepancy of point tuples against rotated roots of unity, and eta invariants.

The infimum over rotations is found by branch and bound on the rotation
angle. Candidate cells are evaluated with numpy in double precision; every
distance carries an explicit rounding slack and the boxes' radii, so the
returned interval encloses the true infimum.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from mpmath import MPContext

from .config import settings
from .exceptions import PrecisionFailureError, PreconditionError, ZeroTupleError
from .heights import RadicalTower
from .logging_config import get_logger
from .numerics import (
    ComplexBox,
    IntervalContext,
    PointTuple,
    RealInterval,
    bits_for,
    radical_root,
)

logger = get_logger(__name__)

Number = Union[int, Fraction]

_UNIT_ROUNDOFF = 2.0**-53
_INITIAL_CELLS = 64
_MAX_LIVE_CELLS = 2_000_000
_MIN_CELL_WIDTH = 1e-13
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class DiscrepancyResult:
    value: RealInterval
    argmin_u: ComplexBox
    grid_step: float
    argmin_theta: float


def _working_bits(tol: Optional[Fraction] = None) -> int:
    bits = settings.NORTHCOTT_PRECISION_BITS
    return bits if tol is None else max(bits, bits_for(tol))


def d_u(points: PointTuple, u: ComplexBox, bits: Optional[int] = None) -> RealInterval:
    """max over j of min over i of |xi_i - u * zeta_d^j|, d = len(points)."""
    bits = bits or _working_bits()
    if not u.abs(bits).contains(1):
        raise PreconditionError(f"Rotation {u.center} is not on the unit circle")
    ctx = IntervalContext(bits)
    d = len(points)
    per_target = []
    for j in range(d):
        target = (u * ctx.cis(Fraction(j, d))).rounded(bits)
        per_target.append(RealInterval.minimum((xi - target).abs(bits) for xi in points))
    return RealInterval.maximum(per_target)


def _float_view(points: PointTuple) -> "tuple[np.ndarray, np.ndarray, float]":
    centers = np.array(points.centers(), dtype=np.complex128)
    radii = np.array([float(z.rad) for z in points], dtype=np.float64)
    # float(Fraction) rounds to nearest; one ulp per coordinate
    radii = radii + 2 * _UNIT_ROUNDOFF * (np.abs(centers) + 1.0)
    return centers, radii, float(np.max(np.abs(centers) + radii))


def _lipschitz(centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Per-point bound on |d/dtheta| of |xi - e^{i theta}| over the point's box.

    The derivative is rho sin(phi) / |xi - e^{i theta}| with rho = |xi|, whose
    maximum over theta is min(rho, 1); points near the origin are almost flat.
    """
    rho = np.abs(centers) * (1 + 1e-12) + radii
    return np.minimum(rho, 1.0)


def _profile(thetas: np.ndarray, half_width: float, centers: np.ndarray, radii: np.ndarray, lip: np.ndarray, d: int):
    """Cell lower bounds and midpoint upper bounds of max_j min_i |xi_i - e^{i(theta + 2 pi j/d)}|.

    The lower bound holds on the whole cell [theta - half_width, theta + half_width].
    """
    offsets = 2 * np.pi * np.arange(d) / d
    chunk = max(1, _CHUNK_ENTRIES // (d * len(centers)))
    shrink = radii + lip * half_width
    lowers, uppers = [], []
    for start in range(0, len(thetas), chunk):
        block = thetas[start : start + chunk]
        targets = np.exp(1j * (block[:, None] + offsets[None, :]))
        dist = np.abs(centers[None, None, :] - targets[:, :, None])
        lowers.append(np.max(np.min(np.maximum(dist - shrink, 0.0), axis=2), axis=1))
        uppers.append(np.max(np.min(dist + radii, axis=2), axis=1))
    return np.concatenate(lowers), np.concatenate(uppers)


def discrepancy(points: PointTuple, tol: Number = Fraction(1, 10**9)) -> DiscrepancyResult:
    """Enclosure of inf over |u| = 1 of D_u(points), of width at most tol.

    A cell stops being refined once its own lower bound is within tol of the
    best upper bound found, so flat stretches of the profile settle at once.
    Boxes whose radii are not small against tol cannot be enclosed that
    tightly; the width target then grows by twice the largest radius.

    Raises:
        PrecisionFailureError: tol is below what double-precision search can certify.
    """
    tol_f = float(Fraction(tol))
    if tol_f <= 0:
        raise PreconditionError("tol must be positive")
    d = len(points)
    centers, radii, magnitude = _float_view(points)
    slack = 64 * _UNIT_ROUNDOFF * (1.0 + magnitude)
    lip = _lipschitz(centers, radii)
    floor = 2 * float(np.max(radii)) + 4 * slack
    target = tol_f if floor <= tol_f / 2 else tol_f + floor
    if target > tol_f:
        logger.warning("Input boxes too wide for tol, widening target", tol=tol_f, target=target)

    period = 2 * math.pi / d
    width = period / _INITIAL_CELLS
    mids = (np.arange(_INITIAL_CELLS) + 0.5) * width
    best_upper = math.inf
    best_theta = 0.0
    settled_lower = math.inf
    rounds = 0
    while True:
        rounds += 1
        lower, upper = _profile(mids, width / 2, centers, radii, lip, d)
        k = int(np.argmin(upper))
        if upper[k] + slack < best_upper:
            best_upper = float(upper[k] + slack)
            best_theta = float(mids[k])
        cell_lower = lower - slack
        kept = cell_lower <= best_upper
        settled = kept & (cell_lower >= best_upper - target)
        if settled.any():
            settled_lower = min(settled_lower, float(np.min(cell_lower[settled])))
        live_mask = kept & ~settled
        live = mids[live_mask]
        if live.size == 0:
            global_lower = settled_lower
            break
        global_lower = min(settled_lower, float(np.min(cell_lower[live_mask])))
        if best_upper - global_lower <= target:
            break
        if width / 2 < _MIN_CELL_WIDTH or 2 * live.size > _MAX_LIVE_CELLS:
            raise PrecisionFailureError(
                f"Discrepancy search cannot reach tol={tol_f:.1e} (gap {best_upper - global_lower:.2e})"
            )
        width /= 2
        mids = np.concatenate([live - width / 2, live + width / 2])

    global_lower = max(min(global_lower, best_upper), 0.0)
    lo = Fraction(math.nextafter(global_lower, -math.inf)) if global_lower > 0 else Fraction(0)
    hi = Fraction(math.nextafter(best_upper, math.inf))
    logger.debug("Discrepancy enclosed", points=d, rounds=rounds, cell_width=width, lo=float(lo), hi=float(hi))
    witness = ComplexBox.from_complex(complex(math.cos(best_theta), math.sin(best_theta)), rad=4 * _UNIT_ROUNDOFF)
    return DiscrepancyResult(RealInterval(lo, max(lo, hi)), witness, width, best_theta)


def normalized_tuple(points: PointTuple, bits: Optional[int] = None) -> PointTuple:
    """Every point divided by the largest modulus."""
    bits = bits or _working_bits()
    norm = points.norm(bits)
    if norm.lo <= 0:
        raise ZeroTupleError("Cannot normalize a tuple whose largest modulus may be zero")
    inverse = RealInterval.point(1) / norm
    return PointTuple(tuple(z.scale(inverse).rounded(bits) for z in points))


def _int_power(x: RealInterval, n: int, bits: int) -> RealInterval:
    value = RealInterval.point(1)
    for _ in range(n):
        value = (value * x).rounded(bits)
    return value


def discrepancy_factor(d: int, disc: RealInterval, bits: int) -> RealInterval:
    """1 - d^(3/2) * D."""
    d_three_halves = RealInterval.point(d) * RealInterval.point(d).sqrt(bits)
    return RealInterval.point(1) - d_three_halves * disc


def eta_polynomial(points: PointTuple, tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """min(|a|, |a|^(d-1)) * (1 - d^(3/2) D(a/|a|)) for the root tuple a of a monic polynomial.

    Returned even when negative; a non-positive value carries no information.
    """
    tol = Fraction(tol)
    bits = _working_bits(tol)
    d = len(points)
    norm = points.norm(bits)
    if norm.lo <= 0:
        raise ZeroTupleError("eta of an all-zero tuple")
    disc = discrepancy(normalized_tuple(points, bits), tol).value
    size = RealInterval.minimum([norm, _int_power(norm, d - 1, bits)])
    return (size * discrepancy_factor(d, disc, bits)).rounded(bits)


def eta_radical_step(tower: RadicalTower, i: int, tol: Number = Fraction(1, 10**9)) -> RealInterval:
    """eta of step i over the field below it.

    Every conjugate of x^d - p has equidistributed roots of modulus p^(1/d),
    so the discrepancy term vanishes and the value is p^(1/d).
    """
    step = tower.step(i)
    if not tower.prefix(i).degree_multiplicative():
        raise PreconditionError(f"Tower is not valid through step {i}")
    bits = _working_bits(Fraction(tol))
    size = radical_root(step.p, step.d, bits)
    return RealInterval.minimum([size, radical_root(step.p ** (step.d - 1), step.d, bits)])


def lift_tuple(alpha: PointTuple, n: int, bits: Optional[int] = None) -> PointTuple:
    """All n-th roots of every point: {alpha_k^(1/n) * zeta_n^l}."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    bits = bits or _working_bits()
    mp = MPContext()
    mp.prec = bits + 16
    lifted = []
    for z in alpha:
        root = mp.root(mp.mpc(z.center.real, z.center.imag), n)
        spread = float(z.rad) ** (1.0 / n) if z.rad else 0.0
        for ell in range(n):
            w = complex(root * mp.expjpi(mp.mpf(2 * ell) / n))
            lifted.append(ComplexBox.from_complex(w, rad=spread + 4 * _UNIT_ROUNDOFF * (1 + abs(w))))
    return PointTuple(tuple(lifted))


def product_tuple(alpha: PointTuple, beta: PointTuple, bits: Optional[int] = None) -> PointTuple:
    """{alpha_k * beta_l} over all pairs."""
    bits = bits or _working_bits()
    return PointTuple(tuple((a * b).rounded(bits) for a in alpha for b in beta))
