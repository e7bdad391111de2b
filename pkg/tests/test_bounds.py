"""Tests for the lower bounds and the bounds report."""

import math
from fractions import Fraction

import pytest

from northcott_towers.bounds import (
    enclosure,
    gamma_northcott_growth,
    generator_weighted_height,
    house_lower_bound,
    l2_lower_bound,
    large_ring_bound,
    new_element_house_bound,
    northcott_report,
    scaled_l2_lower_bound,
    weil_gap_bound,
    window_membership,
    windowed_l2_lower_bound,
)
from northcott_towers.exactcore import PolyZ
from northcott_towers.exceptions import (
    DegreeTooLargeError,
    EmptyTowerError,
    NotInTopGeneratorError,
    PreconditionError,
)
from northcott_towers.heights import RadicalTower, house, parse_element
from northcott_towers.numerics import PointTuple, RealInterval, complex_roots

TOL = Fraction(1, 10**6)
FOURTH_ROOTS = PointTuple.from_complex([1, 1j, -1, -1j])


def _mid(interval: RealInterval) -> float:
    return float(interval.mid)


class TestL2Bounds:
    """Tests for the polynomial-value lower bounds."""

    def test_equidistributed(self):
        """Test that unit roots keep the full l2 norm of B."""
        bound = l2_lower_bound(FOURTH_ROOTS, [1, 1], TOL)
        assert _mid(bound) == pytest.approx(math.sqrt(2), abs=1e-5)
        assert bound.hi <= 2  # max |1 + xi| over the fourth roots

    def test_constant(self):
        """Test that a constant needs no discrepancy factor."""
        assert l2_lower_bound(FOURTH_ROOTS, [3], TOL) == RealInterval.point(3)

    def test_degree_too_large(self):
        """Test that deg B must be below the number of points."""
        with pytest.raises(DegreeTooLargeError):
            l2_lower_bound(PointTuple.from_complex([1, -1]), [1, 2, 3], TOL)

    def test_trailing_zeros_ignored(self):
        """Test that zero top coefficients do not raise the degree."""
        bound = l2_lower_bound(PointTuple.from_complex([1, -1]), [1, 1, 0, 0], TOL)
        assert _mid(bound) == pytest.approx(math.sqrt(2), abs=1e-5)

    def test_scaled(self):
        """Test the scaled bound on roots of modulus two."""
        points = PointTuple.from_complex([2, 2j, -2, -2j])
        bound = scaled_l2_lower_bound(points, [1, 1], TOL)
        assert _mid(bound) == pytest.approx(math.sqrt(5), abs=1e-5)

    def test_windowed(self):
        """Test the windowed bound with the full exponent range."""
        bound = windowed_l2_lower_bound(FOURTH_ROOTS, [1, 1, 1, 1], [0, 1, 2, 3], [0, 1, 2, 3], TOL)
        assert _mid(bound) == pytest.approx(2.0, abs=1e-5)

    def test_windowed_outside_terms(self):
        """Test that coefficients outside J are subtracted."""
        bound = windowed_l2_lower_bound(FOURTH_ROOTS, [1, 1, 1, 1], [0, 1, 2, 3], [0, 1], TOL)
        assert _mid(bound) == pytest.approx(math.sqrt(2) - 2, abs=1e-5)

    @pytest.mark.parametrize(
        "indices,exponents",
        [([0, 1], [0, 2]), ([], [0]), ([0, 9], [0]), ([0, 1], [-1])],
    )
    def test_windowed_preconditions(self, indices, exponents):
        """Test the index and exponent set checks."""
        with pytest.raises(PreconditionError):
            windowed_l2_lower_bound(FOURTH_ROOTS, [1, 1], indices, exponents, TOL)

    def test_windowed_off_circle(self):
        """Test that indexed points must lie on the unit circle."""
        points = PointTuple.from_complex([2, -1])
        with pytest.raises(PreconditionError):
            windowed_l2_lower_bound(points, [1], [0, 1], [0], TOL)


class TestHouseBounds:
    """Tests for the house lower bounds."""

    def test_below_true_house(self, small_tower):
        """Test that the bound for x1 + x2 sits below its house."""
        elt = parse_element("x1 + x2", small_tower)
        bound = house_lower_bound(small_tower, elt, TOL)
        actual = house(small_tower, elt, TOL).value
        assert _mid(bound) == pytest.approx(math.sqrt(7), abs=1e-4)
        assert bound.hi <= actual.lo

    def test_top_generator_required(self, small_tower):
        """Test that an element free of the top generator is refused."""
        with pytest.raises(NotInTopGeneratorError):
            house_lower_bound(small_tower, parse_element("x1 + 1", small_tower), TOL)

    def test_new_element(self, above_tower):
        """Test that new elements of a radical step are bounded by p^(1/d)."""
        bound = new_element_house_bound(above_tower, 2, TOL)
        assert _mid(bound) == pytest.approx(2309 ** (1 / 11), rel=1e-9)

    def test_large_ring(self):
        """Test the large-ring bound on the roots of x^3 - 8."""
        bound = large_ring_bound(complex_roots(PolyZ.pure_radical(3, 8)), TOL)
        assert _mid(bound) == pytest.approx(2.0, abs=1e-4)


class TestWeilBounds:
    """Tests for the Weil-height gap and growth terms."""

    @pytest.mark.parametrize(
        "gamma,p,d,expected",
        [(0, 5, 3, -0.006413), (0, 7, 2, 0.139904), (1, 53, 3, 1.161187)],
    )
    def test_gap(self, gamma, p, d, expected):
        """Test d^gamma (log p / 2d - log d / 2(d - 1))."""
        assert _mid(weil_gap_bound(gamma, p, d)) == pytest.approx(expected, abs=1e-6)

    def test_gap_needs_primes(self):
        """Test that composite inputs are refused."""
        with pytest.raises(PreconditionError):
            weil_gap_bound(0, 6, 3)

    def test_growth(self):
        """Test d^(gamma - 1) (log p - log d)."""
        assert _mid(gamma_northcott_growth(1, 53, 3)) == pytest.approx(math.log(53 / 3), rel=1e-12)

    def test_generator_weighted_height(self):
        """Test h_gamma of p^(1/d)."""
        assert _mid(generator_weighted_height(1, 7, 2)) == pytest.approx(math.log(7), rel=1e-12)
        assert _mid(generator_weighted_height(0, 7, 2)) == pytest.approx(math.log(7) / 2, rel=1e-12)


class TestReport:
    """Tests for the per-tower report."""

    def test_window_membership(self):
        """Test both windows around t = 2."""
        bits = 96
        inside_above = RealInterval.point(Fraction(201, 100))
        assert window_membership(inside_above, Fraction(2), 7, "above", bits)
        assert not window_membership(inside_above, Fraction(2), 7, "below", bits)
        assert window_membership(RealInterval.point(Fraction(199, 100)), Fraction(2), 7, "below", bits)
        with pytest.raises(PreconditionError):
            window_membership(inside_above, Fraction(2), 7, "sideways", bits)

    def test_above_tower(self, above_tower):
        """Test the report on the first three house-above steps for t = 2."""
        report = northcott_report(above_tower, TOL, Fraction(2), "above")
        assert report.label == "finite-prefix evidence"
        assert report.window_flags == [True, True, True]
        assert report.informative == [True, True, True]
        assert report.claimed_limit == "2"
        assert float(report.prefix_min_house.lo) == pytest.approx(8293 ** (1 / 13), rel=1e-9)
        assert [e.lo for e in report.eta_values] == [e.lo for e in report.house_values]

    def test_no_claim(self, above_tower):
        """Test that window data is omitted without a claimed limit."""
        report = northcott_report(above_tower, TOL)
        assert report.window_flags is None
        assert report.window is None

    def test_empty(self):
        """Test that an empty tower has no report."""
        with pytest.raises(EmptyTowerError):
            northcott_report(RadicalTower(()))

    def test_enclosure_strings(self):
        """Test the decimal enclosure of a point."""
        assert enclosure(RealInterval.point(Fraction(1, 4))).model_dump() == {"lo": "0.25", "hi": "0.25"}
