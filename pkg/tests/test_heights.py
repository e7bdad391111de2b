"""Tests for radical towers, element parsing and heights."""

import math
from fractions import Fraction

import pytest

from northcott_towers.exceptions import (
    ElementSyntaxError,
    ExponentOutOfRangeError,
    InvalidStepError,
    PreconditionError,
    UnknownVariableError,
    ZeroElementError,
)
from northcott_towers.heights import (
    HeightKind,
    RadicalStep,
    RadicalTower,
    element_degree_over_Q,
    embeddings,
    house,
    parse_element,
    weighted_height,
    weil_height_integral,
)
from northcott_towers.numerics import RealInterval

CBRT5 = 5 ** (1 / 3)
SQRT7 = math.sqrt(7)


def _approx(interval: RealInterval, value: float, rel: float = 1e-9) -> bool:
    return float(interval.mid) == pytest.approx(value, rel=rel)


class TestRadicalTower:
    """Tests for tower structure and ordering."""

    def test_accessors(self, small_tower):
        """Test degrees, radicands and the degree of the top field."""
        assert small_tower.degrees == (3, 2)
        assert small_tower.radicands == (5, 7)
        assert small_tower.degree == 6
        assert small_tower.degree_multiplicative()
        assert len(small_tower.prefix(1)) == 1

    def test_step_bounds(self, small_tower):
        """Test that step indices are 1-based and checked."""
        assert small_tower.step(2).p == 7
        with pytest.raises(InvalidStepError):
            small_tower.step(3)
        with pytest.raises(InvalidStepError):
            small_tower.prefix(-1)

    def test_weak_ordering(self, above_tower):
        """Test that weak ordering only forbids reusing a prime."""
        assert above_tower.is_valid
        clash = RadicalTower.from_pairs([(3, 3)])
        assert clash.validate() == ["step 1: p=3 already used at step 1 (d)"]

    def test_strict_ordering(self):
        """Test that strict ordering needs each step to clear the previous one."""
        tower = RadicalTower.from_pairs([(251, 7), (2309, 11)], "strict")
        assert any(note.startswith("step 2:") for note in tower.validate())
        assert RadicalTower.from_pairs([(2, 3), (11, 7)], "strict").is_valid

    def test_non_prime_flagged(self):
        """Test that composite radicands are reported."""
        notes = RadicalTower.from_pairs([(4, 3)]).validate()
        assert "step 1: p=4 is not prime" in notes

    def test_record_round_trip(self, above_tower):
        """Test conversion to and from the wire record."""
        again = RadicalTower.from_record(above_tower.to_record())
        assert again == above_tower

    def test_multiply_reduces(self, small_tower):
        """Test that x_i^d_i reduces to p_i."""
        x1, x2 = small_tower.generator(1), small_tower.generator(2)
        assert small_tower.multiply(x2, x2) == small_tower.constant(7)
        cube = small_tower.multiply(small_tower.multiply(x1, x1), x1)
        assert cube == small_tower.constant(5)


class TestRadicalStep:
    """Tests for per-step conditions."""

    def test_construction_step(self):
        """Test the flags of the first step of the house-above tower."""
        step = RadicalStep(251, 7, (Fraction(128), Fraction(256)))
        assert step.congruence
        assert step.monogenic
        assert step.eisenstein
        assert step.in_interval

    def test_step_without_interval(self):
        """Test that a bare step has no interval verdict and may fail the congruence."""
        step = RadicalStep(5, 3)
        assert step.in_interval is None
        assert not step.congruence
        assert step.polynomial.coeffs == (-5, 0, 0, 1)


class TestElements:
    """Tests for element parsing and manipulation."""

    def test_parse(self, small_tower):
        """Test parsing an element with a constant term."""
        elt = parse_element("x1*x2 + 3", small_tower)
        assert elt.as_dict() == {(1, 1): 1, (0, 0): 3}
        assert str(elt) == "3+x1*x2"
        assert elt.involves(2)
        parts = elt.split_top()
        assert parts[0] == small_tower.prefix(1).constant(3)
        assert parts[1] == small_tower.prefix(1).generator(1)

    def test_generator_index(self, small_tower):
        """Test recognition of a bare generator."""
        assert parse_element("x2", small_tower).generator_index() == 2
        assert parse_element("2*x2", small_tower).generator_index() is None

    @pytest.mark.parametrize(
        "src,error",
        [
            ("x3", UnknownVariableError),
            ("x1^3", ExponentOutOfRangeError),
            ("x1 +", ElementSyntaxError),
            ("x1/2", ElementSyntaxError),
        ],
    )
    def test_parse_errors(self, small_tower, src, error):
        """Test the error raised for each kind of bad input."""
        with pytest.raises(error):
            parse_element(src, small_tower)

    def test_negation_and_sum(self, small_tower):
        """Test that an element plus its negative is zero."""
        elt = parse_element("x1 - 4*x2", small_tower)
        assert (elt + (-elt)).is_zero()


class TestHouse:
    """Tests for the house."""

    def test_generator(self, small_tower, tol):
        """Test that the house of x_i is p_i^(1/d_i)."""
        value = house(small_tower, small_tower.generator(1), tol)
        assert value.kind is HeightKind.HOUSE
        assert _approx(value.value, CBRT5)

    def test_sum(self, small_tower, tol):
        """Test the house of x1 + x2: both moduli line up in one embedding."""
        value = house(small_tower, parse_element("x1 + x2", small_tower), tol).value
        assert value.width <= tol
        assert _approx(value, CBRT5 + SQRT7)

    def test_constant(self, small_tower):
        """Test that constants are exact."""
        assert house(small_tower, small_tower.constant(-3)).value == RealInterval.point(3)

    def test_zero(self, small_tower):
        """Test that the zero element has no house."""
        with pytest.raises(ZeroElementError):
            house(small_tower, small_tower.constant(0))

    def test_not_multiplicative(self):
        """Test that a composite radicand is refused."""
        tower = RadicalTower.from_pairs([(4, 3)])
        with pytest.raises(PreconditionError):
            house(tower, parse_element("x1 + 1", tower))

    def test_embedding_count(self, small_tower, tol):
        """Test that there is one box per embedding."""
        points = embeddings(small_tower, parse_element("x1 + x2", small_tower), tol)
        assert len(points) == 6
        assert points.max_rad() <= tol


class TestWeilHeight:
    """Tests for Weil and weighted heights."""

    def test_generator(self, small_tower, tol):
        """Test h(x2) = log(7) / 2."""
        value = weil_height_integral(small_tower, small_tower.generator(2), tol)
        assert value.kind is HeightKind.WEIL
        assert _approx(value.value, math.log(7) / 2)

    def test_product_of_generators(self, small_tower, tol):
        """Test that every conjugate of x1*x2 has the same modulus."""
        value = weil_height_integral(small_tower, parse_element("x1*x2", small_tower), tol).value
        assert _approx(value, math.log(5) / 3 + math.log(7) / 2)

    def test_unit_constant(self, small_tower):
        """Test that +-1 has height zero."""
        assert weil_height_integral(small_tower, small_tower.constant(-1)).value == RealInterval.point(0)

    def test_weighted(self):
        """Test the degree weighting."""
        h = RealInterval(Fraction(1), Fraction(2))
        assert weighted_height(1, 2, h) == RealInterval(Fraction(2), Fraction(4))
        assert weighted_height(0, 5, h) == h
        sqrt_weighted = weighted_height(Fraction(1, 2), 4, RealInterval.point(1))
        assert _approx(sqrt_weighted, 2.0)
        with pytest.raises(PreconditionError):
            weighted_height(1, 0, h)


class TestElementDegree:
    """Tests for the degree of an element over Q."""

    @pytest.mark.parametrize("src,degree", [("7", 1), ("x2", 2), ("x1^2", 3), ("x1*x2", 6), ("x1 + x2", 6)])
    def test_degrees(self, small_tower, tol, src, degree):
        """Test degrees read off from clusters of embeddings."""
        assert element_degree_over_Q(small_tower, parse_element(src, small_tower), tol) == degree
