"""Tests for exact integer and polynomial arithmetic."""

import itertools
from fractions import Fraction

import pytest
from sympy import primerange

from northcott_towers.exactcore import (
    PolyZ,
    WindowEdge,
    as_fraction,
    compare_to_edge,
    dedekind_index_coprime,
    dedekind_radical_split,
    eisenstein_applicable,
    factor_fq_naive,
    fermat_quotient_divides,
    fermat_quotient_residue,
    find_prime_in_ap,
    find_prime_in_window,
    fraction_str,
    in_window,
    is_prime,
    next_prime,
    primes_from,
    pure_radical_discriminant,
)
from northcott_towers.exceptions import PrecisionFailureError, PreconditionError, PrimeNotFoundError


class TestRationals:
    """Tests for exact rational parsing."""

    @pytest.mark.parametrize(
        "text,expected",
        [("86.49", Fraction(8649, 100)), ("3/2", Fraction(3, 2)), (" 7 ", Fraction(7)), (5, Fraction(5))],
    )
    def test_as_fraction(self, text, expected):
        """Test that decimals and num/den strings parse exactly."""
        assert as_fraction(text) == expected

    @pytest.mark.parametrize("text", ["abc", "1/0", ""])
    def test_as_fraction_rejects(self, text):
        """Test that garbage is a precondition error."""
        with pytest.raises(PreconditionError):
            as_fraction(text)

    def test_fraction_str(self):
        """Test the canonical serialization."""
        assert fraction_str(Fraction(3, 2)) == "3/2"
        assert fraction_str(Fraction(-4, 2)) == "-2"


class TestPrimes:
    """Tests for primality and prime search."""

    @pytest.mark.parametrize("n", [2, 3, 97, 131, 8293, 2**61 - 1, 2**89 - 1])
    def test_primes(self, n):
        """Test known primes, including one past the deterministic range."""
        assert is_prime(n)

    @pytest.mark.parametrize("n", [0, 1, 4, 561, 1105, 3215031751, 2**67 - 1])
    def test_composites(self, n):
        """Test composites, Carmichael numbers and a strong pseudoprime to small bases."""
        assert not is_prime(n)

    def test_negative_rejected(self):
        """Test that negative input is a precondition error."""
        with pytest.raises(PreconditionError):
            is_prime(-7)

    def test_next_prime_is_strict(self):
        """Test that next_prime never returns its argument."""
        assert next_prime(7) == 11
        assert next_prime(1) == 2
        assert list(itertools.islice(primes_from(11), 3)) == [11, 13, 17]

    def test_find_prime_in_ap(self):
        """Test the least prime in (86.49, 173) congruent to 10 mod 121."""
        assert find_prime_in_ap("86.49", 173, 10, 121) == 131

    def test_find_prime_in_ap_is_open(self):
        """Test that the interval endpoints themselves are excluded."""
        assert find_prime_in_ap(11, 20, 0, 1) == 13
        assert find_prime_in_ap(10, 20, 0, 1, exclude={11}) == 13

    def test_find_prime_in_ap_exhausted(self):
        """Test that an empty window raises PrimeNotFoundError."""
        with pytest.raises(PrimeNotFoundError):
            find_prime_in_ap(24, 28, 0, 1)

    @pytest.mark.parametrize("a,m", [(2, 4), (5, 3), (0, 0)])
    def test_bad_progression(self, a, m):
        """Test that degenerate residue classes are rejected."""
        with pytest.raises(PreconditionError):
            find_prime_in_ap(1, 100, a, m)


class TestWindows:
    """Tests for windows with exact or bracketed edges."""

    def test_edge_must_be_one_kind(self):
        """Test that an edge is either exact or bracketed."""
        with pytest.raises(PreconditionError):
            WindowEdge()
        with pytest.raises(PreconditionError):
            WindowEdge(exact=Fraction(1), bracket=lambda bits: (Fraction(0), Fraction(2)))

    def test_closed_edges(self):
        """Test that closedness decides membership of the edge itself."""
        assert in_window(11, WindowEdge(exact=Fraction(11), closed=True), WindowEdge(exact=Fraction(13)))
        assert not in_window(11, WindowEdge(exact=Fraction(11)), WindowEdge(exact=Fraction(13)))
        assert in_window(13, WindowEdge(exact=Fraction(11)), WindowEdge(exact=Fraction(13), closed=True))
        assert in_window(10**6, WindowEdge(exact=Fraction(11)), None)

    def test_window_prime_exact(self):
        """Test the window scan with rational edges."""
        lower, upper = WindowEdge(exact=Fraction(11)), WindowEdge(exact=Fraction(17))
        assert find_prime_in_window(lower, upper) == 13
        closed = WindowEdge(exact=Fraction(11), closed=True)
        assert find_prime_in_window(closed, upper) == 11

    def test_window_prime_bracketed(self):
        """Test a lower edge near sqrt(50) given only by a shrinking bracket."""
        calls = []

        def bracket(bits):
            calls.append(bits)
            slack = Fraction(1, 2 ** (bits // 8))
            return Fraction(707, 100) - slack, Fraction(708, 100) + slack

        assert find_prime_in_window(WindowEdge(bracket=bracket), None, max_candidates=100) == 11
        assert calls

    def test_refinement_failure(self):
        """Test that an edge that never separates from a candidate fails loudly."""
        stuck = WindowEdge(bracket=lambda bits: (Fraction(15, 2), Fraction(17, 2)))
        with pytest.raises(PrecisionFailureError):
            compare_to_edge(8, stuck, bits=96, ceiling=400)

    def test_widened_scan_budget(self):
        """Test that an unbounded scan stops after its candidate budget."""
        with pytest.raises(PrimeNotFoundError):
            find_prime_in_window(WindowEdge(exact=Fraction(24)), None, max_candidates=4)


class TestPolynomials:
    """Tests for integer polynomials and Dedekind's criterion."""

    def test_parse(self):
        """Test parsing and basic accessors."""
        f = PolyZ.parse("x^3 - 17")
        assert f.coeffs == (-17, 0, 0, 1)
        assert f.degree == 3
        assert f.is_monic()
        assert f.derivative().coeffs == (0, 0, 3)
        assert f == PolyZ.pure_radical(3, 17)

    @pytest.mark.parametrize(
        "poly,q,expected",
        [
            ("x^2 - 5", 2, False),
            ("x^2 - 3", 2, True),
            ("x^3 - 10", 3, False),
            ("x^3 - 2", 3, True),
            ("x^3 - 2", 2, True),
            ("x^7 - 251", 7, True),
            ("x^7 - 251", 251, True),
        ],
    )
    def test_index_coprime(self, poly, q, expected):
        """Test Dedekind's criterion against known rings of integers."""
        assert dedekind_index_coprime(PolyZ.parse(poly), q) is expected

    def test_radical_split(self):
        """Test the split of x^2 - 5 modulo 2."""
        g, h, F = dedekind_radical_split(PolyZ.parse("x^2 - 5"), 2)
        assert g.lift() == PolyZ((1, 1))
        assert h.lift() == PolyZ((1, 1))
        assert F.lift() == PolyZ((1, 1))

    def test_dedekind_needs_monic(self):
        """Test that a non-monic polynomial is rejected."""
        with pytest.raises(PreconditionError):
            dedekind_index_coprime(PolyZ.parse("2*x^2 - 5"), 3)

    def test_factor_naive(self):
        """Test that x^2 + 1 is a square of x + 1 over F_2."""
        factors = factor_fq_naive(PolyZ.parse("x^2 + 1").reduce(2))
        assert len(factors) == 1
        phi, e = factors[0]
        assert e == 2
        assert phi.lift() == PolyZ((1, 1))

    def test_pure_radical_discriminant(self):
        """Test |disc(x^d - n)| = d^d n^(d-1)."""
        assert pure_radical_discriminant(3, 2) == 108
        assert pure_radical_discriminant(2, 5) == 20


class TestFermatQuotients:
    """Tests for the Fermat quotient helpers."""

    @pytest.mark.parametrize("p,d,expected", [(17, 3, True), (5, 3, False), (251, 7, False), (2309, 11, False)])
    def test_divides(self, p, d, expected):
        """Test whether d^2 divides p^d - p."""
        assert fermat_quotient_divides(p, d) is expected

    @pytest.mark.parametrize("d", list(primerange(3, 201)))
    def test_residue_is_one(self, d):
        """Test that (d-1)^(d-1) has Fermat-quotient residue 1 for every odd prime d <= 200."""
        assert fermat_quotient_residue(d) == 1

    def test_requires_odd_primes(self):
        """Test that even or composite arguments are rejected."""
        with pytest.raises(PreconditionError):
            fermat_quotient_residue(9)
        with pytest.raises(PreconditionError):
            fermat_quotient_divides(2, 3)

    @pytest.mark.parametrize("d,n,expected", [(3, 7, True), (3, 12, True), (3, 36, False), (1, 7, False)])
    def test_eisenstein(self, d, n, expected):
        """Test detection of a prime dividing n exactly once."""
        assert eisenstein_applicable(d, n) is expected
