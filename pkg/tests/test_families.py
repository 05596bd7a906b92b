from fractions import Fraction

import numpy as np
import pytest

from fraclab.errors import FamilyParseError, PreconditionError
from fraclab.families import Polynomial, parse_family, parse_polynomial


class TestParser:
    def test_basic_pair(self):
        fam = parse_family("t, t^2")
        assert fam.m == 2
        assert fam.e == (1, 2)
        assert fam.d == (1, 2)

    def test_coefficients_and_signs(self):
        p = parse_polynomial("t^2-2t^3")
        assert p.coeffs == (Fraction(0), Fraction(1), Fraction(-2))
        assert p.lowest_order == 2
        assert p.degree == 3

    def test_rational_coefficient(self):
        p = parse_polynomial("1/2t^2")
        assert p.coeffs == (Fraction(0), Fraction(1, 2))

    def test_explicit_star_and_spaces(self):
        p = parse_polynomial(" 3*t + 2t^2 ")
        assert p.coeffs == (Fraction(3), Fraction(2))

    def test_leading_minus(self):
        p = parse_polynomial("-t")
        assert p.coeffs == (Fraction(-1),)

    def test_cancellation_detected(self):
        with pytest.raises(FamilyParseError):
            parse_polynomial("t - t")

    def test_trailing_comma_rejected(self):
        with pytest.raises(FamilyParseError):
            parse_family("t,")

    def test_constant_term_rejected(self):
        with pytest.raises(FamilyParseError):
            parse_polynomial("t + 1")

    def test_garbage_rejected(self):
        for text in ("q^2", "t^", "2tt", "t^-1", ""):
            with pytest.raises(FamilyParseError):
                parse_polynomial(text)


class TestPolynomial:
    def test_evaluation_matches_horner(self):
        p = parse_polynomial("t - 2t^2 + 1/2t^4")
        ts = np.linspace(0, 1, 11)
        want = ts - 2 * ts**2 + 0.5 * ts**4
        assert np.allclose(p(ts), want, atol=1e-15)
        assert p(0.0) == 0.0

    def test_zero_rejected(self):
        with pytest.raises(PreconditionError):
            Polynomial((Fraction(0),))

    def test_ratio_detection(self):
        a = parse_polynomial("t")
        b = parse_polynomial("2t")
        assert b.ratio_to(a) == Fraction(2)
        assert parse_polynomial("t^2").ratio_to(a) is None
        assert parse_polynomial("t+t^2").ratio_to(parse_polynomial("2t+t^2")) is None

    def test_str_round_trip(self):
        for text in ("t", "t^2-2t^3", "3t+2t^2"):
            p = parse_polynomial(text)
            assert parse_polynomial(str(p)).coeffs == p.coeffs


class TestFamily:
    def test_relatively_curved(self):
        assert parse_family("t, t^2").relatively_curved()
        assert not parse_family("t, 2t").relatively_curved()
        assert parse_family("t, t^2, t^3").relatively_curved()
        # lowest orders decide, not degrees
        assert not parse_family("t+t^2, 2t").relatively_curved()

    def test_drop(self):
        fam = parse_family("t, t^2, t^3")
        assert fam.drop(1).e == (1, 3)

    def test_evaluate_matrix(self):
        fam = parse_family("t, t^2")
        ts = np.array([0.0, 0.5, 1.0])
        mat = fam.evaluate(ts)
        assert mat.shape == (2, 3)
        assert np.allclose(mat[1], ts**2)
