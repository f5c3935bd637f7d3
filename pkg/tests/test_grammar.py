"""Expression grammar: parsing, errors, canonical print round-trips."""

import random
from fractions import Fraction

import pytest

from conftest import PREC
from dforge.diffpoly import DiffIndeterminate, DiffPolynomial
from dforge.errors import ExprSyntaxError, UnknownSymbol
from dforge.grammar import parse_coefficient, parse_diffpoly, pretty
from dforge.series import Coefficient, Exponent, SymbolBasis


class TestParsing:
    def test_parabola_derivative_polynomial(self):
        F = parse_diffpoly("f'^2 - 4*f")
        z1 = DiffIndeterminate.make(1)
        assert F == (DiffPolynomial.from_indeterminate(z1, 2)
                     - DiffPolynomial.from_indeterminate(DiffIndeterminate.make(0)).scale(4))

    def test_shift(self):
        F = parse_diffpoly("f(s+1) - 2*f")
        inds = F.indeterminates()
        assert DiffIndeterminate.make(0, 1) in inds

    def test_negative_fraction_shift(self):
        F = parse_diffpoly("f''(s-1/2)")
        (ind,) = F.indeterminates()
        assert ind.order == 2 and ind.shift == Fraction(-1, 2)

    def test_bivariate(self):
        F = parse_diffpoly("x^2*f'' + f")
        assert F.x_degree == 2 and F.total_degree == 1

    def test_parentheses_and_powers(self):
        F = parse_diffpoly("(f + 1)^2 - f^2 - 2*f - 1")
        assert F.is_zero

    def test_leading_minus(self):
        assert parse_diffpoly("-f + f").is_zero

    def test_exp_factor(self):
        F = parse_diffpoly("exp(-(L2 + 1/2*L3))*f")
        ((mono, coeff),) = F.terms
        nu = Exponent.make({"L2": 1, "L3": Fraction(1, 2)})
        assert coeff == Coefficient.damping(nu)


class TestErrors:
    def test_syntax_error_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_diffpoly("f' + \n  * 2")
        assert err.value.line == 2

    def test_trailing_garbage(self):
        with pytest.raises(ExprSyntaxError):
            parse_diffpoly("f' 2")

    def test_unknown_symbol_with_basis(self):
        basis = SymbolBasis.from_pairs([("L2", "0.69")], precision=PREC)
        with pytest.raises(UnknownSymbol):
            parse_diffpoly("f + Q3", basis)
        assert not parse_diffpoly("f + L2", basis).is_zero

    def test_bare_s_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse_diffpoly("s + f")

    def test_zero_denominator(self):
        with pytest.raises(ExprSyntaxError):
            parse_diffpoly("1/0")


class TestCoefficientParsing:
    def test_plain(self):
        assert parse_coefficient("3/2").as_fraction() == Fraction(3, 2)

    def test_symbolic(self):
        c = parse_coefficient("L2^2 - 1/3")
        assert c == (Coefficient.from_symbol("L2", 2)
                     - Coefficient.from_fraction(Fraction(1, 3)))

    def test_rejects_f(self):
        with pytest.raises(ExprSyntaxError):
            parse_coefficient("f + 1")


def _random_diffpoly(rng):
    terms = {}
    for _ in range(rng.randint(1, 5)):
        xdeg = rng.randint(0, 2)
        powers = {}
        for _k in range(rng.randint(0, 3)):
            ind = DiffIndeterminate.make(rng.randint(0, 3),
                                         Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
            powers[ind] = powers.get(ind, 0) + rng.randint(1, 2)
        mono = (xdeg, tuple(sorted(powers.items())))
        c = Coefficient.zero()
        for _j in range(rng.randint(1, 2)):
            part = Coefficient.from_fraction(Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
            if rng.random() < 0.4:
                part = part * Coefficient.from_symbol(rng.choice(["L2", "L3"]),
                                                      rng.randint(1, 2))
            if rng.random() < 0.2:
                part = part * Coefficient.damping(
                    Exponent.make({"L2": Fraction(rng.randint(-2, 2))},
                                  Fraction(rng.randint(-1, 1))))
            c = c + part
        terms[mono] = terms.get(mono, Coefficient.zero()) + c
    return DiffPolynomial._from_dict(terms)


class TestRoundTrip:
    def test_thousand_random_polynomials(self):
        rng = random.Random(20260811)
        for _ in range(1000):
            F = _random_diffpoly(rng)
            text = pretty(F)
            assert parse_diffpoly(text) == F, text

    def test_zero(self):
        assert parse_diffpoly(pretty(DiffPolynomial.zero())).is_zero
