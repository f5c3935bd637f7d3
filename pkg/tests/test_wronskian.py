"""Power products, Wronskian dependence, equation search."""

import pytest

from conftest import PREC, exact_exponential, geometric_series
from dforge.errors import HorizonTooShort
from dforge.formal_eval import substitute
from dforge.grammar import parse_diffpoly, pretty
from dforge.lattice import log_basis_for_indices
from dforge.series import Coefficient, Exponent, make_series, series_neg
from dforge.wronskian import (
    Dependent,
    Independent,
    NotFoundWithinW,
    PowerProduct,
    _wronskian_determinant,
    derive_ade,
    enumerate_products,
    wronskian_dependence,
)


def _partition_count_oracle(w):
    """Number of integer partitions of w by brute-force enumeration."""

    def count(remaining, max_part):
        if remaining == 0:
            return 1
        return sum(count(remaining - p, p) for p in range(min(remaining, max_part), 0, -1))

    return count(w, w)


class TestEnumerate:
    def test_weight_one(self):
        assert [str(p) for p in enumerate_products(1)] == ["f"]

    def test_weight_two(self):
        assert [str(p) for p in enumerate_products(2)] == ["f", "f^2", "f'"]

    def test_weight_three(self):
        assert [str(p) for p in enumerate_products(3)] == [
            "f", "f^2", "f'", "f^3", "f*f'", "f''"]

    def test_counts_match_partition_oracle(self):
        for w in range(1, 9):
            got = len([p for p in enumerate_products(w) if p.weight == w])
            assert got == _partition_count_oracle(w)

    def test_weights(self):
        p = PowerProduct.make({0: 2, 2: 1})
        assert p.weight == 2 * 1 + 1 * 3


class TestDependence:
    def test_exponential_pair_dependent(self, unit_basis):
        phi = exact_exponential(unit_basis, Exponent.constant(1))
        products = [PowerProduct.make({0: 1}), PowerProduct.make({1: 1})]
        verdict = wronskian_dependence(products, phi)
        assert isinstance(verdict, Dependent)
        assert [c.as_fraction() for c in verdict.coefficients] == [1, 1]
        assert verdict.complete

    def test_two_exponentials_independent(self, unit_basis):
        phi = make_series([(Exponent.constant(1), 1), (Exponent.constant(2), 1)],
                          unit_basis, Exponent.constant(2))
        products = [PowerProduct.make({0: 1}), PowerProduct.make({1: 1})]
        verdict = wronskian_dependence(products, phi)
        assert isinstance(verdict, Independent)
        assert verdict.witness_exponent == Exponent.constant(3)

    def test_geometric_riccati_dependence(self, lam_basis):
        phi = geometric_series(lam_basis, 14)
        products = [PowerProduct.make({0: 1}), PowerProduct.make({0: 2}),
                    PowerProduct.make({1: 1})]
        verdict = wronskian_dependence(products, phi)
        assert isinstance(verdict, Dependent)
        lam = Coefficient.from_symbol("lam")
        assert list(verdict.coefficients) == [lam, lam, Coefficient.one()]

    def test_requires_two_products(self, lam_basis):
        with pytest.raises(ValueError):
            wronskian_dependence([PowerProduct.make({0: 1})],
                                 geometric_series(lam_basis, 4))

    def test_underdetermined_horizon(self, unit_basis):
        # one stored exponent cannot settle three products
        phi = make_series([(Exponent.constant(1), 1)], unit_basis, Exponent.constant(1))
        products = [PowerProduct.make({0: 1}), PowerProduct.make({1: 1}),
                    PowerProduct.make({2: 1})]
        with pytest.raises(HorizonTooShort) as err:
            wronskian_dependence(products, phi)
        assert err.value.details == "underdetermined"

    def test_antisymmetry_of_determinant(self, lam_basis):
        from dforge.wronskian import _Column
        phi = geometric_series(lam_basis, 6)
        c1 = _Column(PowerProduct.make({0: 1}).evaluate(phi))
        c2 = _Column(PowerProduct.make({0: 2}).evaluate(phi))
        assert _wronskian_determinant([c1, c2], None, lam_basis) == \
            series_neg(_wronskian_determinant([c2, c1], None, lam_basis))


class TestDeriveAde:
    def test_single_exponential(self, unit_basis):
        phi = exact_exponential(unit_basis, Exponent.constant(1))
        F = derive_ade(phi, 2)
        assert pretty(F) == "f + f'"
        assert substitute(F, phi).is_zero

    def test_geometric(self, lam_basis):
        phi = geometric_series(lam_basis, 20)
        F = derive_ade(phi, 3)
        assert F == parse_diffpoly("lam*f + lam*f^2 + f'", lam_basis)
        assert substitute(F, phi).is_zero

    def test_double_exponential_two_symbols(self, log_basis):
        from dforge.series import FormalSeries, XPoly
        phi = FormalSeries(log_basis, (
            (Exponent.of("L2"), XPoly.from_coefficient(Coefficient.one())),
            (Exponent.of("L3"), XPoly.from_coefficient(Coefficient.one()))), None)
        F = derive_ade(phi, 3)
        assert not isinstance(F, NotFoundWithinW)
        assert substitute(F, phi).is_zero
        # linear second-order law, scaled by a constant symbol polynomial
        orders = sorted(ind.order for ind in F.indeterminates())
        assert orders == [0, 1, 2] and F.total_degree == 1

    def test_zeta_prefix_not_found(self):
        basis, vecs = log_basis_for_indices(range(1, 9), PREC)
        phi = make_series([(vecs[n], 1) for n in range(1, 9)], basis, vecs[8])
        result = derive_ade(phi, 3, horizon=vecs[6])
        assert isinstance(result, NotFoundWithinW)
        # every dependence candidate must have been refuted by substitution
        assert result.subsets_searched > 0

    def test_found_equation_always_rechecks(self, lam_basis):
        # any Dependent that survives must substitute to zero by construction
        phi = geometric_series(lam_basis, 10)
        F = derive_ade(phi, 3)
        assert substitute(F, phi).is_zero

    def test_window_relation_refuted_by_full_data(self, lam_basis):
        # corrupt one coefficient beyond the search window: the dependence
        # detector cannot see it, but the full-data residual cross-check can
        lam = Exponent.of("lam")
        terms = [(lam * n, 1) for n in range(1, 11)]
        terms[9] = (lam * 10, 3)  # break the geometric law at 10*lam
        phi = make_series(terms, lam_basis, lam * 10)
        result = derive_ade(phi, 3, horizon=lam * 8)
        assert isinstance(result, NotFoundWithinW)
        assert any("f'" in label for label in result.candidates_refuted)
