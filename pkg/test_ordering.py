#!/usr/bin/env python3
"""
Tests for two-variable Hermite polynomials, symbol polynomials and the
ordering-conversion comparison.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_space import adjoint, identity, ladder, make_space, project_low
from ordering import (
    SymbolPolynomial,
    compare_coefficients,
    fit_symbol,
    hermite2,
    hermite_integral_check,
    oracle_symbol,
    ordered_power,
    ordering_report,
    paper_symbol,
    weyl_symbol_exact,
)
from phase_errors import InvalidArgumentError
from weyl_calculus import make_weyl_maps
from xform import ComplexGrid

arguments = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def maps():
    return make_weyl_maps(make_space(10))


@pytest.fixture(scope="module")
def regulator_grid():
    return ComplexGrid(points=801, extent=36.0)


def test_hermite_known_values():
    t, s = 0.7 - 0.2j, 1.3j
    assert hermite2(0, 0, t, s) == 1
    assert hermite2(1, 1, t, s) == pytest.approx(t * s - 1)
    assert hermite2(2, 1, t, s) == pytest.approx(t ** 2 * s - 2 * t)


@pytest.mark.parametrize("m,r", [(13, 0), (0, -1), (1.5, 2)])
def test_hermite_rejects_out_of_range(m, r):
    with pytest.raises(InvalidArgumentError):
        hermite2(m, r, 1, 1)


@given(m=st.integers(0, 8), r=st.integers(1, 8), t=arguments, s=arguments)
@settings(max_examples=40, deadline=None)
def test_hermite_recurrence(m, r, t, s):
    left = hermite2(m + 1, r, t, s)
    right = t * hermite2(m, r, t, s) - r * hermite2(m, r - 1, t, s)
    assert left == pytest.approx(right, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("m,r,s,t", [(0, 0, 0, 0), (1, 0, 0, 0.5), (0, 1, 0.5, 0)])
def test_hermite_integral_examples(regulator_grid, m, r, s, t):
    assert hermite_integral_check(m, r, s, t, regulator_grid) < 1e-3


@pytest.mark.parametrize("m,r,s,t", [(1, 1, 0.3, -0.2), (2, 1, -0.4, 0.1)])
def test_hermite_integral_higher_powers(regulator_grid, m, r, s, t):
    assert hermite_integral_check(m, r, s, t, regulator_grid) < 1e-2


@pytest.mark.parametrize("m", range(3))
@pytest.mark.parametrize("r", range(3))
def test_hermite_integral_all_low_powers(regulator_grid, m, r):
    assert hermite_integral_check(m, r, 0.3, -0.2, regulator_grid) < 1e-3


def test_hermite_integral_rejects_large_powers(regulator_grid):
    with pytest.raises(InvalidArgumentError):
        hermite_integral_check(5, 0, 0, 0, regulator_grid)


def test_symbol_polynomial_arithmetic():
    eta1 = SymbolPolynomial.variable("eta1")
    xi2 = SymbolPolynomial.variable("xi2", scale=2j)
    square = (eta1 + xi2) ** 2
    assert square.degree == 2
    assert square.coefficient((1, 0, 0, 1)) == pytest.approx(4j)
    point = np.array([0.3, 9.0, -5.0, -0.2])
    assert square.evaluate(point) == pytest.approx((0.3 - 0.4j) ** 2)
    assert square.conjugate().evaluate(point) == pytest.approx((0.3 + 0.4j) ** 2)
    assert (eta1 + eta1.scale(2)).terms == {(1, 0, 0, 0): 3}


def test_symbol_from_repeated_coefficient_rows():
    powers = np.array([[1, 0, 0, 0], [0, 0, 1, 1], [1, 0, 0, 0]])
    merged = SymbolPolynomial.from_coefficients(powers, [1, 0.5j, 2])
    assert merged.terms == {(1, 0, 0, 0): 3, (0, 0, 1, 1): 0.5j}
    assert all(type(e) is int for exponents in merged.terms for e in exponents)


def test_symbol_polynomial_rejects_bad_exponents():
    with pytest.raises(InvalidArgumentError):
        SymbolPolynomial({(1, 0, 0): 1})
    with pytest.raises(InvalidArgumentError):
        SymbolPolynomial({(1, -1, 0, 0): 1})


def test_symbol_to_grid_uses_phase_axes():
    grid = ComplexGrid(points=5, extent=1.0, axes=4)
    samples = SymbolPolynomial.variable("eta2").to_grid(grid).samples
    np.testing.assert_allclose(samples[0, 1, 2, 3], 0.5)


def test_ordered_power_basics():
    space = make_space(6)
    np.testing.assert_array_equal(ordered_power(space, 0, 0, "g3").entries, identity(space).entries)
    expected = ladder(space, 1, "raise") - ladder(space, 2, "lower")
    np.testing.assert_array_equal(ordered_power(space, 1, 0, "dagger_first").entries, expected.entries)
    difference = ordered_power(space, 1, 1, "dagger_first") - ordered_power(space, 1, 1, "plain_first")
    level = space.cutoff - 1
    np.testing.assert_allclose(
        project_low(difference, level).entries, project_low(identity(space) * -2, level).entries, atol=1e-12
    )
    with pytest.raises(InvalidArgumentError):
        ordered_power(space, 1, 1, "anti_normal")


def test_exact_symbols_differ_by_commutator():
    dagger_first = weyl_symbol_exact(1, 1, "dagger_first")
    plain_first = weyl_symbol_exact(1, 1, "plain_first")
    assert dagger_first.coefficient((0, 0, 0, 0)) == pytest.approx(-1)
    assert (dagger_first - plain_first).trimmed().terms == pytest.approx({(0, 0, 0, 0): -2})
    # eta* = eta1 - i eta2
    linear = weyl_symbol_exact(1, 0, "g3")
    assert linear.coefficient((0, 1, 0, 0)) == pytest.approx(-1j)


@pytest.mark.parametrize("n,m", [(1, 0), (1, 1), (2, 1)])
@pytest.mark.parametrize("order", ["g3", "g6"])
def test_exact_symbol_degree(n, m, order):
    assert weyl_symbol_exact(n, m, order).degree == n + m
    assert paper_symbol(n, m, order).terms


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_order_difference_has_lower_degree(n, m):
    difference = (weyl_symbol_exact(n, m, "g3") - weyl_symbol_exact(n, m, "g6")).trimmed(1e-9)
    assert difference.terms
    assert difference.degree <= n + m - 2


def test_printed_identity_prefactor_is_flagged():
    printed = paper_symbol(0, 0, "g3")
    assert printed.coefficient((0, 0, 0, 0)) == pytest.approx(-1)
    records = compare_coefficients(printed, SymbolPolynomial.constant(1))
    assert [r["flag"] for r in records] == ["PAPER-MISMATCH"]


@pytest.mark.slow
def test_oracle_symbols_of_low_orders(maps):
    unit = oracle_symbol(maps, 0, 0, "g3")
    assert unit.max_coefficient_difference(SymbolPolynomial.constant(1)) < 1e-2

    linear = oracle_symbol(maps, 0, 1, "g3")
    expected = SymbolPolynomial.variable("xi1") + SymbolPolynomial.variable("xi2", scale=1j)
    assert linear.max_coefficient_difference(expected) < 1e-2


@pytest.mark.slow
def test_oracle_orders_differ_by_constant(maps):
    difference = oracle_symbol(maps, 1, 1, "g3") - oracle_symbol(maps, 1, 1, "g6")
    assert difference.max_coefficient_difference(SymbolPolynomial.constant(-2)) < 1e-2


@pytest.mark.slow
def test_oracle_adjoint_symmetry(maps):
    operator = ordered_power(maps.space, 1, 1, "dagger_first")
    direct = fit_symbol(maps, operator, 2)
    conjugated = fit_symbol(maps, adjoint(operator), 2)
    tolerance = 1e-2 + direct.residual + conjugated.residual
    assert conjugated.symbol.max_coefficient_difference(direct.symbol.conjugate()) < tolerance


@pytest.fixture(scope="module")
def report_maps():
    return make_weyl_maps(make_space(14), inner_points=81)


@pytest.mark.slow
@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (1, 1), (2, 0), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)])
def test_ordering_report_operator_check(report_maps, n, m):
    grid = ComplexGrid(points=25, extent=6.0, axes=4)
    report = ordering_report(report_maps, n, m, grid, level=2)
    assert [entry["order"] for entry in report.entries] == ["dagger_first", "plain_first"]
    assert report.worst_operator_check < 1e-2


@pytest.mark.slow
def test_ordering_report_reuses_oracle_symbol(maps):
    grid = ComplexGrid(points=9, extent=2.0, axes=4)
    entry = ordering_report(maps, 1, 1, grid, level=1).entries[0]
    assert entry["oracle_symbol"] == oracle_symbol(maps, 1, 1, "dagger_first").trimmed(1e-6).describe()
