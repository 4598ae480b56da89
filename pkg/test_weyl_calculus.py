#!/usr/bin/env python3
"""
Tests for the Wigner operator, Weyl quantization / dequantization and the mutual
transforms between Wigner operators and delta products.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_space import adjoint, identity, ladder, make_space, project_low
from phase_errors import AccuracyWarning
from weyl_calculus import (
    PhasePoint,
    calibrate,
    default_calibration_points,
    delta_product,
    delta_to_wigner,
    dequantize_coherent,
    dequantize_trace,
    entangled_to_mode_coords,
    function_correspondence_check,
    make_weyl_maps,
    mode_to_entangled_coords,
    quantize,
    symbol_samples,
    wigner_operator,
    wigner_to_delta,
)
from xform import ComplexGrid, GridFunction

amplitudes = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def gaussian_symbol(mu1, mu2, nu1, nu2):
    return np.exp(-(mu1 ** 2 + mu2 ** 2 + nu1 ** 2 + nu2 ** 2))


@pytest.fixture(scope="module")
def maps():
    return make_weyl_maps(make_space(10))


@pytest.fixture(scope="module")
def oracle_maps():
    return make_weyl_maps(make_space(14))


@pytest.fixture(scope="module")
def outer_grid():
    return ComplexGrid(points=25, extent=6.0, axes=4)


@pytest.fixture(scope="module")
def coherent_grid():
    return ComplexGrid(points=41, extent=4.5, rule="hermite")


@pytest.mark.parametrize("pt", [PhasePoint(0, 0), PhasePoint(0.5, -0.3 + 0.2j)])
def test_wigner_operator_is_hermitian(maps, pt):
    delta = wigner_operator(maps, pt)
    assert (delta - adjoint(delta)).max_abs() < 1e-10


def test_wigner_operator_is_cached(maps):
    pt = PhasePoint(0.1, 0.2j)
    assert wigner_operator(maps, pt) is wigner_operator(maps, PhasePoint(0.1, 0.2j))


def test_unresolved_phase_point_warns(maps):
    with pytest.warns(AccuracyWarning):
        wigner_operator(maps, PhasePoint(7.5, 0), level=1)


def test_trace_is_constant_across_phase_points(maps):
    result = calibrate(maps, default_calibration_points())
    assert result.spread < 1e-2
    for mu in (0, 0.3 - 0.2j):
        assert abs(dequantize_trace(maps, identity(maps.space), PhasePoint(mu, -mu)) - 1) < 1e-2


def test_quantize_windowed_one_is_identity(maps, outer_grid):
    result = quantize(maps, GridFunction.constant(outer_grid), level=3)
    assert project_low(result - identity(maps.space), 3).max_abs() < 1e-3


def _round_trip_error(maps, grid):
    operator = quantize(maps, GridFunction.from_function(grid, gaussian_symbol), level=4)
    assert (operator - adjoint(operator)).max_abs() < 1e-10
    mus = np.array([0, 0.5, -0.4 + 0.3j])
    nus = np.array([0, 0.2j, 0.6 - 0.1j])
    samples = symbol_samples(maps, operator, mus, nus)
    expected = np.exp(-np.abs(nus)[:, None] ** 2 - np.abs(mus)[None, :] ** 2)
    return np.max(np.abs(samples - expected))


@pytest.mark.slow
def test_quantize_gaussian_round_trip(maps):
    fine = _round_trip_error(maps, ComplexGrid(points=37, extent=6.0, axes=4))
    assert fine < 1e-3
    assert fine < _round_trip_error(maps, ComplexGrid(points=25, extent=6.0, axes=4))


@pytest.mark.parametrize("pt", [PhasePoint(0.3, -0.2j), PhasePoint(-0.5 + 0.4j, 0.7)])
def test_dequantize_linear_symbols(maps, pt):
    space = maps.space
    plus = ladder(space, 1, "lower") + ladder(space, 2, "raise")
    minus = ladder(space, 1, "lower") - ladder(space, 2, "raise")
    assert abs(dequantize_trace(maps, plus, pt) - pt.mu) < 1e-3 * (1 + abs(pt.mu))
    assert abs(dequantize_trace(maps, minus, pt) - pt.nu) < 1e-3 * (1 + abs(pt.nu))


def test_dequantize_coherent_known_symbols(coherent_grid):
    space = make_space(14)
    a1 = ladder(space, 1, "lower")
    number = adjoint(a1) @ a1
    assert abs(dequantize_coherent(space, identity(space), 0, 0, coherent_grid) - 1) < 1e-3
    alpha = 0.6 - 0.3j
    assert abs(dequantize_coherent(space, a1, alpha, 0.2, coherent_grid) - alpha) < 1e-3
    expected = abs(alpha) ** 2 - 0.5
    assert abs(dequantize_coherent(space, number, alpha, 0, coherent_grid) - expected) < 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("alpha1,alpha2", [(0, 0), (0.5, -0.3j), (-0.4 + 0.6j, 0.7)])
def test_trace_and_coherent_dequantizers_agree(oracle_maps, coherent_grid, alpha1, alpha2):
    space = oracle_maps.space
    a1, a2 = ladder(space, 1, "lower"), ladder(space, 2, "lower")
    operators = [identity(space), a1, adjoint(a2), a1 + adjoint(a2), adjoint(a1) @ a1]
    pt = mode_to_entangled_coords(alpha1, alpha2)
    for operator in operators:
        by_trace = dequantize_trace(oracle_maps, operator, pt)
        by_coherent = dequantize_coherent(space, operator, alpha1, alpha2, coherent_grid)
        assert abs(by_trace - by_coherent) < 1e-2


def test_mode_to_entangled_coords_example():
    pt = mode_to_entangled_coords(1, 1j)
    assert pt.mu == pytest.approx(1 - 1j)
    assert pt.nu == pytest.approx(1 + 1j)


@given(alpha1=amplitudes, alpha2=amplitudes)
@settings(max_examples=30, deadline=None)
def test_mode_coordinates_round_trip(alpha1, alpha2):
    back1, back2 = entangled_to_mode_coords(mode_to_entangled_coords(alpha1, alpha2))
    assert back1 == pytest.approx(alpha1, abs=1e-12)
    assert back2 == pytest.approx(alpha2, abs=1e-12)


def test_delta_product_adjoint_pairing(maps):
    eta, xi = 0.4 - 0.2j, -0.3 + 0.5j
    first = delta_product(maps, eta, xi, "nu_first")
    mirrored = delta_product(maps, eta, xi, "mu_first")
    np.testing.assert_allclose(adjoint(first).entries, mirrored.entries, atol=1e-14)
    product = np.exp((np.conj(eta) * xi - eta * np.conj(xi)) / 2) * np.exp(
        (eta * np.conj(xi) - np.conj(eta) * xi) / 2
    )
    assert product == pytest.approx(1, abs=1e-12)


@pytest.mark.slow
def test_wigner_to_delta_matches_delta_product(maps, outer_grid):
    result = wigner_to_delta(maps, 0, 0, outer_grid, level=3)
    expected = delta_product(maps, 0, 0, "nu_first")
    assert project_low(result - expected, 3).max_abs() < 1e-2


@pytest.mark.slow
def test_delta_to_wigner_matches_wigner_operator(maps, outer_grid):
    pt = PhasePoint(0, 0)
    result = delta_to_wigner(maps, pt, outer_grid, level=3)
    assert (result - adjoint(result)).max_abs() < 1e-8
    expected = wigner_operator(maps, pt, level=3)
    assert project_low(result - expected, 3).max_abs() < 1e-2


@pytest.mark.slow
def test_function_correspondence_for_gaussian(maps, outer_grid):
    d = GridFunction.from_function(outer_grid, gaussian_symbol)
    assert function_correspondence_check(maps, d, outer_grid, level=3) < 1e-2
