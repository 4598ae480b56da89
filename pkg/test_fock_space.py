#!/usr/bin/env python3
"""
Tests for the truncated two-mode Fock space and its operator algebra.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_space import (
    Operator,
    adjoint,
    apply,
    coherent_state,
    commutator,
    compose,
    euler_weights,
    identity,
    ladder,
    make_space,
    op_trace,
    project_low,
    quadrature,
    sqrt_factorials,
    summed_trace,
    vacuum,
)
from phase_errors import InvalidArgumentError


@pytest.fixture(scope="module")
def space():
    return make_space(6)


def random_operator(space, seed):
    rng = np.random.default_rng(seed)
    shape = (space.dim, space.dim)
    return Operator(space, rng.normal(size=shape) + 1j * rng.normal(size=shape))


@pytest.mark.parametrize("cutoff,dim", [(1, 4), (5, 36)])
def test_make_space_dim(cutoff, dim):
    assert make_space(cutoff).dim == dim


def test_large_cutoff_normalizations_stay_finite():
    assert make_space(200).dim == 201 ** 2
    roots = sqrt_factorials(200)
    assert np.all(np.isfinite(roots))
    np.testing.assert_allclose(roots[:5], np.sqrt([1, 1, 2, 6, 24]))
    assert np.log(roots[200]) == pytest.approx(0.5 * np.sum(np.log(np.arange(1, 201))), rel=1e-12)


@pytest.mark.parametrize("cutoff", [0, -3, 2.5])
def test_make_space_rejects_degenerate(cutoff):
    with pytest.raises(InvalidArgumentError):
        make_space(cutoff)


def test_index_map_is_bijection(space):
    seen = {space.index(n1, n2) for n1 in range(space.levels) for n2 in range(space.levels)}
    assert seen == set(range(space.dim))
    for flat in range(space.dim):
        assert space.index(*space.occupations(flat)) == flat


def test_ladder_matrix_elements(space):
    assert ladder(space, 1, "lower").element((0, 0), (1, 0)) == pytest.approx(1.0)
    assert ladder(space, 1, "raise").element((2, 0), (1, 0)) == pytest.approx(np.sqrt(2))
    assert ladder(space, 2, "lower").element((0, 2), (0, 3)) == pytest.approx(np.sqrt(3))


def test_ladder_rejects_bad_mode(space):
    with pytest.raises(InvalidArgumentError):
        ladder(space, 3, "lower")
    with pytest.raises(InvalidArgumentError):
        ladder(space, 1, "sideways")


def test_different_modes_commute_exactly(space):
    result = commutator(ladder(space, 1, "lower"), ladder(space, 2, "raise"))
    assert np.all(result.entries == 0)


@pytest.mark.parametrize("i", [1, 2])
@pytest.mark.parametrize("j", [1, 2])
def test_canonical_commutator_on_safe_block(space, i, j):
    result = commutator(ladder(space, i, "lower"), ladder(space, j, "raise"))
    expected = identity(space) * (1.0 if i == j else 0.0)
    level = space.cutoff - 1
    assert np.max(np.abs(project_low(result - expected, level).entries)) < 1e-12


def test_position_momentum_commutator(space):
    q = quadrature(space, 1, "position")
    p = quadrature(space, 1, "momentum")
    assert q.element((0, 0), (1, 0)) == pytest.approx(1 / np.sqrt(2))
    result = project_low(commutator(q, p), space.cutoff - 1)
    expected = project_low(identity(space) * 1j, space.cutoff - 1)
    np.testing.assert_allclose(result.entries, expected.entries, atol=1e-12)


def test_entangled_combination_commutator(space):
    left = ladder(space, 1, "raise") - ladder(space, 2, "lower")
    right = ladder(space, 1, "lower") + ladder(space, 2, "raise")
    level = space.cutoff - 1
    result = project_low(commutator(left, right), level)
    expected = project_low(identity(space) * -2.0, level)
    np.testing.assert_allclose(result.entries, expected.entries, atol=1e-12)


def test_operator_plumbing(space):
    a = random_operator(space, 1)
    np.testing.assert_array_equal(compose(identity(space), a).entries, a.entries)
    assert op_trace(ladder(space, 1, "raise")) == 0
    np.testing.assert_array_equal(
        adjoint(ladder(space, 1, "lower")).entries, ladder(space, 1, "raise").entries
    )
    np.testing.assert_array_equal(adjoint(adjoint(a)).entries, a.entries)


def test_space_mismatch_rejected(space):
    other = make_space(3)
    with pytest.raises(InvalidArgumentError):
        compose(identity(space), identity(other))
    with pytest.raises(InvalidArgumentError):
        apply(identity(space), vacuum(other))


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**16), st.integers(min_value=0, max_value=2**16))
def test_adjoint_reverses_products(seed_a, seed_b):
    space = make_space(3)
    a = random_operator(space, seed_a)
    b = random_operator(space, seed_b)
    left = adjoint(compose(a, b)).entries
    right = compose(adjoint(b), adjoint(a)).entries
    np.testing.assert_allclose(left, right, atol=1e-10)
    assert op_trace(compose(a, b)) == pytest.approx(op_trace(compose(b, a)), abs=1e-9)


def test_coherent_state(space):
    np.testing.assert_array_equal(coherent_state(space, 0, 0).coeffs, vacuum(space).coeffs)
    assert coherent_state(space, 1, 0).amplitude(1, 0) == pytest.approx(np.exp(-0.5))
    assert abs(coherent_state(make_space(20), 1, 0).norm() - 1) < 1e-8


def test_project_low(space):
    eye = identity(space)
    np.testing.assert_array_equal(project_low(eye, space.cutoff).entries, eye.entries)
    vacuum_only = project_low(random_operator(space, 7), 0)
    assert np.count_nonzero(vacuum_only.entries) == 1
    raised = project_low(ladder(space, 1, "raise"), space.cutoff - 1)
    assert raised.element((space.cutoff, 0), (space.cutoff - 1, 0)) == 0
    with pytest.raises(InvalidArgumentError):
        project_low(eye, space.cutoff + 1)


def test_euler_weights_sum_alternating_series():
    # 1 - 1 + 1 - ... has Abel value 1/2; the transform is exact for it
    weights = euler_weights(8)
    signs = (-1.0) ** np.arange(9)
    assert np.dot(weights, signs) == pytest.approx(0.5, abs=1e-14)
    assert weights[0] == 1.0
    assert np.all(weights[1:] > 0)


def test_euler_weights_reproduce_convergent_series():
    # a finite sequence s = (1, 2) sums to 1 + 2 * e_1
    weights = euler_weights(12)
    assert weights[1] == pytest.approx(1.0 - 0.5 ** 12, abs=1e-14)


def test_summed_trace_of_parity_is_quarter(space):
    # (-1)^(n1 + n2) has Abel trace 1/2 * 1/2
    n1, n2 = space.occupation_grids()
    parity = Operator(space, np.diag((-1.0) ** (n1 + n2)))
    assert summed_trace(parity, space.cutoff - 2) == pytest.approx(0.25, abs=1e-14)
    assert summed_trace(identity(space), 0) == pytest.approx(1.0)
