"""
Entangled State Representations

Builds the two-mode entangled states

    |eta> = exp(-|eta|^2/2 + eta a1^dag - eta* a2^dag + a1^dag a2^dag) |00>
    |xi>  = exp(-|xi|^2/2  + xi a1^dag  + xi* a2^dag  - a1^dag a2^dag) |00>

in the truncated Fock space and checks their eigenrelations, overlap law and
(smeared) completeness and orthogonality, including the mixed resolutions of the
identity built from one |eta> and one <xi|.

All creation operators in the exponents commute, so the coefficients come from a
finite triple series and are exact for every occupation up to the cutoff.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from fock_space import (
    Operator,
    StateVector,
    apply,
    identity,
    ladder,
    low_block_mask,
    project_low,
    quadrature,
    euler_weights,
    power_table,
    sqrt_factorials,
)
from phase_errors import AccuracyWarning, DegenerateInputError, InvalidArgumentError
from xform import GridFunction

logger = logging.getLogger(__name__)

# Constants
FLAVORS = ("eta", "xi")
RESOLUTIONS = ("eta", "xi", "mixed_g1", "mixed_g2")
RESOLUTION_DECAY_THRESHOLD = 1e-3  # boundary / peak of low-block |coefficient|^2
SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class EntangledLabel:
    """Complex label of an entangled state together with its flavor."""

    value: complex
    flavor: str

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise InvalidArgumentError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        object.__setattr__(self, "value", complex(self.value))

    @property
    def re(self):
        return self.value.real

    @property
    def im(self):
        return self.value.imag


def entangled_coefficients(cutoff, values, flavor):
    """Coefficients <n1, n2|lambda> for a batch of labels.

    c[n1, n2] = exp(-|l|^2/2) sqrt(n1! n2!) sum_r g^r/r! A[n1 - r] B[n2 - r]
    with A[p] = alpha^p/p!, B[q] = beta^q/q! and
    (alpha, beta, g) = (l, -l*, +1) for eta and (l, +l*, -1) for xi.

    Args:
        cutoff (int): Highest occupation per mode to compute.
        values (array_like): Complex labels, any shape.
        flavor (str): "eta" or "xi".

    Returns:
        numpy.ndarray: Shape values.shape + (cutoff + 1, cutoff + 1).
    """
    if flavor not in FLAVORS:
        raise InvalidArgumentError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    labels = np.asarray(values, dtype=complex)
    flat = labels.reshape(-1)
    levels = cutoff + 1
    n = np.arange(levels)
    inverse_factorials = np.exp(-gammaln(n + 1))

    beta_sign = -1.0 if flavor == "eta" else 1.0
    pair_sign = 1.0 if flavor == "eta" else -1.0

    alpha_powers = power_table(flat, levels) * inverse_factorials
    beta_powers = power_table(beta_sign * np.conj(flat), levels) * inverse_factorials

    series = np.zeros((flat.size, levels, levels), dtype=complex)
    for r in range(levels):
        span = levels - r
        term = alpha_powers[:, :span, None] * beta_powers[:, None, :span]
        series[:, r:, r:] += (pair_sign ** r) * inverse_factorials[r] * term

    roots = sqrt_factorials(cutoff)
    prefactor = np.exp(-0.5 * np.abs(flat) ** 2)
    series *= prefactor[:, None, None]
    series *= roots[None, :, None]
    series *= roots[None, None, :]
    return series.reshape(labels.shape + (levels, levels))


def _state(space, label, flavor):
    coeffs = entangled_coefficients(space.cutoff, complex(label), flavor)
    return StateVector(space, coeffs.reshape(-1))


def eta_state(space, eta):
    """Truncated |eta>, common eigenvector of Q1 - Q2 and P1 + P2."""
    return _state(space, eta, "eta")


def xi_state(space, xi):
    """Truncated |xi>, common eigenvector of Q1 + Q2 and P1 - P2."""
    return _state(space, xi, "xi")


def state_for(space, label):
    return _state(space, label.value, label.flavor)


def eigenrelations(space, label):
    """(operator, eigenvalue) pairs satisfied by the state with this label."""
    a1, a2 = ladder(space, 1, "lower"), ladder(space, 2, "lower")
    a1d, a2d = ladder(space, 1, "raise"), ladder(space, 2, "raise")
    q1, q2 = quadrature(space, 1, "position"), quadrature(space, 2, "position")
    p1, p2 = quadrature(space, 1, "momentum"), quadrature(space, 2, "momentum")
    value = label.value

    if label.flavor == "eta":
        return [
            (a1 - a2d, value),
            (a2 - a1d, -np.conj(value)),
            (q1 - q2, SQRT2 * label.re),
            (p1 + p2, SQRT2 * label.im),
        ]
    return [
        (a1 + a2d, value),
        (a1d + a2, np.conj(value)),
        (q1 + q2, SQRT2 * label.re),
        (p1 - p2, SQRT2 * label.im),
    ]


def eigen_residual(space, state, label, level):
    """Largest relative low-block residual ||P (O - lambda)|state>|| / ||P |state>||.

    Args:
        space (FockSpace): Space of the state.
        state (StateVector): Candidate eigenvector.
        label (EntangledLabel): Label whose flavor selects the eigenrelations.
        level (int): Low block to measure on, at most cutoff - 2.

    Returns:
        float: Maximum relative residual over all applicable eigenrelations.
    """
    if not 0 <= level <= space.cutoff - 2:
        raise InvalidArgumentError(
            f"level must be in 0..{space.cutoff - 2}, got {level}"
        )
    mask = low_block_mask(space, level)
    reference = np.linalg.norm(state.coeffs[mask])
    if reference == 0:
        raise DegenerateInputError(f"State has zero norm on the level-{level} block")

    worst = 0.0
    for operator, eigenvalue in eigenrelations(space, label):
        image = apply(operator, state).coeffs - eigenvalue * state.coeffs
        worst = max(worst, float(np.linalg.norm(image[mask]) / reference))
    return worst


def overlap(u, v):
    """<u|v>, conjugate-linear in u, accumulated in flat-index order."""
    if u.space != v.space:
        raise InvalidArgumentError("Overlap of states on different spaces")
    return complex(np.vdot(u.coeffs, v.coeffs))


def summed_overlap(u, v, depth):
    """Euler-summed <u|v> graded by the mode-1 occupation.

    s_k = sum_{n2} conj(u[k, n2]) v[k, n2] is re-summed with euler_weights(depth).
    Gives the bounded value of overlaps between delta-normalized states whose
    truncated sums oscillate.
    """
    if u.space != v.space:
        raise InvalidArgumentError("Overlap of states on different spaces")
    if not 0 <= depth <= u.space.cutoff:
        raise InvalidArgumentError(f"depth must be in 0..{u.space.cutoff}, got {depth}")
    shells = np.sum(np.conj(u.grid()) * v.grid(), axis=1)
    weights = euler_weights(depth, u.space.levels)
    return complex(np.dot(weights, shells))


def overlap_closed_form(eta, xi):
    """<eta|xi> = 1/2 exp[(eta* xi - xi* eta)/2]."""
    eta, xi = complex(eta), complex(xi)
    return 0.5 * np.exp((np.conj(eta) * xi - np.conj(xi) * eta) / 2)


def overlap_ratio(space, eta, xi, depth):
    """Summed overlap <eta|xi> divided by its closed form."""
    value = summed_overlap(eta_state(space, eta), xi_state(space, xi), depth)
    return value / overlap_closed_form(eta, xi)


def _plane_states(space, grid, flavor):
    """Coefficient matrix with one column per grid node, plus node weights."""
    nodes, weights = grid.plane_nodes()
    coeffs = entangled_coefficients(space.cutoff, nodes, flavor)
    return coeffs.reshape(nodes.size, space.dim).T, nodes, weights


def _check_plane_decay(space, grid, columns, level, what):
    mask = low_block_mask(space, level)
    magnitude = np.abs(columns[mask, :]) ** 2
    peak = magnitude.max()
    shaped = magnitude.max(axis=0).reshape(grid.points, grid.points)
    edge = max(shaped[0, :].max(), shaped[-1, :].max(), shaped[:, 0].max(), shaped[:, -1].max())
    ratio = float(edge / peak) if peak > 0 else 0.0
    if ratio > RESOLUTION_DECAY_THRESHOLD:
        message = f"{what}: boundary/peak ratio {ratio:.2e} on a grid of extent {grid.extent}"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)
    return ratio


def _mixed_resolution(space, grid, which):
    """(1/2) int d2eta d2xi / pi^2 of |eta><xi| (mixed_g1) or |xi><eta| (mixed_g2) with their phases."""
    eta_cols, _, _ = _plane_states(space, grid, "eta")
    xi_cols, _, _ = _plane_states(space, grid, "xi")
    x = grid.nodes()
    g = grid.points
    h4 = grid.spacing ** 4

    # exp(i(eta1 xi2 - eta2 xi1)) = exp(i eta1 xi2) exp(-i eta2 xi1)
    sign = 1.0 if which == "mixed_g1" else -1.0
    first = np.exp(sign * 1j * np.outer(x, x))
    second = np.exp(-sign * 1j * np.outer(x, x))

    if which == "mixed_g1":
        ket_cols, bra_cols = eta_cols, xi_cols
        ket = ket_cols.reshape(space.dim, g, g)
        # ket axes [d, eta1, eta2] -> [d, xi1, xi2]
        folded = np.einsum("dab,ay,bx->dxy", ket, first, second)
    else:
        ket_cols, bra_cols = xi_cols, eta_cols
        ket = ket_cols.reshape(space.dim, g, g)
        # ket axes [d, xi1, xi2] -> [d, eta1, eta2]; phase exp(-i(eta1 xi2 - eta2 xi1))
        folded = np.einsum("dab,xb,ya->dxy", ket, first, second)
    folded = folded.reshape(space.dim, g * g)
    entries = 0.5 * h4 / np.pi ** 2 * folded @ bra_cols.conj().T
    return Operator(space, entries), ket_cols, bra_cols


def resolution_operator(space, grid, which, level=0):
    """Assemble the quadrature of a resolution of the identity as an Operator."""
    if which not in RESOLUTIONS:
        raise InvalidArgumentError(f"which must be one of {RESOLUTIONS}, got {which!r}")
    if grid.axes != 2 or grid.rule != "midpoint":
        raise InvalidArgumentError("Resolutions integrate over a two-axis midpoint grid")

    if which in FLAVORS:
        columns, _, weights = _plane_states(space, grid, which)
        _check_plane_decay(space, grid, columns, level, f"{which} resolution")
        entries = (columns * (weights / np.pi)) @ columns.conj().T
        return Operator(space, entries)

    operator, ket_cols, bra_cols = _mixed_resolution(space, grid, which)
    _check_plane_decay(space, grid, ket_cols, level, f"{which} resolution")
    _check_plane_decay(space, grid, bra_cols, level, f"{which} resolution")
    return operator


def resolution_check(space, grid, which, level):
    """max |(resolution - I)_{ij}| over the level block.

    Args:
        space (FockSpace): Truncated space the states live in.
        grid (ComplexGrid): Two-axis midpoint grid over each label plane.
        which (str): "eta", "xi", "mixed_g1" or "mixed_g2".
        level (int): Low block on which the identity is compared.

    Returns:
        float: Largest absolute deviation from the identity on the block.
    """
    operator = resolution_operator(space, grid, which, level)
    deviation = project_low(operator - identity(space), level).max_abs()
    logger.debug(f"Resolution {which} at level {level}: deviation {deviation:.3e}")
    return deviation


def orthogonality_smeared(space, grid, test_width, flavor, label=0j, level=None):
    """Smeared delta normalization |int d2l'/pi <l'|P|l> g(l') - g(l)| for a Gaussian g.

    g(l') = exp(-|l' - l|^2 / (2 w^2)) peaks at the label, so g(l) = 1. P projects
    onto the low block n1, n2 <= level.

    Args:
        space (FockSpace): Truncated space.
        grid (ComplexGrid): Two-axis midpoint grid over l'.
        test_width (float): Width w of the Gaussian test function.
        flavor (str): "eta" or "xi".
        label (complex): The fixed label l.
        level (int, optional): Low block of the overlaps; defaults to the cutoff.

    Returns:
        float: Relative deviation from g(l).
    """
    if flavor not in FLAVORS:
        raise InvalidArgumentError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    if grid.axes != 2 or grid.rule != "midpoint":
        raise InvalidArgumentError("Smeared orthogonality needs a two-axis midpoint grid")
    if test_width < 2 * grid.spacing:
        raise InvalidArgumentError(
            f"test_width {test_width} below twice the grid spacing {grid.spacing:.4f}"
        )
    level = space.cutoff if level is None else level

    columns, nodes, weights = _plane_states(space, grid, flavor)
    fixed = entangled_coefficients(space.cutoff, complex(label), flavor).reshape(-1)
    fixed = np.where(low_block_mask(space, level), fixed, 0)
    test = np.exp(-np.abs(nodes - label) ** 2 / (2 * test_width ** 2))

    edge = GridFunction(grid, test).boundary_decay
    if edge > RESOLUTION_DECAY_THRESHOLD:
        message = f"Smeared test function still {edge:.2e} at the grid boundary"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)

    overlaps = columns.conj().T @ fixed
    result = np.sum(weights / np.pi * test * overlaps)
    return float(abs(result - 1.0))

