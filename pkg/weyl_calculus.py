"""
Weyl Calculus in Entangled Form

The Wigner operator

    Delta(mu, nu) = int d2eta / pi^3  |nu - eta><nu + eta| exp(eta mu* - eta* mu)

is evaluated with a Gauss-Hermite rule over eta (the ket/bra coefficients carry
the factor exp(-|nu|^2 - |eta|^2), so the rule is exact on the polynomial part).
On top of it this module provides:

  * quantize: O = int d2mu d2nu W(mu, nu) Delta(mu, nu) on a midpoint grid
  * dequantize_trace: W = Tr[O Delta] / k with k = Tr Delta measured, using
    Euler-summed traces (the truncated diagonal sums of Delta oscillate)
  * dequantize_coherent: the independent coherent-state route
  * the delta-product operators 1/2 |eta><xi| exp[(eta* xi - eta xi*)/2]
  * the mutual transforms between Delta and the delta products, and the
    operator-function correspondence.

Normalization: the printed delta product is DELTA_SCALE = pi^2 times the
four-delta operator of the same arguments (each completeness measure d2eta/pi
contributes one 1/pi). wigner_to_delta and delta_to_wigner exchange operators
in delta-product normalization so results compare directly.

Phase-point coordinates map to the symbol variables by
(eta1, eta2, xi1, xi2) = (nu1, nu2, mu1, mu2).
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from entangled_states import entangled_coefficients
from fock_space import (
    Operator,
    euler_weights,
    identity,
    low_block_mask,
    power_table,
    project_low,
    sqrt_factorials,
)
from phase_errors import AccuracyWarning, CalibrationError, InvalidArgumentError
from xform import ComplexGrid, GridFunction, complex_forward

logger = logging.getLogger(__name__)

# Constants
DELTA_SCALE = np.pi ** 2
DEFAULT_INNER_POINTS = 61
DEFAULT_TRACE_MARGIN = 4
CALIBRATION_TOLERANCE = 0.05
QUANTIZE_DECAY_THRESHOLD = 1e-6
PHASE_RESOLUTION_MARGIN = 5.0  # Gauss-Hermite: |mu_i| <= sqrt(2 n) - margin
DELTA_CACHE_SIZE = 512
CACHE_DIGITS = 9
ORDERS = ("nu_first", "mu_first")
CALIBRATION_LABELS = (0.0, 0.25 + 0.25j, -0.3j)


@dataclass(frozen=True)
class PhasePoint:
    """Point (mu, nu) of the entangled phase space."""

    mu: complex
    nu: complex

    def __post_init__(self):
        mu, nu = complex(self.mu), complex(self.nu)
        if not (np.isfinite(mu) and np.isfinite(nu)):
            raise InvalidArgumentError(f"Phase point components must be finite: {mu}, {nu}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    def key(self):
        return (
            round(self.mu.real, CACHE_DIGITS),
            round(self.mu.imag, CACHE_DIGITS),
            round(self.nu.real, CACHE_DIGITS),
            round(self.nu.imag, CACHE_DIGITS),
        )


@dataclass
class CalibrationResult:
    k: complex
    spread: float
    values: list


@dataclass
class WeylMaps:
    """Shared state of the quantize / dequantize maps.

    Args:
        space (FockSpace): Truncated two-mode space.
        grid (ComplexGrid): Two-axis rule over the eta plane inside Delta.
        trace_margin (int): Euler depth is space.cutoff - trace_margin.
    """

    space: object
    grid: ComplexGrid
    trace_margin: int = DEFAULT_TRACE_MARGIN
    _trace_norm: complex = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.grid.axes != 2:
            raise InvalidArgumentError("The eta rule must be a two-axis grid")
        if not 0 <= self.trace_margin < self.space.cutoff:
            raise InvalidArgumentError(
                f"trace_margin must be in 0..{self.space.cutoff - 1}, got {self.trace_margin}"
            )
        nodes, weights = self.grid.plane_nodes()
        self.inner_nodes = nodes
        self.inner_weights = weights

    @property
    def trace_depth(self):
        return self.space.cutoff - self.trace_margin

    @property
    def trace_norm(self):
        """Measured k = Tr Delta, calibrated on first use."""
        if self._trace_norm is None:
            calibrate(self, default_calibration_points())
        return self._trace_norm

    def trace_weights(self):
        """Per-basis-state Euler weights e[n1] * e[n2] in flat-index order."""
        weights = euler_weights(self.trace_depth, self.space.levels)
        n1, n2 = self.space.occupation_grids()
        return weights[n1] * weights[n2]


def make_weyl_maps(space, inner_points=DEFAULT_INNER_POINTS, trace_margin=DEFAULT_TRACE_MARGIN,
                   rule="hermite", inner_extent=4.5):
    """Build WeylMaps with a Gauss-Hermite (default) or midpoint eta rule."""
    grid = ComplexGrid(points=inner_points, extent=inner_extent, axes=2, rule=rule)
    logger.info(
        f"Weyl maps: cutoff {space.cutoff}, {rule} eta rule with {inner_points}^2 nodes, "
        f"trace depth {space.cutoff - trace_margin}"
    )
    return WeylMaps(space=space, grid=grid, trace_margin=trace_margin)


def default_calibration_points():
    return [PhasePoint(mu, nu) for mu in CALIBRATION_LABELS for nu in CALIBRATION_LABELS]


def mode_to_entangled_coords(alpha1, alpha2):
    """(mu, nu) = (alpha1 + alpha2*, alpha1 - alpha2*)."""
    alpha1, alpha2 = complex(alpha1), complex(alpha2)
    return PhasePoint(alpha1 + np.conj(alpha2), alpha1 - np.conj(alpha2))


def entangled_to_mode_coords(pt):
    """Inverse of mode_to_entangled_coords: alpha1 = (mu + nu)/2, alpha2 = ((mu - nu)/2)*."""
    return (pt.mu + pt.nu) / 2, complex(np.conj((pt.mu - pt.nu) / 2))


def _resolvable_extent(grid):
    if grid.rule == "hermite":
        return np.sqrt(2 * grid.points) - PHASE_RESOLUTION_MARGIN
    return np.pi / (2 * grid.spacing)


def _check_mu_extent(maps, mus):
    """Warn when some mu component exceeds what the eta rule resolves."""
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    limit = _resolvable_extent(maps.grid)
    worst = float(np.max(np.maximum(np.abs(mus.real), np.abs(mus.imag))))
    if worst > limit:
        message = (
            f"Phase-point component {worst:.3g} beyond the resolvable range {limit:.2f} "
            f"of the {maps.grid.points}-node eta rule"
        )
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)


def _block_indices(space, level):
    return np.flatnonzero(low_block_mask(space, level))


def _embed(space, block, level):
    entries = np.zeros((space.dim, space.dim), dtype=complex)
    idx = _block_indices(space, level)
    entries[np.ix_(idx, idx)] = block
    return Operator(space, entries)


def _kernel_columns(maps, nu, level):
    """Coefficient columns of |nu - eta_k> and |nu + eta_k> truncated at level."""
    cutoff = level
    kets = entangled_coefficients(cutoff, nu - maps.inner_nodes, "eta")
    bras = entangled_coefficients(cutoff, nu + maps.inner_nodes, "eta")
    size = (cutoff + 1) ** 2
    return kets.reshape(-1, size).T, bras.reshape(-1, size).T


def _phase_matrix(nodes, mus):
    """exp(eta mu* - eta* mu) = exp(2i(eta2 mu1 - eta1 mu2)) as [mu, node]."""
    mus = np.asarray(mus, dtype=complex)
    return np.exp(2j * (np.outer(mus.real, nodes.imag) - np.outer(mus.imag, nodes.real)))


def _resolve_level(maps, level):
    if level is None:
        return maps.space.cutoff
    if not 0 <= level <= maps.space.cutoff:
        raise InvalidArgumentError(f"level must be in 0..{maps.space.cutoff}, got {level}")
    return level


def wigner_operator(maps, pt, level=None):
    """Delta(mu, nu) by Gauss-Hermite quadrature over eta.

    Args:
        maps (WeylMaps): Space and eta rule.
        pt (PhasePoint): Phase point.
        level (int, optional): Compute only the rows and columns of this low block.

    Returns:
        Operator: Delta on the full space (zero outside the block when level is given).
    """
    level = _resolve_level(maps, level)
    key = (pt.key(), level)
    cached = maps._cache.get(key)
    if cached is not None:
        return cached

    _check_mu_extent(maps, pt.mu)
    kets, bras = _kernel_columns(maps, pt.nu, level)
    phases = _phase_matrix(maps.inner_nodes, [pt.mu])[0]
    column_weights = maps.inner_weights * phases / np.pi ** 3
    block = (kets * column_weights) @ bras.conj().T
    result = _embed(maps.space, block, level)

    if len(maps._cache) < DELTA_CACHE_SIZE:
        maps._cache[key] = result
    return result


def delta_product(maps, eta, xi, order="nu_first"):
    """1/2 |eta><xi| exp[(eta* xi - eta xi*)/2] (nu_first) or its mu_first mirror
    1/2 |xi><eta| exp[(eta xi* - eta* xi)/2]."""
    if order not in ORDERS:
        raise InvalidArgumentError(f"order must be one of {ORDERS}, got {order!r}")
    cutoff = maps.space.cutoff
    eta, xi = complex(eta), complex(xi)
    eta_vec = entangled_coefficients(cutoff, eta, "eta").reshape(-1)
    xi_vec = entangled_coefficients(cutoff, xi, "xi").reshape(-1)
    if order == "nu_first":
        phase = np.exp((np.conj(eta) * xi - eta * np.conj(xi)) / 2)
        entries = 0.5 * phase * np.outer(eta_vec, xi_vec.conj())
    else:
        phase = np.exp((eta * np.conj(xi) - np.conj(eta) * xi) / 2)
        entries = 0.5 * phase * np.outer(xi_vec, eta_vec.conj())
    return Operator(maps.space, entries)


def _quantize_envelope(grid, level):
    x = grid.nodes()
    coords = np.meshgrid(x, x, x, x, indexing="ij")
    radius2 = sum(c ** 2 for c in coords)
    return np.exp(-radius2) * (1 + radius2) ** (2 * level)


def _check_symbol_decay(symbol, level, what):
    weighted = GridFunction(symbol.grid, symbol.samples * _quantize_envelope(symbol.grid, level))
    decay = weighted.boundary_decay
    if decay > QUANTIZE_DECAY_THRESHOLD:
        message = f"{what}: integrand boundary/peak ratio {decay:.2e} at level {level}"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)
    return decay


def quantize(maps, symbol, level=None):
    """O = sum over (mu, nu) nodes of W(mu, nu) Delta(mu, nu) spacing^4.

    For each nu node the mu sum is folded into the eta rule first:
    What(eta, nu) = sum_mu W(mu, nu) exp(2i(eta2 mu1 - eta1 mu2)) spacing^2,
    split into two one-axis passes.

    Args:
        maps (WeylMaps): Space and eta rule.
        symbol (GridFunction): Four-axis samples W[mu1, mu2, nu1, nu2] on a midpoint grid.
        level (int, optional): Only compute this low block (exact there).

    Returns:
        Operator: The quantized operator.
    """
    grid = symbol.grid
    if grid.axes != 4 or grid.rule != "midpoint":
        raise InvalidArgumentError("quantize needs a four-axis midpoint symbol grid")
    level = _resolve_level(maps, level)
    _check_symbol_decay(symbol, level, "quantize")

    outer = grid.nodes()
    h2 = grid.spacing ** 2
    inner = np.real(maps.grid.nodes())
    # pass over mu1 couples to eta2 with +2i, pass over mu2 couples to eta1 with -2i
    plus = np.exp(2j * np.outer(inner, outer))
    minus = np.exp(-2j * np.outer(inner, outer))
    _check_mu_extent(maps, outer[-1] * (1 + 1j))

    size = (level + 1) ** 2
    block = np.zeros((size, size), dtype=complex)
    for i, nu1 in enumerate(outer):
        for j, nu2 in enumerate(outer):
            plane = symbol.samples[:, :, i, j]
            if not np.any(plane):
                continue
            folded = minus @ plane.T @ plus.T * h2
            kets, bras = _kernel_columns(maps, complex(nu1, nu2), level)
            column_weights = folded.reshape(-1) * maps.inner_weights * h2 / np.pi ** 3
            block += (kets * column_weights) @ bras.conj().T
    logger.debug(f"Quantized symbol on {grid.points}^4 nodes at level {level}")
    return _embed(maps.space, block, level)


def _raw_traces(maps, operator, mus, nus):
    """Euler-summed Tr[O Delta(mu, nu)] for every nu (rows) and mu (columns)."""
    weighted = maps.trace_weights()[:, None] * operator.entries
    phases = _phase_matrix(maps.inner_nodes, mus)
    cutoff = maps.space.cutoff
    result = np.zeros((len(nus), len(mus)), dtype=complex)
    for row, nu in enumerate(nus):
        kets, bras = _kernel_columns(maps, complex(nu), cutoff)
        pairing = np.einsum("ik,ik->k", bras.conj(), weighted @ kets)
        result[row] = phases @ (maps.inner_weights * pairing) / np.pi ** 3
    return result


def calibrate(maps, points):
    """Measure k = Tr Delta over interior points and store it on maps.

    Raises:
        CalibrationError: When the values spread by more than 5% around their mean.
    """
    eye = identity(maps.space)
    values = []
    for pt in points:
        _check_mu_extent(maps, pt.mu)
        values.append(_raw_traces(maps, eye, [pt.mu], [pt.nu])[0, 0])
    mean = complex(np.mean(values))
    if mean == 0:
        raise CalibrationError("Trace of the Wigner operator vanished")
    spread = float(max(abs(v - mean) for v in values) / abs(mean))
    logger.info(f"Calibrated k = {mean.real:.6e} (spread {spread:.2e} over {len(values)} points)")
    if spread > CALIBRATION_TOLERANCE:
        raise CalibrationError(
            f"Trace of the Wigner operator varies by {spread:.1%} across phase points"
        )
    maps._trace_norm = mean
    return CalibrationResult(k=mean, spread=spread, values=values)


def symbol_samples(maps, operator, mus, nus):
    """Dequantized symbol Tr[O Delta] / k on the product set nus x mus.

    Returns:
        numpy.ndarray: Shape (len(nus), len(mus)).
    """
    if operator.space != maps.space:
        raise InvalidArgumentError("Operator and Weyl maps live on different spaces")
    _check_mu_extent(maps, mus)
    return _raw_traces(maps, operator, list(mus), list(nus)) / maps.trace_norm


def dequantize_trace(maps, operator, pt):
    """Weyl symbol of O at pt by trace pairing with Delta, normalized by k."""
    return complex(symbol_samples(maps, operator, [pt.mu], [pt.nu])[0, 0])


def _coherent_integrals(alpha, grid, levels):
    """I[m, n] = int d2beta/pi exp(-|beta|^2) (-beta*)^m beta^n exp(4i Im(beta* alpha))."""
    nodes, weights = grid.plane_nodes()
    gaussian = np.exp(-np.abs(nodes) ** 2)
    phase = np.exp(4j * np.imag(np.conj(nodes) * alpha))
    bra_powers = power_table(-np.conj(nodes), levels).T
    ket_powers = power_table(nodes, levels).T
    column_weights = weights * gaussian * phase / np.pi
    return (bra_powers * column_weights) @ ket_powers.T


def dequantize_coherent(space, operator, alpha1, alpha2, grid, depth=None):
    """Weyl symbol through the coherent-state expansion formula.

    W = 4 exp(2|a1|^2 + 2|a2|^2) int d2b1 d2b2 / pi^2 <-b1, -b2|O|b1, b2>
        exp[2 sum_k (b_k* a_k - a_k* b_k)]

    The ket-index series is Euler-summed per mode with the given depth.

    Args:
        space (FockSpace): Space of the operator.
        operator (Operator): Operator to dequantize.
        alpha1 (complex): Mode-1 coherent amplitude.
        alpha2 (complex): Mode-2 coherent amplitude.
        grid (ComplexGrid): Two-axis rule over each beta plane (Gauss-Hermite recommended).
        depth (int, optional): Euler depth; defaults to cutoff - 4.

    Returns:
        complex: The symbol value.
    """
    if operator.space != space:
        raise InvalidArgumentError("Operator lives on a different space")
    depth = space.cutoff - DEFAULT_TRACE_MARGIN if depth is None else depth
    levels = space.levels
    alpha1, alpha2 = complex(alpha1), complex(alpha2)

    first = _coherent_integrals(alpha1, grid, levels)
    second = _coherent_integrals(alpha2, grid, levels)
    roots = sqrt_factorials(space.cutoff)
    ket_weights = euler_weights(depth, levels) / roots

    entries = operator.entries.reshape(levels, levels, levels, levels)
    scaled = (
        entries
        / roots[:, None, None, None]
        / roots[None, :, None, None]
        * ket_weights[None, None, :, None]
        * ket_weights[None, None, None, :]
    )
    total = np.einsum("abcd,ac,bd->", scaled, first, second)
    return complex(4 * np.exp(2 * (abs(alpha1) ** 2 + abs(alpha2) ** 2)) * total)


def mutual_kernel(grid, eta, xi, sign):
    """exp[sign * 2i(A1 B2 - A2 B1)] on a four-axis (mu, nu) grid, A = xi - mu, B = eta - nu."""
    eta, xi = complex(eta), complex(xi)

    def kernel(mu1, mu2, nu1, nu2):
        a1, a2 = xi.real - mu1, xi.imag - mu2
        b1, b2 = eta.real - nu1, eta.imag - nu2
        return np.exp(sign * 2j * (a1 * b2 - a2 * b1))

    return GridFunction.from_function(grid, kernel)


def wigner_to_delta(maps, eta, xi, outer_grid, level=None):
    """Delta-product operator at (eta, xi) from the Wigner operators.

    Integrates int d2mu d2nu / pi^2 exp[-2i(A1 B2 - A2 B1)] Delta(mu, nu) and
    returns it scaled by DELTA_SCALE, i.e. comparable to delta_product(eta, xi).
    """
    kernel = mutual_kernel(outer_grid, eta, xi, -1)
    return quantize(maps, kernel.scaled(DELTA_SCALE / np.pi ** 2), level)


def _plane_grid(outer_grid):
    return ComplexGrid(points=outer_grid.points, extent=outer_grid.extent, axes=2)


def _delta_sum(maps, outer_grid, coefficients, level):
    """sum over (eta, xi) nodes of coefficients[eta, xi] * delta_product(eta, xi, nu_first).

    coefficients is indexed by flattened plane nodes [eta, xi] and already holds
    the quadrature weights.
    """
    nodes, _ = _plane_grid(outer_grid).plane_nodes()
    kets = entangled_coefficients(level, nodes, "eta").reshape(nodes.size, -1).T
    bras = entangled_coefficients(level, nodes, "xi").reshape(nodes.size, -1).T
    eta, xi = nodes[:, None], nodes[None, :]
    phase = np.exp((np.conj(eta) * xi - eta * np.conj(xi)) / 2)
    block = kets @ (0.5 * phase * coefficients) @ bras.conj().T
    return _embed(maps.space, block, level)


def delta_to_wigner(maps, pt, outer_grid, level=None):
    """Wigner operator at pt from the delta products.

    Integrates int d2xi d2eta / pi^2 exp[2i(A1 B2 - A2 B1)] (delta_product / DELTA_SCALE).
    """
    if outer_grid.rule != "midpoint":
        raise InvalidArgumentError("Mutual transforms use a midpoint outer grid")
    level = _resolve_level(maps, level)
    nodes, _ = _plane_grid(outer_grid).plane_nodes()
    eta, xi = nodes[:, None], nodes[None, :]
    a1, a2 = xi.real - pt.mu.real, xi.imag - pt.mu.imag
    b1, b2 = eta.real - pt.nu.real, eta.imag - pt.nu.imag
    kernel = np.exp(2j * (a1 * b2 - a2 * b1))
    weight = outer_grid.spacing ** 4 / np.pi ** 2 / DELTA_SCALE
    return _delta_sum(maps, outer_grid, kernel * weight, level)


def correspondence_sides(maps, d, outer_grid, level):
    """Both sides of the operator-function correspondence as Operators.

    LHS = int d2mu d2nu / pi^2 D(mu, nu) Delta(mu, nu)
    RHS = int d2eta d2xi / pi^2 F(eta, xi) x (four-delta operator at eta, xi)
    with F the complex forward transform of D.
    """
    if d.grid != outer_grid:
        raise InvalidArgumentError("D must be sampled on the outer grid")
    lhs = quantize(maps, d.scaled(1 / np.pi ** 2), level)

    transformed = complex_forward(d)
    g2 = outer_grid.points ** 2
    # F[xi1, xi2, eta1, eta2] -> [eta, xi]
    coefficients = transformed.samples.reshape(g2, g2).T
    weight = outer_grid.spacing ** 4 / np.pi ** 2 / DELTA_SCALE
    rhs = _delta_sum(maps, outer_grid, coefficients * weight, level)

    return lhs, rhs


def function_correspondence_check(maps, d, outer_grid, level):
    """max |LHS - RHS| of the operator-function correspondence on the level block."""
    lhs, rhs = correspondence_sides(maps, d, outer_grid, level)
    deviation = project_low(lhs - rhs, level).max_abs()
    logger.debug(f"Operator-function correspondence deviation {deviation:.3e}")
    return deviation
