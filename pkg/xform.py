"""
Two-Fold Integration Transforms

Quadrature grids over one or two complex planes, sampled functions on them, and
the scalar transform pairs:

    real pair     f(x, y) = int dp dq / pi  exp[2i(p - x)(q - y)] h(p, q)
    complex pair  F(eta, xi) = int d2mu d2nu / pi^2  D(mu, nu)
                               exp[(xi* - mu*)(eta - nu) - (eta* - nu*)(xi - mu)]

With A = xi - mu and B = eta - nu the complex exponent is 2i(A1 B2 - A2 B1), so
the four-axis transform splits into two independent two-axis passes over the
coupled pairs (mu1, nu2) and (mu2, nu1). Each pass is evaluated with the chirp
factorization

    exp[2i s (p - x)(q - y)] = exp(2i s pq) exp(-2i s py) exp(-2i s xq) exp(2i s xy)

which turns it into two matrix products.

Four-axis samples are stored in the order (first plane re, im, second plane re, im),
i.e. D[mu1, mu2, nu1, nu2] and F[xi1, xi2, eta1, eta2].
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss

from phase_errors import AccuracyWarning, InvalidArgumentError

logger = logging.getLogger(__name__)

# Constants
RULES = ("midpoint", "hermite")
MIN_POINTS = 5
DECAY_THRESHOLD = 1e-6  # boundary / peak magnitude that triggers an AccuracyWarning
INTERIOR_FRACTION = 2.0 / 3.0
DIRECT_MAX_POINTS = 11  # largest G accepted by the non-separable reference path
BINARY_DTYPE = np.dtype("<c16")


@dataclass(frozen=True)
class ComplexGrid:
    """Tensor-product quadrature grid over one (axes=2) or two (axes=4) complex planes.

    Args:
        points (int): Nodes per axis, odd so that 0 is a node.
        extent (float): Half-width L of the box [-L, L] (midpoint rule only).
        axes (int): 2 or 4.
        rule (str): "midpoint" for uniform nodes with weight = spacing, or
            "hermite" for Gauss-Hermite nodes with weights w * exp(x**2).
    """

    points: int
    extent: float
    axes: int = 2
    rule: str = "midpoint"

    def __post_init__(self):
        if self.rule not in RULES:
            raise InvalidArgumentError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.axes not in (2, 4):
            raise InvalidArgumentError(f"axes must be 2 or 4, got {self.axes!r}")
        if int(self.points) != self.points or self.points < MIN_POINTS or self.points % 2 == 0:
            raise InvalidArgumentError(
                f"points must be odd and >= {MIN_POINTS}, got {self.points!r}"
            )
        if not self.extent > 0:
            raise InvalidArgumentError(f"extent must be positive, got {self.extent!r}")

    @property
    def spacing(self):
        return 2.0 * self.extent / (self.points - 1)

    @property
    def node_weight(self):
        """Weight of every node of a midpoint grid: spacing ** axes."""
        return self.spacing ** self.axes

    def nodes(self):
        """One-dimensional nodes shared by every axis."""
        if self.rule == "hermite":
            return hermgauss(self.points)[0]
        return np.linspace(-self.extent, self.extent, self.points)

    def axis_weights(self):
        if self.rule == "hermite":
            x, w = hermgauss(self.points)
            return w * np.exp(x ** 2)
        return np.full(self.points, self.spacing)

    def plane(self):
        """Complex nodes z = x + i y as a (G, G) array indexed [x, y], and their weights."""
        x = self.nodes()
        w = self.axis_weights()
        return x[:, None] + 1j * x[None, :], np.outer(w, w)

    def plane_nodes(self):
        """Flattened complex nodes of one plane and their weights (row-major)."""
        z, w = self.plane()
        return z.reshape(-1), w.reshape(-1)

    def interior_mask(self, fraction=INTERIOR_FRACTION):
        """Boolean mask over all samples with every coordinate within fraction * L."""
        inside = np.abs(self.nodes()) <= fraction * self.extent + 1e-12
        mask = inside
        for _ in range(self.axes - 1):
            mask = np.multiply.outer(mask, inside)
        return mask

    def shape(self):
        return (self.points,) * self.axes


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a ComplexGrid, row-major in the grid's axis order."""

    grid: ComplexGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.size != self.grid.points ** self.grid.axes:
            raise InvalidArgumentError(
                f"Expected {self.grid.points ** self.grid.axes} samples, got {samples.size}"
            )
        samples = samples.reshape(self.grid.shape())
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_function(cls, grid, fn):
        """Sample fn(*coordinates) on every node; coordinates are broadcast arrays."""
        x = grid.nodes()
        coords = np.meshgrid(*([x] * grid.axes), indexing="ij")
        return cls(grid, np.broadcast_to(fn(*coords), grid.shape()))

    @classmethod
    def constant(cls, grid, value=1.0):
        """Hard-windowed constant: value on every node of the grid."""
        return cls(grid, np.full(grid.shape(), value, dtype=complex))

    @property
    def boundary_decay(self):
        """max |sample| on the boundary shell divided by max |sample|."""
        magnitude = np.abs(self.samples)
        peak = magnitude.max()
        if peak == 0:
            return 0.0
        edge = 0.0
        for axis in range(self.grid.axes):
            for end in (0, -1):
                edge = max(edge, np.take(magnitude, end, axis=axis).max())
        return float(edge / peak)

    def scaled(self, factor):
        return GridFunction(self.grid, self.samples * factor)

    def max_interior_difference(self, other):
        if other.grid != self.grid:
            raise InvalidArgumentError("Grid functions live on different grids")
        mask = self.grid.interior_mask()
        return float(np.max(np.abs(self.samples - other.samples)[mask]))

    def save(self, path, binary=False):
        """Write the header `axes G L` followed by the samples.

        Text mode writes one `re im` pair per node; binary mode appends the raw
        little-endian complex128 samples, which round-trips bit-exactly.
        """
        header = f"{self.grid.axes} {self.grid.points} {self.grid.extent!r}\n"
        flat = self.samples.reshape(-1)
        if binary:
            with open(path, "wb") as handle:
                handle.write(header.encode("ascii"))
                handle.write(flat.astype(BINARY_DTYPE).tobytes())
        else:
            with open(path, "w") as handle:
                handle.write(header)
                for value in flat:
                    handle.write(f"{float(value.real)!r} {float(value.imag)!r}\n")
        logger.debug(f"Saved {flat.size} samples to {path}")

    @classmethod
    def load(cls, path, binary=False):
        if binary:
            with open(path, "rb") as handle:
                header = handle.readline().decode("ascii")
                payload = handle.read()
            grid = _grid_from_header(header)
            samples = np.frombuffer(payload, dtype=BINARY_DTYPE)
        else:
            with open(path, "r") as handle:
                header = handle.readline()
                rows = np.loadtxt(handle, ndmin=2)
            grid = _grid_from_header(header)
            samples = rows[:, 0] + 1j * rows[:, 1]
        return cls(grid, samples)


def _grid_from_header(header):
    parts = header.split()
    if len(parts) != 3:
        raise InvalidArgumentError(f"Malformed grid header: {header.strip()!r}")
    axes, points, extent = int(parts[0]), int(parts[1]), float(parts[2])
    return ComplexGrid(points=points, extent=extent, axes=axes)


def _require_midpoint(grid, axes):
    if grid.axes != axes:
        raise InvalidArgumentError(f"Expected a {axes}-axis grid, got {grid.axes} axes")
    if grid.rule != "midpoint":
        raise InvalidArgumentError("Transforms are defined on midpoint grids only")


def warn_if_not_decaying(func, what, threshold=DECAY_THRESHOLD):
    """Emit an AccuracyWarning when func has not decayed at the grid boundary."""
    decay = func.boundary_decay
    if decay > threshold:
        message = f"{what}: boundary/peak ratio {decay:.2e} exceeds {threshold:.0e}"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)
    return decay


def _pair_pass(samples, axis_p, axis_q, sign, nodes, spacing):
    """Apply exp[2i*sign*(p - x)(q - y)] dp dq / pi over one coupled axis pair.

    Output x replaces axis_p and y replaces axis_q.
    """
    moved = np.moveaxis(samples, (axis_p, axis_q), (0, 1))
    chirp = np.exp(2j * sign * np.outer(nodes, nodes))
    mixing = np.exp(-2j * sign * np.outer(nodes, nodes))
    moved = moved * chirp.reshape(chirp.shape + (1,) * (moved.ndim - 2))
    # [p, q, ...] -> [x, p, ...]
    partial = np.tensordot(mixing, moved, axes=([1], [1]))
    # [x, p, ...] -> [y, x, ...]
    full = np.tensordot(mixing, partial, axes=([1], [1]))
    full = np.swapaxes(full, 0, 1) * chirp.reshape(chirp.shape + (1,) * (moved.ndim - 2))
    full *= spacing ** 2 / np.pi
    return np.moveaxis(full, (0, 1), (axis_p, axis_q))


def _real_pass(func, sign, what):
    _require_midpoint(func.grid, 2)
    warn_if_not_decaying(func, what)
    grid = func.grid
    result = _pair_pass(func.samples, 0, 1, sign, grid.nodes(), grid.spacing)
    return GridFunction(grid, result)


def real_forward(h):
    """f(x, y) = sum_{p, q} exp[2i(p - x)(q - y)] h(p, q) spacing^2 / pi."""
    return _real_pass(h, +1, "real_forward input")


def real_inverse(f):
    """h(p, q) = sum_{x, y} exp[-2i(p - x)(q - y)] f(x, y) spacing^2 / pi."""
    return _real_pass(f, -1, "real_inverse input")


def _complex_pass(func, signs, what):
    _require_midpoint(func.grid, 4)
    warn_if_not_decaying(func, what)
    grid = func.grid
    nodes, spacing = grid.nodes(), grid.spacing
    first, second = signs
    # pair (plane1 re, plane2 im) then pair (plane1 im, plane2 re)
    result = _pair_pass(func.samples, 0, 3, first, nodes, spacing)
    result = _pair_pass(result, 1, 2, second, nodes, spacing)
    return GridFunction(grid, result)


def complex_forward(d):
    """F[xi1, xi2, eta1, eta2] from D[mu1, mu2, nu1, nu2] by the separable two-pass rule."""
    logger.debug(f"complex_forward on {d.grid.points}^4 nodes")
    return _complex_pass(d, (+1, -1), "complex_forward input")


def complex_inverse(f):
    """D[mu1, mu2, nu1, nu2] from F[xi1, xi2, eta1, eta2] with the reversed kernel."""
    logger.debug(f"complex_inverse on {f.grid.points}^4 nodes")
    return _complex_pass(f, (-1, +1), "complex_inverse input")


def complex_forward_direct(d):
    """Non-separable evaluation of complex_forward, for small grids.

    Builds the full exponent 2i[(xi1 - mu1)(eta2 - nu2) - (xi2 - mu2)(eta1 - nu1)]
    for each output (xi1, xi2) and sums over all input nodes at once.
    """
    _require_midpoint(d.grid, 4)
    grid = d.grid
    if grid.points > DIRECT_MAX_POINTS:
        raise InvalidArgumentError(
            f"Direct evaluation limited to {DIRECT_MAX_POINTS} points per axis, "
            f"got {grid.points}"
        )
    x = grid.nodes()
    weight = grid.node_weight / np.pi ** 2
    # broadcast axes: [mu1, mu2, nu1, nu2, eta1, eta2]
    mu1 = x[:, None, None, None, None, None]
    mu2 = x[None, :, None, None, None, None]
    nu1 = x[None, None, :, None, None, None]
    nu2 = x[None, None, None, :, None, None]
    eta1 = x[None, None, None, None, :, None]
    eta2 = x[None, None, None, None, None, :]
    samples = d.samples[..., None, None]

    result = np.zeros(grid.shape(), dtype=complex)
    for i, xi1 in enumerate(x):
        for j, xi2 in enumerate(x):
            exponent = (xi1 - mu1) * (eta2 - nu2) - (xi2 - mu2) * (eta1 - nu1)
            kernel = np.exp(2j * exponent)
            result[i, j] = np.sum(samples * kernel, axis=(0, 1, 2, 3)) * weight
    return GridFunction(grid, result)


def parseval_gap(d):
    """Relative gap between the weighted squared norms of D and its forward transform."""
    axes = d.grid.axes
    transformed = real_forward(d) if axes == 2 else complex_forward(d)
    measure = d.grid.node_weight / np.pi ** (axes // 2)
    before = np.sum(np.abs(d.samples) ** 2) * measure
    after = np.sum(np.abs(transformed.samples) ** 2) * measure
    if before == 0:
        raise InvalidArgumentError("parseval_gap of an identically zero function")
    return float(abs(after - before) / before)


def _pair_kernel_sum(nodes, spacing, sign, x0, y0):
    """sum_{p, q} exp[2i*sign*(p - x0)(q - y0)] spacing^2 / pi."""
    phase = np.exp(2j * sign * np.outer(nodes - x0, nodes - y0))
    return phase.sum() * spacing ** 2 / np.pi


def kernel_normalization(grid, mu, nu):
    """Quadrature of the mutual-transform kernel over every (xi, eta) node.

    The kernel exp[-2i(A1 B2 - A2 B1)], A = xi - mu, B = eta - nu, integrates to 1
    against d2xi d2eta / pi^2; it factors into the pairs (xi1, eta2) and (xi2, eta1).
    """
    _require_midpoint(grid, 4)
    mu, nu = complex(mu), complex(nu)
    nodes, spacing = grid.nodes(), grid.spacing
    first = _pair_kernel_sum(nodes, spacing, -1, mu.real, nu.imag)
    second = _pair_kernel_sum(nodes, spacing, +1, mu.imag, nu.real)
    return complex(first * second)


def gaussian_integral_check(grid, zeta, xi, eta):
    """Relative deviation of int d2z/pi exp(zeta|z|^2 + xi z + eta z*) from -(1/zeta) exp(-xi eta/zeta).

    Args:
        grid (ComplexGrid): Two-axis midpoint grid over z.
        zeta (complex): Must have a negative real part.
        xi (complex): Coefficient of z.
        eta (complex): Coefficient of z*.

    Returns:
        float: |quadrature - closed form| / |closed form|.
    """
    _require_midpoint(grid, 2)
    zeta = complex(zeta)
    if zeta.real >= 0:
        raise InvalidArgumentError(f"Gaussian integral needs Re(zeta) < 0, got {zeta}")
    z, weights = grid.plane()
    integrand = GridFunction(grid, np.exp(zeta * np.abs(z) ** 2 + xi * z + eta * np.conj(z)))
    warn_if_not_decaying(integrand, "Gaussian integrand")
    quadrature = np.sum(integrand.samples * weights) / np.pi
    closed = -np.exp(-xi * eta / zeta) / zeta
    return float(abs(quadrature - closed) / abs(closed))
