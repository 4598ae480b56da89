"""
Truncated Two-Mode Fock Space

Dense complex operator algebra on the two-mode bosonic space with occupation
numbers 0..cutoff per mode. Basis states |n1, n2> are stored at flat index
n1 * (cutoff + 1) + n2. Every other module builds its states and operators on
top of the types defined here.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb, gammaln

from phase_errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Constants
MODES = (1, 2)
LADDER_KINDS = ("lower", "raise")
QUADRATURE_KINDS = ("position", "momentum")


@dataclass(frozen=True)
class FockSpace:
    """Truncated two-mode Fock space.

    Args:
        cutoff (int): Maximum occupation per mode, inclusive.
    """

    cutoff: int

    @property
    def levels(self):
        return self.cutoff + 1

    @property
    def dim(self):
        return self.levels ** 2

    def index(self, n1, n2):
        """Flat index of |n1, n2>."""
        if not (0 <= n1 <= self.cutoff and 0 <= n2 <= self.cutoff):
            raise InvalidArgumentError(
                f"Occupation ({n1}, {n2}) outside 0..{self.cutoff}"
            )
        return n1 * self.levels + n2

    def occupations(self, flat):
        """Inverse of index(): returns (n1, n2) for a flat index."""
        if not 0 <= flat < self.dim:
            raise InvalidArgumentError(f"Flat index {flat} outside 0..{self.dim - 1}")
        return divmod(flat, self.levels)

    def occupation_grids(self):
        """Arrays (n1, n2) of length dim in flat-index order."""
        n1, n2 = np.divmod(np.arange(self.dim), self.levels)
        return n1, n2


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense dim x dim complex matrix on a FockSpace."""

    space: FockSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (self.space.dim, self.space.dim):
            raise InvalidArgumentError(
                f"Operator entries have shape {entries.shape}, expected "
                f"({self.space.dim}, {self.space.dim})"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def element(self, bra, ket):
        """<bra|A|ket> for occupation pairs bra=(m1, m2), ket=(n1, n2)."""
        return self.entries[self.space.index(*bra), self.space.index(*ket)]

    def max_abs(self):
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0

    def __add__(self, other):
        _check_same_space(self, other)
        return Operator(self.space, self.entries + other.entries)

    def __sub__(self, other):
        _check_same_space(self, other)
        return Operator(self.space, self.entries - other.entries)

    def __neg__(self):
        return Operator(self.space, -self.entries)

    def __mul__(self, scalar):
        return Operator(self.space, self.entries * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return compose(self, other)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex coefficient vector on a FockSpace."""

    space: FockSpace
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape != (self.space.dim,):
            raise InvalidArgumentError(
                f"State has {coeffs.size} coefficients, expected {self.space.dim}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def amplitude(self, n1, n2):
        return self.coeffs[self.space.index(n1, n2)]

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def grid(self):
        """Coefficients as a (cutoff+1, cutoff+1) array indexed [n1, n2]."""
        return self.coeffs.reshape(self.space.levels, self.space.levels)

    def __add__(self, other):
        _check_same_space(self, other)
        return StateVector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_space(self, other)
        return StateVector(self.space, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return StateVector(self.space, self.coeffs * complex(scalar))

    __rmul__ = __mul__


def _check_same_space(a, b):
    if a.space != b.space:
        raise InvalidArgumentError(
            f"Operands live on different spaces (cutoff {a.space.cutoff} vs {b.space.cutoff})"
        )


def make_space(cutoff):
    """Create a truncated two-mode space.

    Args:
        cutoff (int): Maximum occupation per mode, at least 1.

    Returns:
        FockSpace: Space with dim = (cutoff + 1) ** 2.
    """
    if isinstance(cutoff, bool) or int(cutoff) != cutoff or cutoff < 1:
        raise InvalidArgumentError(f"cutoff must be an integer >= 1, got {cutoff!r}")
    space = FockSpace(int(cutoff))
    logger.debug(f"Created two-mode space with cutoff {space.cutoff} (dim {space.dim})")
    return space


def sqrt_factorials(cutoff):
    """sqrt(n!) for n = 0..cutoff, through log-gamma so large cutoffs stay finite."""
    return np.exp(0.5 * gammaln(np.arange(cutoff + 1) + 1))


def identity(space):
    return Operator(space, np.eye(space.dim, dtype=complex))


def zero_operator(space):
    return Operator(space, np.zeros((space.dim, space.dim), dtype=complex))


def vacuum(space):
    coeffs = np.zeros(space.dim, dtype=complex)
    coeffs[0] = 1.0
    return StateVector(space, coeffs)


def _single_mode_lower(levels):
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1)


def ladder(space, mode, kind):
    """Annihilation or creation operator of one mode.

    Args:
        space (FockSpace): Target space.
        mode (int): 1 or 2.
        kind (str): "lower" or "raise". Raising the top level gives zero.

    Returns:
        Operator: The ladder operator.
    """
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be 1 or 2, got {mode!r}")
    if kind not in LADDER_KINDS:
        raise InvalidArgumentError(f"kind must be one of {LADDER_KINDS}, got {kind!r}")

    single = _single_mode_lower(space.levels)
    if kind == "raise":
        single = single.T
    eye = np.eye(space.levels)
    entries = np.kron(single, eye) if mode == 1 else np.kron(eye, single)
    return Operator(space, entries)


def quadrature(space, mode, kind):
    """Position (a + a^dag)/sqrt(2) or momentum (a - a^dag)/(i sqrt(2)) of one mode."""
    if kind not in QUADRATURE_KINDS:
        raise InvalidArgumentError(
            f"kind must be one of {QUADRATURE_KINDS}, got {kind!r}"
        )
    lower = ladder(space, mode, "lower")
    raise_ = ladder(space, mode, "raise")
    if kind == "position":
        return (lower + raise_) * (1 / np.sqrt(2))
    return (lower - raise_) * (1 / (1j * np.sqrt(2)))


def compose(a, b):
    _check_same_space(a, b)
    return Operator(a.space, a.entries @ b.entries)


def adjoint(a):
    return Operator(a.space, a.entries.conj().T)


def commutator(a, b):
    _check_same_space(a, b)
    return Operator(a.space, a.entries @ b.entries - b.entries @ a.entries)


def op_trace(a):
    """Plain trace, summed in ascending flat-index order."""
    total = 0j
    for value in np.diagonal(a.entries):
        total += value
    return complex(total)


def apply(a, v):
    _check_same_space(a, v)
    return StateVector(a.space, a.entries @ v.coeffs)


def power(a, exponent):
    if exponent < 0:
        raise InvalidArgumentError(f"exponent must be >= 0, got {exponent}")
    return Operator(a.space, np.linalg.matrix_power(a.entries, int(exponent)))


def coherent_state(space, beta1, beta2):
    """Truncated product coherent state |beta1, beta2>.

    The coefficients are exact up to the cutoff; no renormalization is applied,
    so the returned norm measures the truncated tail.
    """
    n = np.arange(space.levels)
    roots = sqrt_factorials(space.cutoff)
    mode1 = np.power(complex(beta1), n) / roots
    mode2 = np.power(complex(beta2), n) / roots
    prefactor = np.exp(-0.5 * (abs(beta1) ** 2 + abs(beta2) ** 2))
    return StateVector(space, prefactor * np.outer(mode1, mode2).reshape(-1))


def low_block_mask(space, level):
    """Boolean mask over flat indices with n1 <= level and n2 <= level."""
    if isinstance(level, bool) or int(level) != level or not 0 <= level <= space.cutoff:
        raise InvalidArgumentError(
            f"level must be an integer in 0..{space.cutoff}, got {level!r}"
        )
    n1, n2 = space.occupation_grids()
    return (n1 <= level) & (n2 <= level)


def project_low(a, level):
    """Zero all rows and columns with n1 > level or n2 > level."""
    mask = low_block_mask(a.space, level)
    entries = np.where(np.outer(mask, mask), a.entries, 0)
    return Operator(a.space, entries)


def project_low_state(v, level):
    mask = low_block_mask(v.space, level)
    return StateVector(v.space, np.where(mask, v.coeffs, 0))


def low_block_deviation(a, b, level):
    """max |(a - b)_{ij}| over the low block."""
    return project_low(a - b, level).max_abs()


def euler_weights(depth, length=None):
    """Weights of the Euler-transformed partial sum of an occupation series.

    The series sum_k s_k r^k is re-expanded in w = r / (1 + r) and evaluated at
    w = 1/2 (r = 1), keeping terms up to w**depth. The result is linear in s:
    value = sum_k weights[k] * s_k, with weights[0] = 1 and zero past depth.

    Args:
        depth (int): Highest power of w kept.
        length (int, optional): Output length, padded with zeros. Defaults to depth + 1.

    Returns:
        numpy.ndarray: Real weights.
    """
    if depth < 0:
        raise InvalidArgumentError(f"depth must be >= 0, got {depth}")
    length = depth + 1 if length is None else length
    if length < depth + 1:
        raise InvalidArgumentError(f"length {length} shorter than depth + 1")

    weights = np.zeros(length)
    weights[0] = 1.0
    halves = 0.5 ** np.arange(depth + 1)
    for k in range(1, depth + 1):
        j = np.arange(k, depth + 1)
        weights[k] = np.sum(comb(j - 1, k - 1, exact=False) * halves[j])
    return weights


def summed_trace(a, depth):
    """Euler-summed trace with product weights e[n1] * e[n2].

    Reproduces the trace of trace-class limits whose truncated diagonal sums
    oscillate (parity-like operators such as the Wigner kernel).
    """
    if not 0 <= depth <= a.space.cutoff:
        raise InvalidArgumentError(
            f"depth must be in 0..{a.space.cutoff}, got {depth}"
        )
    weights = euler_weights(depth, a.space.levels)
    n1, n2 = a.space.occupation_grids()
    diagonal = np.diagonal(a.entries) * weights[n1] * weights[n2]
    total = 0j
    for value in diagonal:
        total += value
    return complex(total)


def power_table(base, levels):
    """Rows of base**0 .. base**(levels - 1) by repeated multiplication.

    Args:
        base (numpy.ndarray): Flat complex array.
        levels (int): Number of powers.

    Returns:
        numpy.ndarray: Shape (base.size, levels).
    """
    base = np.asarray(base, dtype=complex).reshape(-1)
    out = np.ones((base.size, levels), dtype=complex)
    for k in range(1, levels):
        out[:, k] = out[:, k - 1] * base
    return out
