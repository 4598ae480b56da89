"""
Operator Ordering Conversions

Two-variable Hermite polynomials

    H_{m,r}(t, s) = sum_l (-1)^l m! r! / (l! (m-l)! (r-l)!) t^(m-l) s^(r-l)

and the Weyl symbols of the ordered products

    dagger_first:  (a1^dag - a2)^n (a1 + a2^dag)^m
    plain_first:   (a1 + a2^dag)^m (a1^dag - a2)^n

from three sources: the double-sum Hermite expressions as printed, the closed
form obtained from [a1^dag - a2, a1 + a2^dag] = -2, and a least-squares fit of
numerically dequantized samples. The fitted symbol is the reference; the printed
expressions are compared coefficient by coefficient and mismatches are flagged,
never failed.

Symbols are polynomials in the real variables (eta1, eta2, xi1, xi2), which sit on
the phase point as (nu1, nu2, mu1, mu2).
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb, factorial
from sklearn.linear_model import LinearRegression
from sklearn.preprocessing import PolynomialFeatures

from fock_space import compose, identity, ladder, power, project_low
from phase_errors import AccuracyError, AccuracyWarning, InvalidArgumentError, OracleFitError
from weyl_calculus import quantize, symbol_samples
from xform import ComplexGrid, GridFunction

logger = logging.getLogger(__name__)

# Constants
HERMITE_MAX_INDEX = 12
INTEGRAL_MAX_INDEX = 4
REGULATORS = (0.2, 0.1, 0.05, 0.025)
EXTRAPOLATION_TOLERANCE = 1e-2
ORACLE_TOLERANCE = 1e-2
ORACLE_POINTS = 5
ORACLE_BOX = 0.5
MATCH_TOLERANCE = 1e-2
VARIABLES = ("eta1", "eta2", "xi1", "xi2")
ORDERS = ("dagger_first", "plain_first")
ORDER_ALIASES = {"g3": "dagger_first", "g6": "plain_first"}
SQRT2 = np.sqrt(2.0)


def _canonical_order(order):
    order = ORDER_ALIASES.get(order, order)
    if order not in ORDERS:
        raise InvalidArgumentError(
            f"order must be one of {ORDERS + tuple(ORDER_ALIASES)}, got {order!r}"
        )
    return order


def hermite_terms(m, r):
    """Integer coefficients (l, (-1)^l m! r! / (l! (m-l)! (r-l)!)) of H_{m,r}."""
    if m < 0 or r < 0:
        return []
    terms = []
    for l in range(min(m, r) + 1):
        magnitude = factorial(l, exact=True) * comb(m, l, exact=True) * comb(r, l, exact=True)
        terms.append((l, (-1) ** l * magnitude))
    return terms


def hermite2(m, r, t, s):
    """H_{m,r}(t, s) for 0 <= m, r <= 12."""
    for name, index in (("m", m), ("r", r)):
        if int(index) != index or not 0 <= index <= HERMITE_MAX_INDEX:
            raise InvalidArgumentError(
                f"{name} must be an integer in 0..{HERMITE_MAX_INDEX}, got {index!r}"
            )
    t, s = complex(t), complex(s)
    total = 0j
    for l, coefficient in hermite_terms(m, r):
        total += coefficient * t ** (m - l) * s ** (r - l)
    return total


def hermite_integral_closed_form(m, r, s, t):
    """(1/sqrt2)^(m+r) (-i)^r H_{m,r}(sqrt2 t, i sqrt2 s)."""
    return (1 / SQRT2) ** (m + r) * (-1j) ** r * hermite2(m, r, SQRT2 * t, 1j * SQRT2 * s)


def _regulated_integral(m, r, s, t, grid, epsilon):
    x = grid.nodes()
    left = x ** m * np.exp(-epsilon * x ** 2)
    right = x ** r * np.exp(-epsilon * x ** 2)
    kernel = np.exp(2j * np.outer(x - t, x - s))
    return complex(left @ kernel @ right * grid.spacing ** 2 / np.pi)


def _extrapolate(epsilons, values):
    degree = len(epsilons) - 1
    real = np.polyfit(epsilons, np.real(values), degree)
    imag = np.polyfit(epsilons, np.imag(values), degree)
    return complex(real[-1], imag[-1])


def hermite_integral_check(m, r, s, t, grid, regulators=REGULATORS):
    """Relative deviation of int dxdy/pi x^m y^r exp[2i(y-s)(x-t)] from its Hermite closed form.

    The integrand is regulated by exp[-eps (x^2 + y^2)] and the quadrature is
    extrapolated to eps = 0 by a polynomial through every regulator level.

    Args:
        m (int): Power of x, at most 4.
        r (int): Power of y, at most 4.
        s (float): Shift of y.
        t (float): Shift of x.
        grid (ComplexGrid): Two-axis midpoint grid over (x, y).
        regulators (tuple): Decreasing regulator strengths.

    Returns:
        float: |extrapolated - closed form| / max(1, |closed form|).

    Raises:
        AccuracyError: When extrapolating with and without the strongest regulator disagree.
    """
    for name, index in (("m", m), ("r", r)):
        if int(index) != index or not 0 <= index <= INTEGRAL_MAX_INDEX:
            raise InvalidArgumentError(
                f"{name} must be an integer in 0..{INTEGRAL_MAX_INDEX}, got {index!r}"
            )
    if grid.axes != 2 or grid.rule != "midpoint":
        raise InvalidArgumentError("hermite_integral_check needs a two-axis midpoint grid")
    if len(regulators) < 3:
        raise InvalidArgumentError("At least three regulator levels are needed")

    weakest = min(regulators)
    edge = grid.extent ** (m + r) * np.exp(-weakest * grid.extent ** 2)
    if edge > 1e-6:
        message = f"Regulated integrand still {edge:.2e} at the grid boundary"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)

    epsilons = np.asarray(regulators, dtype=float)
    values = [_regulated_integral(m, r, s, t, grid, eps) for eps in epsilons]
    estimate = _extrapolate(epsilons, values)
    coarse = _extrapolate(epsilons[1:], values[1:])
    closed = hermite_integral_closed_form(m, r, s, t)
    scale = max(1.0, abs(closed))

    if abs(estimate - coarse) / scale > EXTRAPOLATION_TOLERANCE:
        raise AccuracyError(
            f"Regulator extrapolation unstable for m={m}, r={r}: {estimate} vs {coarse}"
        )
    deviation = abs(estimate - closed) / scale
    logger.debug(f"Hermite integral m={m} r={r}: {estimate:.6f} vs {closed:.6f}")
    return float(deviation)


@dataclass
class SymbolPolynomial:
    """Polynomial in (eta1, eta2, xi1, xi2) with complex coefficients.

    Terms are kept in a dict from exponent 4-tuples to coefficients, so exponent
    tuples are never duplicated.
    """

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exponents, coefficient in dict(self.terms).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != 4 or min(exponents) < 0:
                raise InvalidArgumentError(f"Invalid exponent tuple {exponents}")
            clean[exponents] = clean.get(exponents, 0j) + complex(coefficient)
        self.terms = clean

    @classmethod
    def constant(cls, value):
        return cls({(0, 0, 0, 0): value})

    @classmethod
    def variable(cls, name, scale=1.0):
        exponents = [0, 0, 0, 0]
        exponents[VARIABLES.index(name)] = 1
        return cls({tuple(exponents): scale})

    @classmethod
    def from_coefficients(cls, powers, coefficients):
        """Polynomial from parallel exponent rows and coefficients; repeated rows add up."""
        terms = {}
        for p, c in zip(powers, coefficients):
            key = tuple(int(e) for e in p)
            terms[key] = terms.get(key, 0j) + complex(c)
        return cls(terms)

    def coefficient(self, exponents):
        return self.terms.get(tuple(exponents), 0j)

    @property
    def degree(self):
        nonzero = [sum(e) for e, c in self.terms.items() if c != 0]
        return max(nonzero) if nonzero else 0

    def __add__(self, other):
        other = _as_symbol(other)
        merged = dict(self.terms)
        for exponents, coefficient in other.terms.items():
            merged[exponents] = merged.get(exponents, 0j) + coefficient
        return SymbolPolynomial(merged)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-_as_symbol(other))

    def __rsub__(self, other):
        return _as_symbol(other) - self

    def __mul__(self, other):
        other = _as_symbol(other)
        product = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                product[key] = product.get(key, 0j) + c1 * c2
        return SymbolPolynomial(product)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        result = SymbolPolynomial.constant(1)
        for _ in range(int(exponent)):
            result = result * self
        return result

    def scale(self, factor):
        return SymbolPolynomial({e: c * factor for e, c in self.terms.items()})

    def conjugate(self):
        """Complex conjugate of the symbol (the variables are real)."""
        return SymbolPolynomial({e: np.conj(c) for e, c in self.terms.items()})

    def trimmed(self, tolerance=1e-12):
        return SymbolPolynomial({e: c for e, c in self.terms.items() if abs(c) > tolerance})

    def evaluate(self, points):
        """Evaluate at real points of shape (..., 4) ordered (eta1, eta2, xi1, xi2)."""
        points = np.asarray(points, dtype=float)
        total = np.zeros(points.shape[:-1], dtype=complex)
        for exponents, coefficient in self.terms.items():
            monomial = np.ones(points.shape[:-1])
            for axis, exponent in enumerate(exponents):
                if exponent:
                    monomial = monomial * points[..., axis] ** exponent
            total += coefficient * monomial
        return total

    def max_coefficient_difference(self, other):
        difference = self - _as_symbol(other)
        return max((abs(c) for c in difference.terms.values()), default=0.0)

    def to_grid(self, grid):
        """Samples on a four-axis (mu1, mu2, nu1, nu2) grid."""
        if grid.axes != 4:
            raise InvalidArgumentError("Symbols are sampled on four-axis grids")

        def sample(mu1, mu2, nu1, nu2):
            stacked = np.stack(np.broadcast_arrays(nu1, nu2, mu1, mu2), axis=-1)
            return self.evaluate(stacked)

        return GridFunction.from_function(grid, sample)

    def describe(self, digits=6):
        """Readable sum of terms, highest degree first."""
        parts = []
        for exponents in sorted(self.terms, key=lambda e: (-sum(e), e)):
            coefficient = self.terms[exponents]
            if abs(coefficient) < 10 ** -digits:
                continue
            monomial = "*".join(
                name if power_ == 1 else f"{name}^{power_}"
                for name, power_ in zip(VARIABLES, exponents)
                if power_
            )
            value = complex(round(coefficient.real, digits), round(coefficient.imag, digits))
            parts.append(f"({value})" + (f"*{monomial}" if monomial else ""))
        return " + ".join(parts) if parts else "0"


def _as_symbol(value):
    if isinstance(value, SymbolPolynomial):
        return value
    return SymbolPolynomial.constant(value)


def hermite2_symbol(m, r, t, s):
    """H_{m,r} with symbol arguments; negative indices give the zero polynomial."""
    total = SymbolPolynomial()
    for l, coefficient in hermite_terms(m, r):
        total = total + (t ** (m - l)) * (s ** (r - l)) * coefficient
    return total


def _entangled_symbols():
    eta1 = SymbolPolynomial.variable("eta1")
    eta2 = SymbolPolynomial.variable("eta2")
    xi1 = SymbolPolynomial.variable("xi1")
    xi2 = SymbolPolynomial.variable("xi2")
    return eta1, eta2, xi1, xi2


def ordered_power(space, n, m, order):
    """(a1^dag - a2)^n (a1 + a2^dag)^m (dagger_first) or the reversed product (plain_first)."""
    order = _canonical_order(order)
    if n < 0 or m < 0:
        raise InvalidArgumentError(f"Powers must be non-negative, got n={n}, m={m}")
    x_op = ladder(space, 1, "raise") - ladder(space, 2, "lower")
    y_op = ladder(space, 1, "lower") + ladder(space, 2, "raise")
    if n == 0 and m == 0:
        return identity(space)
    left, right = power(x_op, n), power(y_op, m)
    if order == "dagger_first":
        return compose(left, right)
    return compose(right, left)


def weyl_symbol_exact(n, m, order):
    """Closed-form Weyl symbol of the ordered product.

    With X = a1^dag - a2 (symbol eta*) and Y = a1 + a2^dag (symbol xi), [X, Y] = -2, so
    X^n Y^m has symbol sum_k (-1)^k k! C(n,k) C(m,k) eta*^(n-k) xi^(m-k) and
    Y^m X^n the same sum without the sign.
    """
    order = _canonical_order(order)
    eta1, eta2, xi1, xi2 = _entangled_symbols()
    eta_conj = eta1 - eta2.scale(1j)
    xi = xi1 + xi2.scale(1j)
    sign = -1 if order == "dagger_first" else 1
    total = SymbolPolynomial()
    for k in range(min(n, m) + 1):
        weight = sign ** k * factorial(k, exact=True) * comb(n, k, exact=True) * comb(m, k, exact=True)
        total = total + (eta_conj ** (n - k)) * (xi ** (m - k)) * weight
    return total


def paper_symbol(n, m, order):
    """Double-sum Hermite expression for the Weyl symbol, expanded as printed.

    The operator arguments map to c-numbers by Q1 - Q2 -> sqrt2 eta1,
    P1 + P2 -> sqrt2 eta2, Q1 + Q2 -> sqrt2 xi1, P1 - P2 -> sqrt2 xi2.
    Terms whose Hermite index would be negative are dropped.
    """
    order = _canonical_order(order)
    eta1, eta2, xi1, xi2 = _entangled_symbols()
    total = SymbolPolynomial()
    for k in range(n + 1):
        for l in range(m + 1):
            weight = (
                factorial(m, exact=True) * factorial(n, exact=True) * SQRT2 ** (k + l)
                / (factorial(n - k, exact=True) * factorial(k, exact=True)
                   * factorial(m - l, exact=True) * factorial(l, exact=True))
            )
            if order == "dagger_first":
                first = hermite2_symbol(n - k, m, eta1.scale(SQRT2), xi2.scale(1j * SQRT2))
                second = hermite2_symbol(m - l, n, xi1.scale(1j * SQRT2), eta2.scale(-SQRT2))
            else:
                weight *= (-1) ** l
                first = hermite2_symbol(n, m, eta1.scale(-SQRT2), xi2.scale(1j * SQRT2))
                second = hermite2_symbol(m - k, n - l, xi1.scale(SQRT2), eta2.scale(1j * SQRT2))
            total = total + first * second * weight
    return total.scale(-(0.5 ** (n + m))).trimmed()


@dataclass
class OracleFit:
    symbol: SymbolPolynomial
    residual: float
    samples: int


def oracle_points(points_per_axis=ORACLE_POINTS, box=ORACLE_BOX):
    """Sample phases: mus and nus (complex) and the real points [nu, mu, 4]."""
    axis = np.linspace(-box, box, points_per_axis)
    plane = (axis[:, None] + 1j * axis[None, :]).reshape(-1)
    nus, mus = plane, plane
    points = np.empty((nus.size, mus.size, 4))
    points[..., 0] = nus.real[:, None]
    points[..., 1] = nus.imag[:, None]
    points[..., 2] = mus.real[None, :]
    points[..., 3] = mus.imag[None, :]
    return mus, nus, points


def fit_symbol(maps, operator, degree, points_per_axis=ORACLE_POINTS, box=ORACLE_BOX):
    """Least-squares polynomial of total degree <= degree through dequantized samples."""
    mus, nus, points = oracle_points(points_per_axis, box)
    samples = symbol_samples(maps, operator, mus, nus).reshape(-1)
    flat_points = points.reshape(-1, 4)

    features = PolynomialFeatures(degree=degree, include_bias=True)
    design = features.fit_transform(flat_points)
    targets = np.column_stack([samples.real, samples.imag])
    model = LinearRegression(fit_intercept=False).fit(design, targets)
    coefficients = model.coef_[0] + 1j * model.coef_[1]

    fitted = design @ coefficients
    residual = float(np.max(np.abs(fitted - samples)) / max(1.0, np.max(np.abs(samples))))
    symbol = SymbolPolynomial.from_coefficients(features.powers_, coefficients)
    return OracleFit(symbol=symbol, residual=residual, samples=samples.size)


def _checked_fit(maps, n, m, order, points_per_axis=ORACLE_POINTS, box=ORACLE_BOX):
    operator = ordered_power(maps.space, n, m, order)
    fit = fit_symbol(maps, operator, n + m, points_per_axis, box)
    logger.info(f"Oracle symbol ({n}, {m}, {_canonical_order(order)}): residual {fit.residual:.2e}")
    if fit.residual > ORACLE_TOLERANCE:
        raise OracleFitError(
            f"Symbol fit for ({n}, {m}, {order}) left residual {fit.residual:.2e}"
        )
    return operator, fit


def oracle_symbol(maps, n, m, order, points_per_axis=ORACLE_POINTS, box=ORACLE_BOX):
    """Weyl symbol of ordered_power(n, m, order) fitted from dequantized samples.

    Raises:
        OracleFitError: When the fit residual exceeds 1e-2.
    """
    return _checked_fit(maps, n, m, order, points_per_axis, box)[1].symbol


def compare_coefficients(printed_symbol, oracle, tolerance=MATCH_TOLERANCE):
    """Per-exponent comparison records with PAPER-MATCH / PAPER-MISMATCH flags."""
    records = []
    for exponents in sorted(set(printed_symbol.terms) | set(oracle.terms), key=lambda e: (sum(e), e)):
        printed = printed_symbol.coefficient(exponents)
        fitted = oracle.coefficient(exponents)
        if abs(printed) < 1e-12 and abs(fitted) < tolerance:
            continue
        difference = printed - fitted
        matched = abs(difference) <= tolerance * max(1.0, abs(fitted))
        records.append({
            "exponents": list(exponents),
            "printed": [printed.real, printed.imag],
            "oracle": [round(fitted.real, 10), round(fitted.imag, 10)],
            "difference": abs(difference),
            "flag": "PAPER-MATCH" if matched else "PAPER-MISMATCH",
        })
    return records


@dataclass
class OrderingReport:
    n: int
    m: int
    level: int
    entries: list = field(default_factory=list)

    @property
    def mismatches(self):
        return sum(
            1 for entry in self.entries for record in entry["coefficients"]
            if record["flag"] == "PAPER-MISMATCH"
        )

    @property
    def worst_operator_check(self):
        return max(entry["operator_check"] for entry in self.entries)


def ordering_report(maps, n, m, outer_grid, level=3):
    """Printed vs fitted vs closed-form symbols for both orders of (n, m).

    Args:
        maps (WeylMaps): Quantize / dequantize maps.
        n (int): Power of a1^dag - a2.
        m (int): Power of a1 + a2^dag.
        outer_grid (ComplexGrid): Four-axis midpoint grid for quantizing the fitted symbol.
        level (int): Low block for the operator-level comparison.

    Returns:
        OrderingReport: One entry per order.
    """
    report = OrderingReport(n=n, m=m, level=level)
    for order in ORDERS:
        printed = paper_symbol(n, m, order)
        operator, fit = _checked_fit(maps, n, m, order)
        exact = weyl_symbol_exact(n, m, order)
        requantized = quantize(maps, fit.symbol.to_grid(outer_grid), level)
        operator_check = project_low(requantized - operator, level).max_abs()
        coefficients = compare_coefficients(printed, fit.symbol)
        report.entries.append({
            "order": order,
            "paper_symbol": printed.describe(),
            "oracle_symbol": fit.symbol.trimmed(1e-6).describe(),
            "difference": (printed - fit.symbol).trimmed(1e-6).describe(),
            "fit_residual": fit.residual,
            "exact_gap": fit.symbol.max_coefficient_difference(exact),
            "operator_check": operator_check,
            "coefficients": coefficients,
        })
        logger.info(
            f"Ordering ({n}, {m}) {order}: operator check {operator_check:.2e}, "
            f"{sum(r['flag'] == 'PAPER-MISMATCH' for r in coefficients)} printed-coefficient mismatches"
        )
    return report
