"""
Verification Catalog

Every numerical check of the harness, grouped into the suites fock, states,
weyl, xform and ordering, and the runner that executes them.

Suites run in that dependency order. Checks inside a suite run on a thread pool
of `config.jobs` workers; records are assembled in catalog order, so parallelism
never changes the report. A check that raises is recorded as `fail` and the batch
continues; an AccuracyWarning emitted while a check runs marks it
`accuracy-warning`; an ordering report with printed-coefficient mismatches is
`paper-mismatch-flag`.
"""

import itertools
import logging
import math
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from entangled_states import (
    EntangledLabel,
    eigen_residual,
    eta_state,
    orthogonality_smeared,
    overlap_ratio,
    resolution_check,
    xi_state,
)
from fock_space import adjoint, commutator, identity, ladder, make_space, project_low
from ordering import hermite2, hermite_integral_check, ordering_report
from phase_errors import AccuracyWarning
from suite_report import CheckRecord, SuiteReport
from weyl_calculus import (
    PhasePoint,
    calibrate,
    default_calibration_points,
    delta_product,
    delta_to_wigner,
    dequantize_coherent,
    dequantize_trace,
    function_correspondence_check,
    make_weyl_maps,
    mode_to_entangled_coords,
    quantize,
    symbol_samples,
    wigner_operator,
    wigner_to_delta,
)
from xform import (
    ComplexGrid,
    GridFunction,
    complex_forward,
    complex_forward_direct,
    complex_inverse,
    gaussian_integral_check,
    kernel_normalization,
    parseval_gap,
    real_forward,
    real_inverse,
)

logger = logging.getLogger(__name__)

# Constants
CHECK_LEVEL = 3
EIGEN_LEVEL = 20
SMEARED_CUTOFF = 20
COHERENT_GRID = ComplexGrid(points=41, extent=4.5, rule="hermite")
ORDERING_PAIRS = tuple((n, total - n) for total in range(4) for n in range(total, -1, -1))
ORDERING_LEVEL = 2
ORDERING_INNER_POINTS = 81
RESOLUTION_LEVEL = 4
RESOLUTION_GRID = ComplexGrid(points=61, extent=5.0)
ROUND_TRIP_GRID = ComplexGrid(points=37, extent=6.0, axes=4)
TRANSFORM_GRID = ComplexGrid(points=33, extent=4.0, axes=4)
KERNEL_POINTS = ((0, 0), (0.5 - 0.3j, 0.2j), (-1 + 1j, 0.7))
REFINEMENT_SLACK = 1.2  # tolerated per-step growth of the error

_local = threading.local()


def gaussian(*coords):
    return np.exp(-sum(c ** 2 for c in coords))


@dataclass
class Measurement:
    value: float
    details: dict = field(default_factory=dict)
    mismatches: int = 0


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    tag: str
    tolerance: float
    measure: object


class SuiteContext:
    """Lazily built spaces and Weyl maps shared by the checks of one run."""

    def __init__(self, config):
        self.config = config
        self._lock = threading.RLock()
        self._objects = {}

    def _shared(self, key, factory):
        with self._lock:
            if key not in self._objects:
                self._objects[key] = factory()
            return self._objects[key]

    def space(self, cutoff=None):
        cutoff = self.config.cutoff if cutoff is None else cutoff
        return self._shared(("space", cutoff), lambda: make_space(cutoff))

    def maps(self, cutoff=None, inner_points=None):
        cutoff = self.config.cutoff if cutoff is None else cutoff
        config = self.config
        inner_points = config.inner_points if inner_points is None else inner_points
        return self._shared(
            ("maps", cutoff, inner_points),
            lambda: make_weyl_maps(
                self.space(cutoff),
                inner_points=inner_points,
                trace_margin=config.trace_margin,
                rule=config.inner_rule,
                inner_extent=config.inner_extent,
            ),
        )

    def outer_grid(self):
        return self.config.outer_grid()


def _growth(earlier, later):
    if earlier > 0:
        return later / earlier
    return 0.0 if later == 0 else math.inf


def _refinement(steps, run):
    """Error sequence of run(step) over successively finer steps.

    The measured value is the error of the last step. Accuracy warnings raised by
    the coarser steps are counted in the details instead of marking the check; a
    step whose error grows by more than REFINEMENT_SLACK raises an AccuracyWarning.
    """
    errors, coarse = [], []
    for step in steps[:-1]:
        held, _local.captured = getattr(_local, "captured", None), []
        try:
            errors.append(float(run(step)))
        finally:
            coarse.extend(_local.captured)
            _local.captured = held
    errors.append(float(run(steps[-1])))

    ratios = [_growth(earlier, later) for earlier, later in zip(errors, errors[1:])]
    monotone = all(ratio <= REFINEMENT_SLACK for ratio in ratios)
    labels = [f"{step.points}/{step.extent:g}" if isinstance(step, ComplexGrid) else str(step) for step in steps]
    if not monotone:
        message = "error does not decrease under refinement: " + ", ".join(
            f"{label} {error:.2e}" for label, error in zip(labels, errors)
        )
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)
    return Measurement(
        errors[-1],
        details={"steps": labels, "errors": errors, "ratios": ratios, "monotone": monotone,
                 "coarse_warnings": len(coarse)},
    )


# fock


def _ladder_commutators(ctx):
    space = ctx.space()
    level = space.cutoff - 1
    worst = 0.0
    for i in (1, 2):
        for j in (1, 2):
            result = commutator(ladder(space, i, "lower"), ladder(space, j, "raise"))
            expected = identity(space) * (1.0 if i == j else 0.0)
            worst = max(worst, project_low(result - expected, level).max_abs())
    return worst


def _entangled_commutator(ctx):
    space = ctx.space()
    left = ladder(space, 1, "raise") - ladder(space, 2, "lower")
    right = ladder(space, 1, "lower") + ladder(space, 2, "raise")
    result = commutator(left, right)
    return project_low(result + identity(space) * 2, space.cutoff - 1).max_abs()


# states


def _label_grid(radius, points):
    axis = np.linspace(-radius, radius, points)
    return (axis[:, None] + 1j * axis[None, :]).reshape(-1)


def _eigenrelations(ctx):
    space = ctx.space(ctx.config.scalar_cutoff)
    level = min(EIGEN_LEVEL, space.cutoff - 2)
    worst = 0.0
    for value in _label_grid(0.8, 5):
        worst = max(worst, eigen_residual(space, eta_state(space, value), EntangledLabel(value, "eta"), level))
        worst = max(worst, eigen_residual(space, xi_state(space, value), EntangledLabel(value, "xi"), level))
    return worst


def _overlap_law(ctx):
    space = ctx.space(ctx.config.scalar_cutoff)
    depth = space.cutoff - ctx.config.shell_margin
    labels = _label_grid(0.8, 5)
    worst = 0.0
    for eta, xi in zip(labels, 1j * np.conj(labels)):
        worst = max(worst, abs(overlap_ratio(space, eta, xi, depth) - 1))
    return Measurement(worst, details={"pairs": len(labels), "depth": depth})


def _resolution(which):
    def measure(ctx):
        space = ctx.space(ctx.config.resolution_cutoff)
        return resolution_check(space, RESOLUTION_GRID, which, RESOLUTION_LEVEL)
    return measure


def _resolution_spacing(ctx):
    space = ctx.space(ctx.config.resolution_cutoff)
    grids = [ComplexGrid(points=points, extent=RESOLUTION_GRID.extent) for points in (31, 61, 121)]
    return _refinement(grids, lambda grid: resolution_check(space, grid, "eta", RESOLUTION_LEVEL))


def _orthogonality(flavor, label):
    def measure(ctx):
        space = ctx.space(SMEARED_CUTOFF)
        return orthogonality_smeared(space, ComplexGrid(points=61, extent=3.0), 0.5, flavor, label)
    return measure


# weyl


def _delta_hermitian(ctx):
    maps = ctx.maps()
    worst = 0.0
    for pt in (PhasePoint(0, 0), PhasePoint(0.5, -0.3 + 0.2j)):
        delta = wigner_operator(maps, pt)
        worst = max(worst, (delta - adjoint(delta)).max_abs())
    return worst


def _trace_constancy(ctx):
    result = calibrate(ctx.maps(), default_calibration_points())
    return Measurement(result.spread, details={"k": [result.k.real, result.k.imag]})


def _quantize_identity(ctx):
    maps = ctx.maps()
    result = quantize(maps, GridFunction.constant(ctx.outer_grid()), CHECK_LEVEL)
    return project_low(result - identity(maps.space), CHECK_LEVEL).max_abs()


def _round_trip_error(maps, grid):
    operator = quantize(maps, GridFunction.from_function(grid, gaussian), CHECK_LEVEL + 1)
    mus = np.array([0, 0.5, -0.4 + 0.3j])
    nus = np.array([0, 0.2j, 0.6 - 0.1j])
    samples = symbol_samples(maps, operator, mus, nus)
    expected = np.exp(-np.abs(nus)[:, None] ** 2 - np.abs(mus)[None, :] ** 2)
    return float(np.max(np.abs(samples - expected)))


def _quantize_round_trip(ctx):
    return _round_trip_error(ctx.maps(), ROUND_TRIP_GRID)


def _round_trip_refinement(ctx):
    maps = ctx.maps()
    grids = [ComplexGrid(points=points, extent=ROUND_TRIP_GRID.extent, axes=4) for points in (13, 25, 37)]
    return _refinement(grids, partial(_round_trip_error, maps))


def _linear_symbols(ctx):
    maps = ctx.maps()
    space = maps.space
    plus = ladder(space, 1, "lower") + ladder(space, 2, "raise")
    minus = ladder(space, 1, "lower") - ladder(space, 2, "raise")
    worst = 0.0
    for pt in (PhasePoint(0.3, -0.2j), PhasePoint(-0.5 + 0.4j, 0.7)):
        worst = max(worst, abs(dequantize_trace(maps, plus, pt) - pt.mu) / (1 + abs(pt.mu)))
        worst = max(worst, abs(dequantize_trace(maps, minus, pt) - pt.nu) / (1 + abs(pt.nu)))
    return worst


def _coherent_oracle(ctx):
    maps = ctx.maps(ctx.config.oracle_cutoff)
    space = maps.space
    a1, a2 = ladder(space, 1, "lower"), ladder(space, 2, "lower")
    operators = {
        "identity": identity(space),
        "a1": a1,
        "a2_dag": adjoint(a2),
        "a1_plus_a2_dag": a1 + adjoint(a2),
        "number_1": adjoint(a1) @ a1,
    }
    worst = {}
    for alpha1, alpha2 in ((0, 0), (0.5, -0.3j), (-0.4 + 0.6j, 0.7), (0.7j, -0.7)):
        pt = mode_to_entangled_coords(alpha1, alpha2)
        for name, operator in operators.items():
            by_trace = dequantize_trace(maps, operator, pt)
            by_coherent = dequantize_coherent(space, operator, alpha1, alpha2, COHERENT_GRID)
            worst[name] = max(worst.get(name, 0.0), abs(by_trace - by_coherent))
    return Measurement(max(worst.values()), details=worst)


def _wigner_to_delta(ctx):
    maps = ctx.maps()
    result = wigner_to_delta(maps, 0, 0, ctx.outer_grid(), CHECK_LEVEL)
    return project_low(result - delta_product(maps, 0, 0, "nu_first"), CHECK_LEVEL).max_abs()


def _delta_to_wigner(ctx):
    maps = ctx.maps()
    pt = PhasePoint(0, 0)
    result = delta_to_wigner(maps, pt, ctx.outer_grid(), CHECK_LEVEL)
    deviation = project_low(result - wigner_operator(maps, pt, CHECK_LEVEL), CHECK_LEVEL).max_abs()
    return Measurement(deviation, details={"hermiticity": (result - adjoint(result)).max_abs()})


def _function_correspondence(ctx):
    maps = ctx.maps()
    grid = ctx.outer_grid()
    d = GridFunction.from_function(grid, gaussian)
    return function_correspondence_check(maps, d, grid, CHECK_LEVEL)


def _mutual_error(maps, grid):
    pt = PhasePoint(0, 0)
    to_delta = wigner_to_delta(maps, 0, 0, grid, CHECK_LEVEL) - delta_product(maps, 0, 0, "nu_first")
    to_wigner = delta_to_wigner(maps, pt, grid, CHECK_LEVEL) - wigner_operator(maps, pt, CHECK_LEVEL)
    return max(project_low(to_delta, CHECK_LEVEL).max_abs(), project_low(to_wigner, CHECK_LEVEL).max_abs())


def _mutual_refinement(ctx):
    steps = ((13, 3.0), (19, 4.5), (25, 6.0))
    grids = [ComplexGrid(points=points, extent=extent, axes=4) for points, extent in steps]
    return _refinement(grids, partial(_mutual_error, ctx.maps()))


# xform


def _real_round_trip(ctx):
    grid = ComplexGrid(points=121, extent=6.0)
    h = GridFunction.from_function(grid, lambda p, q: (p - 1j * q) * gaussian(p - 0.4, q))
    return real_inverse(real_forward(h)).max_interior_difference(h)


def _real_parseval(ctx):
    grid = ComplexGrid(points=121, extent=6.0)
    return parseval_gap(GridFunction.from_function(grid, gaussian))


def _complex_input(grid):
    return GridFunction.from_function(
        grid, lambda m1, m2, n1, n2: (1 + m1 * n2 - 0.5j * m2) * gaussian(m1, m2, n1 - 0.3, n2)
    )


def _complex_round_trip_error(grid):
    d = _complex_input(grid)
    return complex_inverse(complex_forward(d)).max_interior_difference(d)


def _complex_round_trip(ctx):
    return _complex_round_trip_error(TRANSFORM_GRID)


def _complex_parseval(ctx):
    return parseval_gap(_complex_input(TRANSFORM_GRID))


def _complex_refinement(ctx):
    steps = ((33, 4.0), (41, 5.0), (49, 6.0))
    grids = [ComplexGrid(points=points, extent=extent, axes=4) for points, extent in steps]
    return _refinement(grids, _complex_round_trip_error)


def _separable_vs_direct(ctx):
    grid = ComplexGrid(points=9, extent=4.0, axes=4)
    d = GridFunction.from_function(grid, lambda m1, m2, n1, n2: gaussian(m1, m2, n1, n2) * (1 + 1j * m2 * n1))
    return float(np.max(np.abs(complex_forward(d).samples - complex_forward_direct(d).samples)))


def _kernel_error(grid):
    return max(abs(kernel_normalization(grid, mu, nu) - 1) for mu, nu in KERNEL_POINTS)


def _kernel_normalization(ctx):
    return _kernel_error(ComplexGrid(points=161, extent=10.0, axes=4))


def _kernel_extent(ctx):
    steps = ((41, 5.0), (81, 10.0), (161, 10.0))
    grids = [ComplexGrid(points=points, extent=extent, axes=4) for points, extent in steps]
    return _refinement(grids, _kernel_error)


def _gaussian_integral(ctx):
    grid = ComplexGrid(points=61, extent=6.0)
    cases = ((-1, 0, 0), (-1 + 0.3j, 0.2, -0.1j), (-2.5, 0.4 + 0.1j, 0.3))
    return max(gaussian_integral_check(grid, *case) for case in cases)


# ordering


def _hermite_recurrence(ctx):
    rng = np.random.default_rng(20)
    points = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    worst = 0.0
    for t, s in points:
        for m in range(8):
            for r in range(1, 9):
                left = hermite2(m + 1, r, t, s)
                right = t * hermite2(m, r, t, s) - r * hermite2(m, r - 1, t, s)
                worst = max(worst, abs(left - right) / max(1.0, abs(left)))
    return worst


def _hermite_integral(ctx):
    grid = ComplexGrid(points=801, extent=36.0)
    s, t = 0.3, -0.2
    worst = max(hermite_integral_check(m, r, s, t, grid) for m, r in itertools.product(range(3), repeat=2))
    return Measurement(worst, details={"max_power": 2, "s": s, "t": t})


def _ordering(n, m):
    def measure(ctx):
        maps = ctx.maps(ctx.config.oracle_cutoff, ORDERING_INNER_POINTS)
        report = ordering_report(maps, n, m, ctx.outer_grid(), ORDERING_LEVEL)
        return Measurement(
            report.worst_operator_check,
            details={"entries": report.entries},
            mismatches=report.mismatches,
        )
    return measure


CATALOG = (
    Check("fock.ladder_commutators", "fock", "[a_i, a_j^dag] = delta_ij", 1e-12, _ladder_commutators),
    Check("fock.entangled_commutator", "fock", "entangled commutator = -2", 1e-12, _entangled_commutator),
    Check("states.eigenrelations", "states", "eta / xi eigenrelations", 1e-6, _eigenrelations),
    Check("states.overlap_law", "states", "eta-xi overlap law", 1e-6, _overlap_law),
    Check("states.resolution_eta", "states", "eta completeness", 1e-3, _resolution("eta")),
    Check("states.resolution_xi", "states", "xi completeness", 1e-3, _resolution("xi")),
    Check("states.resolution_g1", "states", "mixed completeness |eta><xi|", 1e-3, _resolution("mixed_g1")),
    Check("states.resolution_g2", "states", "mixed completeness |xi><eta|", 1e-3, _resolution("mixed_g2")),
    Check("states.resolution_spacing", "states", "eta completeness under refinement", 1e-3, _resolution_spacing),
    Check("states.orthogonality_eta", "states", "eta delta orthogonality", 1e-2, _orthogonality("eta", 0j)),
    Check("states.orthogonality_xi", "states", "xi delta orthogonality", 1e-2, _orthogonality("xi", 0.3j)),
    Check("weyl.delta_hermitian", "weyl", "Wigner operator", 1e-10, _delta_hermitian),
    Check("weyl.trace_constancy", "weyl", "Wigner operator trace", 1e-2, _trace_constancy),
    Check("weyl.quantize_identity", "weyl", "Weyl quantization", 1e-3, _quantize_identity),
    Check("weyl.quantize_round_trip", "weyl", "Weyl quantization", 1e-3, _quantize_round_trip),
    Check("weyl.round_trip_refinement", "weyl", "Weyl quantization under refinement", 1e-3, _round_trip_refinement),
    Check("weyl.linear_symbols", "weyl", "Weyl dequantization", 1e-3, _linear_symbols),
    Check("weyl.coherent_oracle", "weyl", "coherent-state Weyl expansion", 1e-2, _coherent_oracle),
    Check("weyl.wigner_to_delta", "weyl", "Wigner to delta transform", 1e-2, _wigner_to_delta),
    Check("weyl.delta_to_wigner", "weyl", "delta to Wigner transform", 1e-2, _delta_to_wigner),
    Check("weyl.function_correspondence", "weyl", "operator-function correspondence", 1e-2, _function_correspondence),
    Check("weyl.mutual_refinement", "weyl", "mutual transforms under refinement", 1e-2, _mutual_refinement),
    Check("xform.real_round_trip", "xform", "real transform pair", 1e-4, _real_round_trip),
    Check("xform.real_parseval", "xform", "real transform Parseval", 1e-6, _real_parseval),
    Check("xform.complex_round_trip", "xform", "complex transform pair", 1e-4, _complex_round_trip),
    Check("xform.complex_parseval", "xform", "complex transform Parseval", 1e-4, _complex_parseval),
    Check("xform.complex_refinement", "xform", "complex transform pair under refinement", 1e-4, _complex_refinement),
    Check("xform.separable_vs_direct", "xform", "separable evaluation", 1e-10, _separable_vs_direct),
    Check("xform.kernel_normalization", "xform", "kernel normalization", 1e-2, _kernel_normalization),
    Check("xform.kernel_extent", "xform", "kernel normalization under growing extent", 1e-2, _kernel_extent),
    Check("xform.gaussian_integral", "xform", "complex Gaussian integral", 1e-8, _gaussian_integral),
    Check("ordering.hermite_recurrence", "ordering", "two-variable Hermite recurrence", 1e-9, _hermite_recurrence),
    Check("ordering.hermite_integral", "ordering", "Hermite integral formula", 1e-3, _hermite_integral),
) + tuple(
    Check(f"ordering.report_{n}_{m}", "ordering", "Weyl ordering conversion", 1e-2, _ordering(n, m))
    for n, m in ORDERING_PAIRS
)

CATALOG_SIZE = len(CATALOG)


def _route_warning(fallback, message, category, filename, lineno, file=None, line=None):
    captured = getattr(_local, "captured", None)
    if captured is not None and issubclass(category, AccuracyWarning):
        captured.append(str(message))
        return
    fallback(message, category, filename, lineno, file, line)


def _status(check, outcome, captured):
    if outcome.value is None or not math.isfinite(outcome.value) or outcome.value > check.tolerance:
        return "fail"
    if captured:
        return "accuracy-warning"
    if outcome.mismatches:
        return "paper-mismatch-flag"
    return "pass"


def _execute(check, ctx):
    _local.captured = []
    start = time.perf_counter()
    try:
        outcome = check.measure(ctx)
        if not isinstance(outcome, Measurement):
            outcome = Measurement(float(outcome))
        outcome.value = float(outcome.value)
        status = _status(check, outcome, _local.captured)
        message = "; ".join(_local.captured)
    except Exception as e:
        logger.error(f"{check.name} raised {type(e).__name__}: {e}")
        outcome = Measurement(None)
        status = "fail"
        message = f"{type(e).__name__}: {e}"
    finally:
        captured, _local.captured = _local.captured, None
    runtime = time.perf_counter() - start

    if outcome.value is not None:
        logger.info(f"{check.name}: {outcome.value:.3e} (tolerance {check.tolerance:.0e}) -> {status}")
    if captured and status != "fail":
        logger.warning(f"{check.name}: {len(captured)} accuracy warning(s)")
    return CheckRecord(
        name=check.name,
        suite=check.suite,
        tag=check.tag,
        measured=outcome.value,
        tolerance=check.tolerance,
        status=status,
        message=message,
        mismatches=outcome.mismatches,
        details=outcome.details,
        runtime=runtime,
    )


def select_checks(suites):
    return [check for suite in suites for check in CATALOG if check.suite == suite]


def run_suite(config, write=True):
    """Run the selected suites and return (and by default write) the report.

    Args:
        config (SuiteConfig): Validated configuration.
        write (bool): Write the JSON report and the optional CSV / Markdown files.

    Returns:
        SuiteReport: Records in catalog order.
    """
    ctx = SuiteContext(config)
    jobs = config.jobs
    logger.info("=" * 80)
    logger.info(f"Running suites {', '.join(config.suites)} with {jobs} worker(s)")
    logger.info("=" * 80)

    records = []
    with warnings.catch_warnings():
        warnings.simplefilter("always", AccuracyWarning)
        warnings.showwarning = partial(_route_warning, warnings.showwarning)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for suite in config.suites:
                checks = select_checks([suite])
                logger.info(f"Suite {suite}: {len(checks)} check(s)")
                futures = [pool.submit(_execute, check, ctx) for check in checks]
                records.extend(future.result() for future in futures)

    report = SuiteReport(records=records, parameters=config.to_dict())
    counts = report.counts()
    logger.info("=" * 80)
    logger.info(
        f"{counts['total']} checks: "
        + ", ".join(f"{count} {status}" for status, count in counts["by_status"].items())
    )
    logger.info("=" * 80)
    if write:
        report.write(config.output, config.csv, config.markdown)
    return report
