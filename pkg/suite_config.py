"""
Verification Suite Configuration

Parses the `key = value` configuration text of the verification harness. Blank
lines and `#` comments are ignored; each value is typed with yaml.safe_load, so
`12`, `4.5`, `auto` and `[weyl, xform]` all read naturally.

Example:
    cutoff = 12
    outer_points = 25   # odd, at least 5
    suites = [weyl, ordering]
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace

import yaml

from phase_errors import ConfigError, InvalidArgumentError
from xform import RULES, ComplexGrid

logger = logging.getLogger(__name__)

# Constants
SUITE_ORDER = ("fock", "states", "weyl", "xform", "ordering")


@dataclass(frozen=True)
class SuiteConfig:
    """Validated harness parameters.

    Grid sizes are given as (points, extent) pairs flattened into separate keys
    so that every field maps to exactly one config line.
    """

    cutoff: int = 10
    scalar_cutoff: int = 30
    resolution_cutoff: int = 12
    oracle_cutoff: int = 14
    inner_points: int = 61
    inner_extent: float = 4.5
    inner_rule: str = "hermite"
    outer_points: int = 25
    outer_extent: float = 6.0
    suites: tuple = field(default=SUITE_ORDER)
    output: str = "verify-report.json"
    csv: str = None
    markdown: str = None
    parallelism: object = "auto"
    shell_margin: int = 14
    trace_margin: int = 4

    def __post_init__(self):
        object.__setattr__(self, "suites", _normalize_suites(self.suites))
        _validate(self)

    @property
    def jobs(self):
        """Worker count; auto means one per CPU."""
        if self.parallelism == "auto":
            return os.cpu_count() or 1
        return self.parallelism

    def inner_grid(self):
        return ComplexGrid(points=self.inner_points, extent=self.inner_extent, rule=self.inner_rule)

    def outer_grid(self):
        return ComplexGrid(points=self.outer_points, extent=self.outer_extent, axes=4)

    def with_overrides(self, **overrides):
        """Copy with the non-None overrides applied and re-validated."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        try:
            return replace(self, **changes)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    def to_dict(self):
        values = asdict(self)
        values["suites"] = list(self.suites)
        return values


def known_keys():
    return [f.name for f in fields(SuiteConfig)]


def _normalize_suites(value):
    if value is None or value == "all":
        return SUITE_ORDER
    if isinstance(value, str):
        value = [part.strip() for part in value.split(",") if part.strip()]
    names = list(value)
    if "all" in names:
        return SUITE_ORDER
    unknown = [name for name in names if name not in SUITE_ORDER]
    if unknown:
        raise ConfigError(f"suites: unknown suite(s) {unknown}; known suites are {list(SUITE_ORDER)}")
    if not names:
        raise ConfigError("suites: at least one suite must be selected")
    # dependency order, duplicates removed
    return tuple(name for name in SUITE_ORDER if name in names)


def _require_int(config, name, minimum):
    value = getattr(config, name)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name}: expected an integer >= {minimum}, got {value!r}")


def _validate(config):
    for name in ("cutoff", "scalar_cutoff", "resolution_cutoff", "oracle_cutoff"):
        _require_int(config, name, 1)
    _require_int(config, "shell_margin", 0)
    _require_int(config, "trace_margin", 0)

    if config.trace_margin >= config.cutoff:
        raise ConfigError(f"trace_margin: must be below cutoff {config.cutoff}")
    if config.shell_margin >= config.scalar_cutoff:
        raise ConfigError(f"shell_margin: must be below scalar_cutoff {config.scalar_cutoff}")
    if config.inner_rule not in RULES:
        raise ConfigError(f"inner_rule: expected one of {RULES}, got {config.inner_rule!r}")

    for prefix in ("inner", "outer"):
        try:
            config.inner_grid() if prefix == "inner" else config.outer_grid()
        except (InvalidArgumentError, TypeError) as e:
            raise ConfigError(f"{prefix}_points / {prefix}_extent: {e}") from e

    if config.parallelism != "auto":
        _require_int(config, "parallelism", 1)
    for name in ("output", "csv", "markdown"):
        value = getattr(config, name)
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{name}: expected a path, got {value!r}")
    if not config.output:
        raise ConfigError("output: a report path is required")


def parse_config(text):
    """Parse configuration text into a SuiteConfig with defaults filled in.

    Args:
        text (str): `key = value` lines; `#` starts a comment.

    Returns:
        SuiteConfig: Validated configuration.

    Raises:
        ConfigError: On malformed lines, unknown keys, or invalid values.
    """
    keys = known_keys()
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected `key = value`, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in keys:
            raise ConfigError(f"line {number}: unknown key {key!r}; known keys are {', '.join(keys)}")
        if key in values:
            logger.warning(f"line {number}: {key} set more than once, keeping the last value")
        try:
            values[key] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise ConfigError(f"line {number}: cannot parse value of {key}: {e}") from e

    for name in ("inner_extent", "outer_extent"):
        if isinstance(values.get(name), int):
            values[name] = float(values[name])
    try:
        config = SuiteConfig(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    logger.debug(f"Parsed configuration: {config.to_dict()}")
    return config


def load_config(path):
    """Read and parse a configuration file; a missing path yields the defaults."""
    if path is None:
        return SuiteConfig()
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    logger.info(f"Loaded configuration from {path}")
    return parse_config(text)
