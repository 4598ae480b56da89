"""
Verification Report

Check records and their serialization: a JSON document with a stable field
order, a CSV summary table, and a Markdown summary rendered with Jinja2 that
lists printed-formula mismatches before everything else.

Runtime fields are kept out of the deterministic body, so two runs with the same
configuration produce byte-identical output from `to_json(include_runtime=False)`.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

import numpy as np
from jinja2 import Template

logger = logging.getLogger(__name__)

# Constants
PACKAGE_NAME = "entangled-phase-space"
FALLBACK_VERSION = "0.1.0"
STATUSES = ("pass", "fail", "paper-mismatch-flag", "accuracy-warning")
CSV_FIELDS = ("name", "suite", "tag", "measured", "tolerance", "status", "mismatches", "message")

MARKDOWN_TEMPLATE = Template(
    """# Verification report

Version {{ environment.version }}, numpy {{ environment.numpy }}.
{{ counts.total }} checks: {% for status, count in counts.by_status.items() %}{{ count }} {{ status }}{% if not loop.last %}, {% endif %}{% endfor %}.
{% if flagged %}

## Printed-formula mismatches

| check | tag | coefficient mismatches | operator check |
|---|---|---|---|
{% for record in flagged %}| {{ record.name }} | {{ record.tag }} | {{ record.mismatches }} | {{ "%.3e"|format(record.measured) }} |
{% endfor %}
{% endif %}
{% if failures %}

## Failures

{% for record in failures %}- **{{ record.name }}** ({{ record.tag }}): {{ record.message or "measured %.3e above tolerance %.0e"|format(record.measured, record.tolerance) }}
{% endfor %}
{% endif %}

## All checks

| check | suite | tag | measured | tolerance | status |
|---|---|---|---|---|---|
{% for record in records %}| {{ record.name }} | {{ record.suite }} | {{ record.tag }} | {% if record.measured is not none %}{{ "%.3e"|format(record.measured) }}{% else %}-{% endif %} | {{ "%.0e"|format(record.tolerance) }} | {{ record.status }} |
{% endfor %}
""",
    trim_blocks=True,
)


def package_version():
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return FALLBACK_VERSION


@dataclass
class CheckRecord:
    """Outcome of one catalog check."""

    name: str
    suite: str
    tag: str
    measured: float
    tolerance: float
    status: str
    message: str = ""
    mismatches: int = 0
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_dict(self, include_runtime=True):
        measured = self.measured
        if measured is not None and not math.isfinite(measured):
            measured = str(measured)
        body = {
            "name": self.name,
            "suite": self.suite,
            "tag": self.tag,
            "measured": measured,
            "tolerance": self.tolerance,
            "status": self.status,
            "message": self.message,
            "mismatches": self.mismatches,
            "details": self.details,
        }
        if include_runtime:
            body["runtime_seconds"] = round(self.runtime, 3)
        return body


@dataclass
class SuiteReport:
    records: list
    parameters: dict
    environment: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.environment:
            self.environment = {
                "version": package_version(),
                "numpy": np.__version__,
            }

    def counts(self):
        by_status = {status: 0 for status in STATUSES}
        for record in self.records:
            by_status[record.status] += 1
        return {"total": len(self.records), "by_status": by_status}

    @property
    def failed(self):
        return any(record.status == "fail" for record in self.records)

    def flagged(self):
        return [record for record in self.records if record.mismatches > 0]

    def failures(self):
        return [record for record in self.records if record.status == "fail"]

    def to_dict(self, include_runtime=True):
        body = {
            "environment": {**self.environment, "parameters": self.parameters},
            "summary": self.counts(),
            "records": [record.to_dict(include_runtime) for record in self.records],
        }
        if include_runtime:
            body["runtime_seconds"] = round(sum(record.runtime for record in self.records), 3)
        return body

    def to_json(self, include_runtime=True):
        return json.dumps(self.to_dict(include_runtime), indent=2, default=_json_default) + "\n"

    def write_json(self, path):
        with open(path, "w") as handle:
            handle.write(self.to_json())
        logger.info(f"Wrote JSON report to {path}")

    def write_csv(self, path):
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS, extrasaction="ignore")
            writer.writeheader()
            for record in self.records:
                writer.writerow(record.to_dict(include_runtime=False))
        logger.info(f"Wrote CSV summary to {path}")

    def render_markdown(self):
        return MARKDOWN_TEMPLATE.render(
            environment=self.environment,
            counts=self.counts(),
            flagged=self.flagged(),
            failures=self.failures(),
            records=self.records,
        )

    def write_markdown(self, path):
        with open(path, "w") as handle:
            handle.write(self.render_markdown())
        logger.info(f"Wrote Markdown summary to {path}")

    def write(self, output, csv_path=None, markdown_path=None):
        self.write_json(output)
        if csv_path:
            self.write_csv(csv_path)
        if markdown_path:
            self.write_markdown(markdown_path)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
