#!/usr/bin/env python3
"""
Tests for the verification harness: configuration parsing, the check runner,
report serialization and the command line entry point.
"""

import csv
import json
import warnings

import pytest

import suite_catalog
from phase_errors import AccuracyWarning, ConfigError
from suite_catalog import CATALOG, CATALOG_SIZE, Check, Measurement, run_suite, select_checks
from suite_config import SUITE_ORDER, SuiteConfig, known_keys, parse_config
from verify import main


def test_empty_text_gives_defaults():
    config = parse_config("")
    assert config == SuiteConfig()
    assert config.cutoff == 10
    assert config.scalar_cutoff == 30
    assert config.suites == SUITE_ORDER
    assert config.parallelism == "auto"
    assert config.jobs >= 1
    assert (config.inner_points, config.outer_points, config.outer_extent) == (61, 25, 6.0)


def test_single_key_overrides_default():
    config = parse_config("# comment line\ncutoff = 12   # trailing comment\n\n")
    assert config.cutoff == 12
    assert config.outer_points == SuiteConfig().outer_points


def test_values_are_typed():
    config = parse_config(
        "inner_extent = 5\nsuites = [ordering, weyl]\nparallelism = 3\ncsv = summary.csv\nmarkdown =\n"
    )
    assert config.inner_extent == 5.0
    assert config.suites == ("weyl", "ordering")
    assert config.jobs == 3
    assert config.csv == "summary.csv"
    assert config.markdown is None


@pytest.mark.parametrize("text,field", [
    ("outer_points = 4", "outer_points"),
    ("cutoff = 0", "cutoff"),
    ("inner_rule = simpson", "inner_rule"),
    ("suites = [weyl, optics]", "suites"),
    ("parallelism = none", "parallelism"),
    ("trace_margin = 10", "trace_margin"),
])
def test_invalid_values_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(text)


def test_unknown_key_lists_known_keys():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("cutof = 12")
    for key in known_keys():
        assert key in str(excinfo.value)


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("cutoff = 8\njust words\n")


def test_catalog_is_complete_and_unique():
    names = [check.name for check in CATALOG]
    assert len(names) == len(set(names)) == CATALOG_SIZE
    assert {check.suite for check in CATALOG} == set(SUITE_ORDER)
    assert len(select_checks(["ordering"])) == 12
    assert CATALOG_SIZE == 43
    assert [check.suite for check in select_checks(SUITE_ORDER)] == sorted(
        (check.suite for check in CATALOG), key=SUITE_ORDER.index
    )


def _warns(ctx):
    warnings.warn("edge not resolved", AccuracyWarning)
    return 1e-4


def _raises(ctx):
    raise RuntimeError("quadrature diverged")


FAKE_CATALOG = (
    Check("fake.pass", "fock", "topic 1", 1e-3, lambda ctx: 1e-5),
    Check("fake.too_large", "fock", "topic 2", 1e-3, lambda ctx: 0.5),
    Check("fake.raises", "fock", "topic 3", 1e-3, _raises),
    Check("fake.warns", "fock", "topic 4", 1e-3, _warns),
    Check("fake.flagged", "fock", "topic 5", 1e-3, lambda ctx: Measurement(1e-4, mismatches=2)),
)


@pytest.mark.parametrize("jobs", [1, 4])
def test_statuses_and_batch_continues(monkeypatch, jobs):
    monkeypatch.setattr(suite_catalog, "CATALOG", FAKE_CATALOG)
    report = run_suite(SuiteConfig(suites=("fock",), parallelism=jobs), write=False)
    statuses = {record.name: record.status for record in report.records}
    assert statuses == {
        "fake.pass": "pass",
        "fake.too_large": "fail",
        "fake.raises": "fail",
        "fake.warns": "accuracy-warning",
        "fake.flagged": "paper-mismatch-flag",
    }
    assert [record.name for record in report.records] == [check.name for check in FAKE_CATALOG]
    assert "quadrature diverged" in report.records[2].message
    assert report.records[2].measured is None
    assert report.failed


def test_reports_are_deterministic(tmp_path):
    config = SuiteConfig(suites=("fock",), parallelism=2, output=str(tmp_path / "report.json"))
    first = run_suite(config, write=False).to_json(include_runtime=False)
    second = run_suite(config, write=False).to_json(include_runtime=False)
    assert first == second
    body = json.loads(first)
    assert list(body) == ["environment", "summary", "records"]
    assert body["summary"]["total"] == 2
    assert "runtime_seconds" not in body["records"][0]


def test_markdown_lists_mismatches_first(monkeypatch):
    monkeypatch.setattr(suite_catalog, "CATALOG", FAKE_CATALOG)
    report = run_suite(SuiteConfig(suites=("fock",), parallelism=1), write=False)
    text = report.render_markdown()
    assert text.index("Printed-formula mismatches") < text.index("Failures") < text.index("All checks")
    assert "fake.flagged" in text


def _warns_with_mismatches(ctx):
    warnings.warn("edge not resolved", AccuracyWarning)
    return Measurement(2e-4, mismatches=1)


def test_markdown_lists_mismatches_of_any_status(monkeypatch):
    catalog = FAKE_CATALOG + (Check("fake.warns_and_flags", "fock", "topic 6", 1e-3, _warns_with_mismatches),)
    monkeypatch.setattr(suite_catalog, "CATALOG", catalog)
    report = run_suite(SuiteConfig(suites=("fock",), parallelism=1), write=False)
    assert report.records[-1].status == "accuracy-warning"
    text = report.render_markdown()
    section = text[text.index("Printed-formula mismatches"):text.index("All checks")]
    assert "fake.warns_and_flags" in section
    assert "fake.warns " not in section


def test_refinement_reports_last_error_and_trend():
    outcome = suite_catalog._refinement([1, 2, 3], lambda step: 10.0 ** -step)
    assert outcome.value == pytest.approx(1e-3)
    assert outcome.details["monotone"]
    assert outcome.details["ratios"] == pytest.approx([0.1, 0.1])
    assert outcome.details["steps"] == ["1", "2", "3"]


def test_refinement_warns_when_error_grows():
    errors = {"a": 2.78e-2, "b": 8.8e-2, "c": 1.38e-3}
    with pytest.warns(AccuracyWarning, match="does not decrease"):
        outcome = suite_catalog._refinement(list(errors), errors.get)
    assert outcome.value == pytest.approx(1.38e-3)
    assert not outcome.details["monotone"]


def _study_with_coarse_warning(ctx):
    def run(step):
        if step < 3:
            warnings.warn("coarse grid", AccuracyWarning)
        return 10.0 ** -step
    return suite_catalog._refinement([1, 2, 3], run)


def test_coarse_step_warnings_do_not_mark_the_check(monkeypatch):
    catalog = (Check("fake.study", "fock", "topic 7", 1e-2, _study_with_coarse_warning),)
    monkeypatch.setattr(suite_catalog, "CATALOG", catalog)
    record = run_suite(SuiteConfig(suites=("fock",), parallelism=1), write=False).records[0]
    assert record.status == "pass"
    assert record.details["coarse_warnings"] == 2


def test_cli_writes_all_outputs(tmp_path):
    out = tmp_path / "report.json"
    summary = tmp_path / "report.csv"
    overview = tmp_path / "report.md"
    status = main([
        "--suite", "fock", "--jobs", "2", "--out", str(out),
        "--csv", str(summary), "--markdown", str(overview), "--log-level", "WARNING",
    ])
    assert status == 0
    body = json.loads(out.read_text())
    assert [record["name"] for record in body["records"]] == [
        "fock.ladder_commutators", "fock.entangled_commutator"
    ]
    assert all(record["status"] == "pass" for record in body["records"])
    with open(summary, newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 2
    assert "# Verification report" in overview.read_text()


def test_cli_config_errors_exit_with_two(tmp_path):
    assert main(["--cutoff", "0", "--suite", "fock"]) == 2
    config_file = tmp_path / "bad.conf"
    config_file.write_text("cutof = 3\n")
    assert main(["--config", str(config_file)]) == 2
    assert main(["--config", str(tmp_path / "missing.conf")]) == 2


def test_cli_reports_failures_with_one(tmp_path, monkeypatch):
    monkeypatch.setattr(suite_catalog, "CATALOG", FAKE_CATALOG)
    assert main(["--suite", "fock", "--out", str(tmp_path / "r.json"), "--log-level", "ERROR"]) == 1
