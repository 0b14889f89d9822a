"""Shared fixtures for the test suite.

The fixture corpus lives in tests/fixtures/: a small severe-injury CSV whose
first row is the worked reference incident, the canned stage outputs for that
record, golden prompt renders, and a synthetic expert-ratings file.
"""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from hazviz.backends import DigestImageBackend, ScriptedTextBackend
from hazviz.generation import BackendConfig
from hazviz.ingest import IncidentRecord, parse_sir_csv
from hazviz.prompts import SceneDescriptionSet, parse_warning_spec

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def sir_records() -> list[IncidentRecord]:
    """The three-record highway-construction fixture corpus."""
    result = parse_sir_csv(FIXTURE_DIR / "sir_fixture.csv")
    assert not result.row_errors
    return list(result.records)


@pytest.fixture(scope="session")
def reference_record(sir_records) -> IncidentRecord:
    """The bridge-worker struck-by incident the worked example is built on."""
    return sir_records[0]


@pytest.fixture(scope="session")
def worked_example() -> dict:
    """Canned stage outputs for the reference record, plus expected parses."""
    return json.loads(
        (FIXTURE_DIR / "worked_example_stages.json").read_text(encoding="utf-8")
    )


@pytest.fixture()
def reference_descriptions(worked_example) -> dict[str, SceneDescriptionSet]:
    """Complete description sets for the reference record, both modes."""
    single = SceneDescriptionSet(
        mode="single_pass", r_sp="\n\n".join(worked_example["r_sp_layers"])
    )
    temporal = SceneDescriptionSet(
        mode="temporal",
        r_t1=worked_example["r_t1"],
        r_t2=worked_example["r_t2"],
        r_t3=worked_example["r_t3"],
        r_t4=worked_example["r_t4"],
        warning=parse_warning_spec(worked_example["r_t3"]),
    )
    return {"single_pass": single, "temporal": temporal}


@pytest.fixture()
def scripted_backends(worked_example):
    """Deterministic text/image backends, reference record fully scripted."""
    canned = {
        ("sir-000001", "SP"): "\n\n".join(worked_example["r_sp_layers"]),
        ("sir-000001", "T1"): worked_example["r_t1"],
        ("sir-000001", "T2"): worked_example["r_t2"],
        ("sir-000001", "T3"): worked_example["r_t3"],
        ("sir-000001", "T4"): worked_example["r_t4"],
    }
    return ScriptedTextBackend(canned), DigestImageBackend()


@pytest.fixture()
def fast_config() -> BackendConfig:
    """No retry delay so failure-path tests stay instant."""
    return BackendConfig(max_retries=1, retry_base_delay=0.0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance test at the end of a run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                marker = "PASS" if status == "passed" else "FAIL"
                lines.append(f"[{marker}] {name}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
