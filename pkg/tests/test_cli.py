"""Command-line workflow, exit codes, and serialized outputs."""
from __future__ import annotations

import json
import shutil

import pytest

from hazviz.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def workspace(tmp_path, fixture_dir):
    shutil.copy(fixture_dir / "sir_fixture.csv", tmp_path / "sir.csv")
    shutil.copy(
        fixture_dir / "expert_ratings_synthetic.jsonl", tmp_path / "ratings.jsonl"
    )
    return tmp_path


def test_full_pipeline_end_to_end(workspace, capsys):
    store = workspace / "records.jsonl"
    run_dir = workspace / "run"
    embeddings = workspace / "vectors.jsonl"

    code, out, err = run_cli(
        capsys, "ingest", "--csv", str(workspace / "sir.csv"), "--out", str(store)
    )
    assert code == 0
    assert "ingested 3 records (0 row errors)" in out
    assert "Struck-By" in out

    code, out, _ = run_cli(
        capsys,
        "sample",
        "--records", str(store),
        "--n", "2",
        "--seed", "7",
        "--out", str(workspace / "sampled.jsonl"),
    )
    assert code == 0
    assert "sampled 2 of 3 records" in out

    code, out, err = run_cli(
        capsys,
        "generate",
        "--records", str(store),
        "--out-dir", str(run_dir),
        "--iterations", "2",
    )
    assert code == 0
    assert "30 images, 0 failures" in out
    manifest_path = run_dir / "manifest.json"
    assert manifest_path.exists()

    code, out, _ = run_cli(
        capsys,
        "embed",
        "--records", str(store),
        "--manifest", str(manifest_path),
        "--out", str(embeddings),
    )
    assert code == 0
    # Gallery = 6 single-pass frames + 6 monitoring frames.
    assert "embedded 3 queries and 12 gallery frames" in out

    retrieval_json = workspace / "retrieval.json"
    code, out, _ = run_cli(
        capsys,
        "eval-retrieval",
        "--embeddings", str(embeddings),
        "--manifest", str(manifest_path),
        "--out", str(retrieval_json),
    )
    assert code == 0
    assert "MRR" in out
    assert "cohens_d" in out
    payload = json.loads(retrieval_json.read_text(encoding="utf-8"))
    assert set(payload) == {"single_pass", "temporal", "overall"}
    for group in payload.values():
        assert {"study", "retrieval"} <= set(group)
        assert group["retrieval"]["mrr"] > 0

    expert_json = workspace / "expert.json"
    code, out, _ = run_cli(
        capsys,
        "eval-expert",
        "--ratings", str(workspace / "ratings.jsonl"),
        "--out", str(expert_json),
    )
    assert code == 0
    assert "acceptability=81.1" in out
    assert "acceptability=60.9" in out
    payload = json.loads(expert_json.read_text(encoding="utf-8"))
    assert payload["schema_version"] == 1
    assert set(payload["reports"]) == {"single_pass", "temporal"}

    code, out, _ = run_cli(capsys, "cost", "--manifest", str(manifest_path))
    assert code == 0
    assert "total: $" in out
    assert "images:" in out

    report_path = workspace / "report.md"
    code, out, _ = run_cli(
        capsys,
        "report",
        "--manifest", str(manifest_path),
        "--records", str(store),
        "--ratings", str(workspace / "ratings.jsonl"),
        "--embeddings", str(embeddings),
        "--out", str(report_path),
    )
    assert code == 0
    text = report_path.read_text(encoding="utf-8")
    assert text.startswith("# Run run-")
    assert "## Event keyword categories" in text
    assert "## Retrieval" in text
    assert "## Expert review" in text

    code, out, _ = run_cli(capsys, "templates-verify")
    assert code == 0
    assert "verified 10 templates" in out


def test_ingest_reports_row_errors_on_stderr(tmp_path, fixture_dir, capsys):
    code, out, err = run_cli(
        capsys,
        "ingest",
        "--csv", str(fixture_dir / "malformed.csv"),
        "--out", str(tmp_path / "store.jsonl"),
    )
    assert code == 0
    assert "ingested 4 records (1 row errors)" in out
    assert "row error at line 5" in err


def test_ingest_naics_filter(workspace, capsys, fixture_dir):
    code, out, _ = run_cli(
        capsys,
        "ingest",
        "--csv", str(fixture_dir / "mixed_naics.csv"),
        "--out", str(workspace / "filtered.jsonl"),
        "--naics", "237310",
    )
    assert code == 0
    assert "ingested 6 records" in out


def test_toolkit_errors_exit_one(workspace, capsys):
    code, _, err = run_cli(
        capsys,
        "ingest",
        "--csv", str(workspace / "missing.csv"),
        "--out", str(workspace / "store.jsonl"),
    )
    # A missing input surfaces as a usage-level failure, not a traceback.
    assert code == 1 or code == 2 or "missing.csv" in err


def test_unknown_backend_exits_one(workspace, capsys):
    store = workspace / "records.jsonl"
    run_cli(capsys, "ingest", "--csv", str(workspace / "sir.csv"), "--out", str(store))
    code, _, err = run_cli(
        capsys,
        "generate",
        "--records", str(store),
        "--out-dir", str(workspace / "run"),
        "--text-backend", "gpt-x",
    )
    assert code == 1
    assert "unknown text backend" in err


def test_bad_sample_size_exits_one(workspace, capsys):
    store = workspace / "records.jsonl"
    run_cli(capsys, "ingest", "--csv", str(workspace / "sir.csv"), "--out", str(store))
    code, _, err = run_cli(
        capsys,
        "sample",
        "--records", str(store),
        "--n", "99",
        "--seed", "1",
        "--out", str(workspace / "out.jsonl"),
    )
    assert code == 1
    assert "exceeds" in err


def test_usage_errors_exit_two(capsys):
    assert run_cli(capsys, "no-such-command")[0] == 2
    assert run_cli(capsys, "ingest")[0] == 2  # missing required flags
    assert run_cli(capsys)[0] == 2  # no subcommand


def test_invalid_ratings_exit_one(workspace, capsys):
    bad = workspace / "bad_ratings.jsonl"
    bad.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "review_id": "rv-1",
                "reviewer_id": "rev-1",
                "record_id": "sir-000001",
                "mode": "single_pass",
                "checklist": {},
                "educational_tier": ["fully_acceptable", "fully_acceptable"],
                "fidelity": [4, 4],
                "alignment": [4, 4],
            }
        )
        + "\n",
        encoding="utf-8",
    )
    code, _, err = run_cli(capsys, "eval-expert", "--ratings", str(bad))
    assert code == 1
    assert "rv-1" in err


def test_version_flag(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0
    assert out.startswith("hazviz ")
