"""CLI subcommands, exit codes, and output contracts."""

import json

import pytest
from click.testing import CliRunner

from sramda.cli import main
from sramda.store import FilterQuery, filter_records, load_seed_kb, save_kb, seed_kb_bytes
from sramda.model import DltLayer

from conftest import make_kb, make_record, load_script


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def seed_file(tmp_path):
    path = tmp_path / "seed.jsonl"
    path.write_bytes(seed_kb_bytes())
    return str(path)


class TestKbCommands:
    def test_validate_ok(self, runner, seed_file):
        result = runner.invoke(main, ["kb", "validate", seed_file])
        assert result.exit_code == 0
        assert "ok:" in result.output

    def test_validate_dangling_relation_names_slug(self, runner, tmp_path):
        kb_file = tmp_path / "broken.jsonl"
        header = json.dumps({"schema_version": 1, "provenance": "x"})
        record = json.dumps(make_record("Alpha Attack", relates=("ghost-attack",)).to_dict())
        kb_file.write_text(header + "\n" + record + "\n")
        result = runner.invoke(main, ["kb", "validate", str(kb_file)])
        assert result.exit_code == 1
        assert "ghost-attack" in result.output

    def test_stats_matches_compute_stats(self, runner, seed_file):
        result = runner.invoke(main, ["kb", "stats", seed_file])
        assert result.exit_code == 0
        kb = load_seed_kb()
        assert f"total: {len(kb)}" in result.output

    def test_query_equals_filter_records(self, runner, seed_file):
        result = runner.invoke(main, ["kb", "query", seed_file, "--layer", "consensus"])
        assert result.exit_code == 0
        expected = [
            r.id
            for r in filter_records(
                load_seed_kb(), FilterQuery(layers=frozenset({DltLayer.CONSENSUS}))
            )
        ]
        assert result.output.splitlines() == expected

    def test_query_bad_facet_exits_1(self, runner, seed_file):
        result = runner.invoke(main, ["kb", "query", seed_file, "--layer", "hardware"])
        assert result.exit_code == 1

    def test_add_record(self, runner, seed_file, tmp_path):
        record_file = tmp_path / "new.json"
        record_file.write_text(json.dumps(make_record("Fresh Attack").to_dict()))
        out_file = tmp_path / "grown.jsonl"
        result = runner.invoke(
            main, ["kb", "add", seed_file, "--record", str(record_file), "--out", str(out_file)]
        )
        assert result.exit_code == 0
        from sramda.store import load_kb

        assert "fresh-attack" in load_kb(out_file.read_bytes())

    def test_add_duplicate_exits_1(self, runner, seed_file, tmp_path):
        record_file = tmp_path / "dup.json"
        record_file.write_text(json.dumps(load_seed_kb().get("eclipse-attack").to_dict()))
        result = runner.invoke(main, ["kb", "add", seed_file, "--record", str(record_file)])
        assert result.exit_code == 1
        assert "duplicate" in result.output

    def test_usage_error_exits_2(self, runner):
        assert runner.invoke(main, ["kb", "validate"]).exit_code == 2
        assert runner.invoke(main, ["kb", "frobnicate"]).exit_code == 2


class TestAssessRun:
    def test_aratoo_names_exchange(self, runner, seed_file, tmp_path):
        script = tmp_path / "aratoo.session.json"
        script.write_text(json.dumps(load_script("aratoo")))
        report_file = tmp_path / "report.md"
        result = runner.invoke(
            main,
            ["assess", "run", str(script), "--kb", seed_file, "--out", str(report_file)],
        )
        assert result.exit_code == 0
        assert "exchange" in result.output  # summary line
        assert "Most-harmed asset(s): **exchange**" in report_file.read_text()

    def test_run_is_deterministic(self, runner, seed_file, tmp_path):
        script = tmp_path / "mobifi.session.json"
        script.write_text(json.dumps(load_script("mobifi")))
        outputs = []
        for name in ("one.md", "two.md"):
            out = tmp_path / name
            result = runner.invoke(
                main, ["assess", "run", str(script), "--kb", seed_file, "--out", str(out)]
            )
            assert result.exit_code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_export_session_round_trips(self, runner, seed_file, tmp_path):
        script = tmp_path / "secureseco.session.json"
        script.write_text(json.dumps(load_script("secureseco")))
        export_file = tmp_path / "session.json"
        result = runner.invoke(
            main,
            [
                "assess", "run", str(script),
                "--kb", seed_file,
                "--out", str(tmp_path / "r.md"),
                "--export-session", str(export_file),
            ],
        )
        assert result.exit_code == 0
        from sramda.reporting import import_session

        session = import_session(export_file.read_bytes())
        assert session.id == "secureseco"

    def test_broken_script_exits_1(self, runner, seed_file, tmp_path):
        script = tmp_path / "broken.session.json"
        doc = load_script("aratoo")
        doc["actions"] = doc["actions"][5:]  # starts without create_session
        script.write_text(json.dumps(doc))
        result = runner.invoke(main, ["assess", "run", str(script), "--kb", seed_file])
        assert result.exit_code == 1
