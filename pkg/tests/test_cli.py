"""CLI behavior: transcripts, output modes, exit codes, config precedence."""

import json

import pytest
from click.testing import CliRunner

from goekit.cli import CliConfig, main

from conftest import SAMPLE_CVES

EXAMPLE1_GOE = "GOE:1.0/R:AT:H,TAI:H,G:N/W:AT:N,TAI:N,G:N/D:AT:N,TAI:N,G:N/E:SKIP"
EXAMPLE2_GOE = "GOE:1.0/R:AT:H,TAI:H,G:H/W:SKIP/D:SKIP/E:SKIP"
NOW = "2026-01-01T00:00:00+00:00"


@pytest.fixture
def runner():
    return CliRunner()


def run_assess(runner, tmp_path, cve_id, transcript, analyst="alice", store="store"):
    answers = tmp_path / "answers.txt"
    answers.write_text(transcript)
    return runner.invoke(
        main,
        [
            "--store", str(tmp_path / store), "--offline",
            "assess", cve_id,
            "--answers", str(answers),
            "--fixture", str(SAMPLE_CVES),
            "--analyst", analyst,
            "--now", NOW,
        ],
    )


class TestAssess:
    def test_worked_example_1(self, runner, tmp_path):
        result = run_assess(runner, tmp_path, "CVE-2025-1156", "H H N\nN\nN\nskip\n")
        assert result.exit_code == 0, result.output
        assert EXAMPLE1_GOE in result.output
        assert "Overall:  0" in result.output
        assert "CVSS 3.1: 7.3 (High)" in result.output
        assert "CVSS 4.0: 6.9 (Medium)" in result.output

    def test_worked_example_2(self, runner, tmp_path):
        result = run_assess(runner, tmp_path, "CVE-2024-30384", "H H H skip skip skip")
        assert result.exit_code == 0, result.output
        assert EXAMPLE2_GOE in result.output
        assert "Overall:  3" in result.output
        assert "CVSS 3.1: 5.5 (Medium)" in result.output
        assert "CVSS 4.0: 6.8 (Medium)" in result.output

    def test_all_skipped_warns_undefined(self, runner, tmp_path):
        result = run_assess(runner, tmp_path, "CVE-2025-1156", "skip skip skip skip")
        assert result.exit_code == 0
        assert "Undefined" in result.output
        assert "warning" in result.stderr

    def test_byte_identical_reruns(self, runner, tmp_path):
        for store in ("s1", "s2"):
            result = run_assess(
                runner, tmp_path, "CVE-2025-1156", "H H N N N skip", store=store
            )
            assert result.exit_code == 0
        left = (tmp_path / "s1" / "CVE-2025-1156" / "000001.json").read_bytes()
        right = (tmp_path / "s2" / "CVE-2025-1156" / "000001.json").read_bytes()
        assert left == right

    def test_invalid_cve_id_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["--store", str(tmp_path), "assess", "nope", "--now", NOW]
        )
        assert result.exit_code == 2

    def test_unresolvable_cve_is_operational_error(self, runner, tmp_path):
        answers = tmp_path / "a.txt"
        answers.write_text("skip skip skip skip")
        result = runner.invoke(
            main,
            [
                "--store", str(tmp_path / "s"), "--offline",
                "assess", "CVE-1999-0001", "--answers", str(answers),
            ],
        )
        assert result.exit_code == 1

    def test_short_transcript_is_usage_error(self, runner, tmp_path):
        result = run_assess(runner, tmp_path, "CVE-2025-1156", "H H")
        assert result.exit_code == 2

    def test_json_output(self, runner, tmp_path):
        answers = tmp_path / "a.txt"
        answers.write_text("H H N N N skip")
        result = runner.invoke(
            main,
            [
                "--store", str(tmp_path / "s"), "--offline", "--format", "json",
                "assess", "CVE-2025-1156",
                "--answers", str(answers), "--fixture", str(SAMPLE_CVES),
                "--now", NOW,
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["schema_version"] == 1
        assert payload["record"]["overall"] == 0
        assert payload["record"]["goe_string"] == EXAMPLE1_GOE


class TestScore:
    def test_example1_with_v31_vector(self, runner):
        result = runner.invoke(
            main, ["score", EXAMPLE1_GOE, "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L"]
        )
        assert result.exit_code == 0
        assert "Overall:  0" in result.output
        assert "7.3 (High)" in result.output

    def test_example2_with_v40_vector(self, runner):
        result = runner.invoke(
            main,
            [
                "--format", "json", "score", EXAMPLE2_GOE,
                "CVSS:4.0/AV:L/AC:L/AT:N/PR:L/UI:N/VC:N/VI:N/VA:H/SC:N/SI:N/SA:L",
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["goe"]["overall"] == 3
        assert payload["cvss"][0]["score"] == 6.8
        assert payload["cvss"][0]["severity"] == "Medium"

    def test_malformed_goe_string_exit_2_with_offset(self, runner):
        result = runner.invoke(main, ["score", "GOE:1.0/R:junk"])
        assert result.exit_code == 2
        assert "offset" in result.output

    def test_malformed_cvss_exit_2(self, runner):
        result = runner.invoke(main, ["score", EXAMPLE2_GOE, "CVSS:3.1/AV:N"])
        assert result.exit_code == 2


class TestRank:
    def _populate(self, runner, tmp_path):
        run_assess(runner, tmp_path, "CVE-2025-1156", "H H N N N skip")
        run_assess(runner, tmp_path, "CVE-2024-30384", "H H H skip skip skip")

    def test_rank_from_store_order(self, runner, tmp_path):
        self._populate(runner, tmp_path)
        result = runner.invoke(
            main, ["--store", str(tmp_path / "store"), "--format", "json", "rank"]
        )
        assert result.exit_code == 0
        ranking = json.loads(result.output)["ranking"]
        assert [e["cve_id"] for e in ranking] == ["CVE-2025-1156", "CVE-2024-30384"]

    def test_empty_store(self, runner, tmp_path):
        result = runner.invoke(main, ["--store", str(tmp_path / "empty"), "rank"])
        assert result.exit_code == 0

    def test_corrupted_record_warning(self, runner, tmp_path):
        self._populate(runner, tmp_path)
        (tmp_path / "store" / "CVE-2025-1156" / "000002.json").write_text("{bad")
        result = runner.invoke(
            main, ["--store", str(tmp_path / "store"), "--format", "json", "rank"]
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["warnings"] == 1


class TestFetch:
    def test_fixture_mode_shows_description(self, runner, tmp_path):
        result = runner.invoke(
            main,
            [
                "--store", str(tmp_path), "--offline",
                "fetch", "CVE-2025-1156", "--fixture", str(SAMPLE_CVES),
            ],
        )
        assert result.exit_code == 0
        assert "Pix Software Vivaz" in result.output

    def test_cached_marker(self, runner, tmp_path):
        args = ["--store", str(tmp_path), "--offline", "fetch", "CVE-2025-1156"]
        runner.invoke(main, args + ["--fixture", str(SAMPLE_CVES)])
        result = runner.invoke(main, args)
        assert result.exit_code == 0
        assert "(cached)" in result.output

    def test_invalid_id_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["--store", str(tmp_path), "fetch", "garbage"])
        assert result.exit_code == 2


class TestConfigPrecedence:
    def test_env_beats_flag_beats_file(self, tmp_path):
        config_file = tmp_path / "goe.conf"
        config_file.write_text("format = human\nstore = from-file\n")
        resolved = CliConfig.resolve(
            config_file,
            {"format": "human", "store": "from-flag", "offline": None},
            environ={"GOE_FORMAT": "json"},
        )
        assert resolved.output_format == "json"  # env wins
        assert str(resolved.store) == "from-flag"  # flag beats file

    def test_file_used_when_nothing_else_set(self, tmp_path):
        config_file = tmp_path / "goe.conf"
        config_file.write_text("store = from-file  # comment\noffline = true\n")
        resolved = CliConfig.resolve(config_file, {}, environ={})
        assert str(resolved.store) == "from-file"
        assert resolved.offline is True

    def test_defaults(self):
        resolved = CliConfig.resolve(None, {}, environ={})
        assert resolved.output_format == "human"
        assert resolved.nvd_ttl.total_seconds() == 24 * 3600
        assert resolved.offline is False
