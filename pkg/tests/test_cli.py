"""CLI behavior: output determinism, formats, exit codes, env seeding."""

import re

import pytest

from cointoss.cli import (
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_UNKNOWN_STRATEGY,
    build_parser,
    main,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBias:
    def test_optimal_alice_report(self, capsys):
        code, out, _ = run_cli(capsys, "bias", "--strategy", "optimal-alice", "--target", "0")
        assert code == EXIT_OK
        assert "result.p_win_exact: 0.75" in out
        assert "result.analytic_bound: 0.75" in out
        assert "result.kitaev_reference: 0.207106781187" in out
        assert "config.seed: 0" in out

    def test_measure_and_pick_report(self, capsys):
        code, out, _ = run_cli(capsys, "bias", "--strategy", "measure-and-pick")
        assert code == EXIT_OK
        assert "result.party: B" in out
        assert "result.p_abort_exact: 0" in out

    def test_tabular_format(self, capsys):
        code, out, _ = run_cli(capsys, "bias", "--format", "tabular")
        assert code == EXIT_OK
        lines = out.splitlines()
        comments = [l for l in lines if l.startswith("#")]
        data = [l for l in lines if not l.startswith("#")]
        assert any("config.seed" in c for c in comments)
        assert len(data) == 2
        assert data[0].startswith("party,target,strategy,p_win_exact")


class TestExitCodes:
    def test_unknown_strategy_is_three(self, capsys):
        code, _, err = run_cli(capsys, "bias", "--strategy", "telepathy")
        assert code == EXIT_UNKNOWN_STRATEGY
        assert "unknown strategy" in err

    def test_trials_below_minimum_is_parse_error(self, capsys):
        code, _, err = run_cli(capsys, "honest", "--trials", "0")
        assert code == EXIT_PARSE
        assert "invalid configuration" in err

    def test_party_mismatch_is_parse_error(self, capsys):
        code, _, _ = run_cli(capsys, "cheat-alice", "--strategy", "measure-and-pick")
        assert code == EXIT_PARSE

    def test_argparse_errors_exit_two(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["bias", "--target", "7"])
        assert excinfo.value.code == 2

    def test_bad_coefficients_is_parse_error(self, capsys):
        code, _, _ = run_cli(capsys, "bias", "--strategy", "coefficients:0.6,0.8,0,0.1")
        assert code == EXIT_PARSE

    def test_help_documents_exit_codes(self):
        text = build_parser().format_help()
        for needle in ("exit codes", "2 ", "3 ", "4 "):
            assert needle in text
        assert str(EXIT_INVARIANT) in text


class TestDeterminism:
    def test_same_config_same_bytes(self, capsys):
        args = ("montecarlo", "--strategy", "optimal-alice", "--trials", "20000", "--seed", "5")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second

    def test_seed_changes_counts(self, capsys):
        _, first, _ = run_cli(capsys, "montecarlo", "--trials", "20000", "--seed", "5")
        _, second, _ = run_cli(capsys, "montecarlo", "--trials", "20000", "--seed", "6")
        assert first != second

    def test_probabilities_printed_with_twelve_digits(self, capsys):
        _, out, _ = run_cli(capsys, "montecarlo", "--trials", "30000", "--seed", "1")
        match = re.search(r"result\.win_frequency: (\S+)", out)
        assert match
        digits = match.group(1).replace(".", "").lstrip("0")
        assert len(digits) <= 12


class TestSeeding:
    def test_env_seed_used_as_default(self, capsys, monkeypatch):
        monkeypatch.setenv("COINTOSS_SEED", "77")
        _, out, _ = run_cli(capsys, "montecarlo", "--trials", "2000")
        assert "config.seed: 77" in out

    def test_explicit_seed_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("COINTOSS_SEED", "77")
        _, out, _ = run_cli(capsys, "montecarlo", "--trials", "2000", "--seed", "3")
        assert "config.seed: 3" in out

    def test_invalid_env_seed_is_parse_error(self, capsys, monkeypatch):
        monkeypatch.setenv("COINTOSS_SEED", "many")
        code, _, err = run_cli(capsys, "montecarlo", "--trials", "2000")
        assert code == EXIT_PARSE
        assert "COINTOSS_SEED" in err


class TestRunsAndFiles:
    def test_honest_runs_report(self, capsys):
        code, out, _ = run_cli(capsys, "honest", "--trials", "50000", "--seed", "2")
        assert code == EXIT_OK
        match = re.search(r"result\.heads_frequency: (\S+)", out)
        assert abs(float(match.group(1)) - 0.5) < 0.02
        assert "result.abort_frequency: 0\n" in out

    def test_out_writes_file(self, capsys, tmp_path):
        path = tmp_path / "report.txt"
        code, out, _ = run_cli(
            capsys, "bias", "--strategy", "optimal-alice", "--out", str(path)
        )
        assert code == EXIT_OK
        assert out == ""
        assert "result.p_win_exact: 0.75" in path.read_text()

    def test_transcript_emission(self, capsys, tmp_path):
        path = tmp_path / "run.jsonl"
        code, _, _ = run_cli(
            capsys,
            "cheat-alice",
            "--trials",
            "2000",
            "--seed",
            "8",
            "--transcript",
            str(path),
        )
        assert code == EXIT_OK
        lines = path.read_text().strip().splitlines()
        assert '"kind": "run_header"' in lines[0]
        assert '"kind": "outcome"' in lines[-1]

    def test_protocol_engine_flag(self, capsys):
        code, out, _ = run_cli(
            capsys, "cheat-bob", "--trials", "1500", "--seed", "4", "--engine", "protocol"
        )
        assert code == EXIT_OK
        assert "result.engine: protocol" in out
        assert "result.aborts: 0" in out


class TestOptimizeAndScan:
    def test_optimize_report(self, capsys):
        code, out, _ = run_cli(capsys, "optimize", "--grid-resolution", "100")
        assert code == EXIT_OK
        value = float(re.search(r"result\.value: (\S+)", out).group(1))
        assert abs(value - 0.75) < 1e-6
        a00 = float(re.search(r"result\.argmax\.a00: (\S+)", out).group(1))
        assert abs(a00 - 0.816496580928) < 1e-3

    def test_optimize_resolution_floor(self, capsys):
        code, _, _ = run_cli(capsys, "optimize", "--grid-resolution", "5")
        assert code == EXIT_PARSE

    def test_scan_emits_table(self, capsys):
        code, out, _ = run_cli(capsys, "scan", "--steps", "10")
        assert code == EXIT_OK
        assert "# analytic_bound: 0.75" in out
        assert "# kitaev_reference: 0.207106781187" in out
        data = [l for l in out.splitlines() if not l.startswith("#")]
        assert data[0] == "strategy,p_win,p_detect"
        assert len(data) == 11
        last = data[-1].split(",")
        assert abs(float(last[1]) - 0.75) < 1e-9
