"""End-to-end command-line checks driven through ``run(argv)``."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from anharmonic import cli
from anharmonic.model import BENCHMARK_PARAMS


def invoke(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestArgumentHandling:
    def test_no_subcommand_is_usage_error(self, capsys):
        code, _, err = invoke(capsys)
        assert code == 1
        assert "error" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = invoke(capsys, "solve", "--frobnicate")
        assert code == 1

    def test_bad_level_range(self, capsys):
        code, _, err = invoke(capsys, "solve", "--levels", "4..1")
        assert code == 1
        assert "level" in err

    def test_unparseable_level(self, capsys):
        code, _, _ = invoke(capsys, "solve", "--levels", "three")
        assert code == 1

    def test_bad_parameter_string(self, capsys):
        code, _, err = invoke(capsys, "solve", "--m", "1/0")
        assert code == 1

    def test_parse_levels_forms(self):
        assert cli._parse_levels("0..4") == (0, 4)
        assert cli._parse_levels("7") == (7, 7)


class TestSolve:
    def test_harmonic_level_one_json(self, capsys):
        code, out, _ = invoke(
            capsys, "solve", "--lambda", "0", "--m", "0.5", "--omega0-sq", "4",
            "--levels", "1..1", "--format", "json")
        assert code == 0
        obj = json.loads(out)
        assert obj["params"]["lambda"] == "0"
        (lv,) = obj["levels"]
        assert lv["n"] == 1 and lv["certified"] is True
        assert Fraction(lv["E_lo"]) < 3 < Fraction(lv["E_hi"])
        assert Fraction(lv["gap"]) <= Fraction(1, 10 ** 32)

    def test_harmonic_ladder_table(self, capsys):
        code, out, _ = invoke(
            capsys, "solve", "--lambda", "0", "--m", "0.5", "--omega0-sq", "4",
            "--levels", "0..4", "--digits", "40", "--gap", "1e-15",
            "--order", "200")
        assert code == 0
        rows = [l for l in out.splitlines() if l.strip()]
        assert len(rows) == 5
        for n, row in enumerate(rows):
            value = float(row.split()[1])
            assert value == pytest.approx(2 * n + 1, abs=1e-12)

    def test_csv_format(self, capsys):
        code, out, _ = invoke(
            capsys, "solve", "--lambda", "0", "--m", "0.5", "--omega0-sq", "4",
            "--levels", "0..0", "--digits", "40", "--gap", "1e-15",
            "--order", "200", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,E_lo,E_hi,gap,digits,certified"
        fields = lines[1].split(",")
        assert fields[0] == "0" and fields[-1] == "true"

    def test_certification_failure_exits_two(self, capsys):
        # a cutoff far beyond what the truncation order can reach keeps every
        # classification indeterminate until the escalation budget runs out
        code, out, _ = invoke(
            capsys, "solve", "--m", "0.5", "--omega0-sq", "4", "--lambda",
            "0.1", "--levels", "0..0", "--order", "16", "--cutoff", "30",
            "--digits", "30", "--gap", "1e-9")
        assert code == 2
        assert "FAILED" in out and "budget exhausted" in out


class TestReproduceTable1:
    def test_level_zero_matches_published_digits(self, capsys):
        code, out, _ = invoke(capsys, "reproduce-table1", "--levels", "0..0",
                              "--format", "json")
        assert code == 0
        obj = json.loads(out)
        assert obj["params"] == {"m": "0.5", "omega0_sq": "4",
                                 "lambda": "0.1", "hbar": "1"}
        (lv,) = obj["levels"]
        prefix = "1.0652855095437176888570916287"
        assert lv["E_lo"].startswith(prefix)
        assert lv["E_hi"].startswith(prefix)
        assert Fraction(lv["gap"]) <= Fraction(1, 10 ** 32)
        assert lv["digits"] == 31
        assert lv["provenance"]["digits"] == 100

    def test_json_round_trips_byte_identical(self, capsys):
        code, out, _ = invoke(capsys, "reproduce-table1", "--levels", "1..1",
                              "--format", "json")
        assert code == 0
        assert json.dumps(json.loads(out), indent=2) + "\n" == out


class TestOracle:
    def test_preset_flagged_uncertified(self, capsys):
        code, out, _ = invoke(capsys, "oracle", "--preset", "paper",
                              "--basis", "200")
        assert code == 0
        assert "uncertified" in out
        assert "1.0652855095" in out

    def test_json_shape(self, capsys):
        code, out, _ = invoke(capsys, "oracle", "--preset", "paper",
                              "--basis", "120", "--levels", "0..2",
                              "--format", "json")
        assert code == 0
        obj = json.loads(out)
        assert obj["certified"] is False
        assert [l["n"] for l in obj["levels"]] == [0, 1, 2]
        assert obj["levels"][0]["E"].startswith("1.06528")


class TestDensity:
    def test_profile_columns(self, capsys):
        code, out, _ = invoke(
            capsys, "density", "--preset", "paper", "--energy", "1.06",
            "--parity", "even", "--points", "10", "--order", "160",
            "--digits", "40", "--cutoff", "3")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 11
        xs, vals = [], []
        for line in lines:
            x, v = line.split("\t")
            xs.append(float(x))
            vals.append(float(v))
        assert xs[0] == 0.0 and xs[-1] == pytest.approx(3.0)
        assert all(v >= 0 for v in vals)
        assert vals[0] == pytest.approx(1.0)


class TestCheck:
    def test_sweep_passes(self, capsys):
        code, out, _ = invoke(capsys, "check", "--preset", "paper")
        assert code == 0
        lines = [l for l in out.splitlines() if l.strip()]
        assert lines and all(l.startswith("ok") for l in lines)


class TestEmitJson:
    def test_empty_levels(self):
        obj = json.loads(cli.emit_json([], BENCHMARK_PARAMS))
        assert obj == {
            "params": {"m": "0.5", "omega0_sq": "4", "lambda": "0.1",
                       "hbar": "1"},
            "levels": [],
        }

    def test_fraction_rendering(self):
        assert cli._frac_str(Fraction(1, 2)) == "0.5"
        assert cli._frac_str(Fraction(1, 3)) == "1/3"
        assert cli._frac_str(Fraction(-3, 8)) == "-0.375"
        assert cli._frac_str(Fraction(4)) == "4"
