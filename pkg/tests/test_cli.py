import csv
import json
import math

import numpy as np
import pytest

from steerscope.cli import main, werner_threshold
from steerscope.states import named_state, sample_state, validate
from steerscope.stateio import (
    CSV_HEADER_2Q,
    CSV_HEADER_3Q,
    StateFormatError,
    dumps_state,
    load_state,
    loads_state_matrix,
)


def write_state(tmp_path, name, matrix_or_state):
    path = tmp_path / f"{name}.json"
    path.write_text(dumps_state(matrix_or_state))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestStateFormat:
    def test_round_trip_is_exact(self, tmp_path):
        state = sample_state("ginibre_mixed_3q", 1, 0)
        loaded = load_state(write_state(tmp_path, "s", state))
        np.testing.assert_array_equal(loaded.matrix, state.matrix)

    def test_layout_is_row_major(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1], m[1, 0] = 0.1j, -0.1j
        obj = json.loads(dumps_state(m))
        assert obj["n_qubits"] == 2
        assert obj["matrix"][1] == [0.0, 0.1] and obj["matrix"][4] == [0.0, -0.1]

    @pytest.mark.parametrize(
        "text",
        [
            '{"n_qubits": 2, "matrix": [[0.25, 0]]}',
            '{"n_qubits": 4, "matrix": []}',
            '{"n_qubits": true, "matrix": []}',
            '{"matrix": []}',
            "[1, 2]",
            '{"n_qubits": 2, "matrix": [' + ",".join(["[NaN, 0]"] * 16) + "]}",
            '{"n_qubits": 2, "matrix": [' + ",".join(["[Infinity, 0]"] * 16) + "]}",
            '{"n_qubits": 2, "matrix": [' + ",".join(["[0.1]"] * 16) + "]}",
            '{"n_qubits": 2, "matrix": [' + ",".join(['["a", 0]'] * 16) + "]}",
            "{not json",
        ],
    )
    def test_rejections(self, text):
        with pytest.raises(StateFormatError):
            loads_state_matrix(text)


class TestAnalyze:
    def test_bell_is_steerable(self, tmp_path, capsys):
        path = write_state(tmp_path, "bell", named_state("bell_phi_plus"))
        code, out, _ = run(capsys, "analyze", path, "--restarts", "4")
        assert code == 3
        report = json.loads(out)
        assert report["steering"]["S"] == pytest.approx(math.sqrt(2), abs=1e-12)
        assert report["steering"]["violates"] is True
        assert report["horodecki_M"] == pytest.approx(2, abs=1e-12)
        assert report["two_way_symmetric"] is True
        for direction in ("BtoA", "AtoB"):
            entry = report["directions"][direction]
            assert entry["oracle_gap"] <= 1e-6
            assert entry["achieved_value"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        assert set(report["optimal_configuration"]) == {
            "a_hat", "a_prime_hat", "b_hat", "b_prime_hat", "c_hat", "c_prime_hat", "theta"
        }

    def test_maximally_mixed(self, tmp_path, capsys):
        path = write_state(tmp_path, "mixed", np.eye(4) / 4)
        code, out, _ = run(capsys, "analyze", "--input", path, "--restarts", "2")
        assert code == 0
        assert json.loads(out)["steering"]["S"] == 0.0

    def test_report_is_deterministic(self, tmp_path, capsys):
        path = write_state(tmp_path, "g", sample_state("ginibre_mixed_2q", 3, 0))
        _, first, _ = run(capsys, "analyze", path, "--restarts", "3", "--seed", "11")
        _, second, _ = run(capsys, "analyze", path, "--restarts", "3", "--seed", "11")
        assert first == second

    def test_report_to_file(self, tmp_path, capsys):
        path = write_state(tmp_path, "mixed", np.eye(4) / 4)
        out_path = tmp_path / "report.json"
        code, out, _ = run(capsys, "analyze", path, "--restarts", "2", "--out", str(out_path))
        assert code == 0 and out == ""
        assert json.loads(out_path.read_text())["bloch"]["T"] == [[0.0] * 3] * 3

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        code, _, err = run(capsys, "analyze", str(path))
        assert code == 1 and "parse" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(capsys, "analyze", str(tmp_path / "nope.json"))
        assert code == 1

    def test_invalid_state(self, tmp_path, capsys):
        path = write_state(tmp_path, "neg", np.diag([1.5, -0.5, 0, 0]))
        code, _, err = run(capsys, "analyze", path)
        assert code == 2 and "positive_semidefinite" in err

    def test_repair_flag(self, tmp_path, capsys):
        path = write_state(tmp_path, "nearly", np.diag([0.5 + 1e-8, 0.5, -1e-8, 0]))
        assert run(capsys, "analyze", path, "--restarts", "2")[0] == 2
        assert run(capsys, "analyze", path, "--restarts", "2", "--repair")[0] == 0

    def test_three_qubit_rejected(self, tmp_path, capsys):
        path = write_state(tmp_path, "ghz", named_state("ghz"))
        assert run(capsys, "analyze", path)[0] == 2

    def test_bad_flag_exits_one(self, capsys):
        assert run(capsys, "analyze", "--direction", "up", "x.json")[0] == 1


class TestWernerThreshold:
    @pytest.mark.parametrize("criterion", ["cffw", "chsh"])
    def test_value(self, capsys, criterion):
        code, out, _ = run(capsys, "werner-threshold", "--criterion", criterion)
        assert code == 0
        assert abs(json.loads(out)["p_star"] - 1 / math.sqrt(2)) <= 1e-6

    def test_bisection_function(self):
        p, iterations = werner_threshold("cffw", 1e-9)
        assert abs(p - 1 / math.sqrt(2)) <= 1e-9 and iterations == 30


class TestMonogamyCommand:
    def test_ghz(self, tmp_path, capsys):
        path = write_state(tmp_path, "ghz", named_state("ghz"))
        code, out, _ = run(capsys, "monogamy", path)
        report = json.loads(out)
        assert code == 0
        assert abs(report["lhs"] - 8) <= 1e-9 and report["saturated"] is True

    def test_scan(self, capsys):
        code, out, _ = run(capsys, "monogamy", "--scan", "haar_pure_3q", "--samples", "50", "--seed", "7")
        summary = json.loads(out)
        assert code == 0
        assert summary["violations"] == 0 and summary["samples"] == 50

    def test_scan_csv(self, tmp_path, capsys):
        out_path = tmp_path / "scan.csv"
        args = ["monogamy", "--scan", "ginibre_mixed_3q", "--samples", "5", "--seed", "1", "--format", "csv"]
        assert run(capsys, *args, "--out", str(out_path))[0] == 0
        rows = list(csv.reader(out_path.open()))
        assert tuple(rows[0]) == CSV_HEADER_3Q and len(rows) == 6
        for row in rows[1:]:
            s_ba, s_ca, lhs, slack = map(float, row[1:])
            assert lhs == s_ba**2 + s_ca**2 and slack == 8 - lhs

    def test_scan_needs_seed(self, capsys):
        assert run(capsys, "monogamy", "--scan", "haar_pure_3q", "--samples", "5")[0] == 1

    def test_two_qubit_file(self, tmp_path, capsys):
        path = write_state(tmp_path, "bell", named_state("bell_phi_plus"))
        assert run(capsys, "monogamy", path)[0] == 2

    def test_violation_exit_code(self, tmp_path, capsys, monkeypatch):
        from steerscope import cli
        from steerscope.monogamy import MonogamyReport

        monkeypatch.setattr(cli, "monogamy_check", lambda s: MonogamyReport(2.9, 2.9, 16.82, -8.82, False))
        path = write_state(tmp_path, "ghz", named_state("ghz"))
        assert run(capsys, "monogamy", path)[0] == 4


class TestSample:
    ARGS = ["sample", "--kind", "ginibre_mixed_2q", "--samples", "10", "--seed", "1", "--format", "csv"]

    def test_csv_rows(self, tmp_path, capsys):
        out_path = tmp_path / "rows.csv"
        assert run(capsys, *self.ARGS, "--out", str(out_path))[0] == 0
        rows = list(csv.reader(out_path.open()))
        assert tuple(rows[0]) == CSV_HEADER_2Q
        assert len(rows) == 11
        for k, row in enumerate(rows[1:]):
            assert int(row[0]) == k
            s, m = float(row[1]), float(row[2])
            assert abs(s * s - m) <= 1e-12
            assert row[3] == ("true" if s > 1 else "false")

    def test_csv_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, *self.ARGS, "--out", str(a))
        run(capsys, *self.ARGS, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_json_lines(self, tmp_path, capsys):
        out_path = tmp_path / "states.jsonl"
        args = ["sample", "--kind", "haar_pure_3q", "--samples", "3", "--seed", "2", "--out", str(out_path)]
        assert run(capsys, *args)[0] == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 3
        for k, line in enumerate(lines):
            n, m = loads_state_matrix(line)
            assert n == 3
            np.testing.assert_array_equal(validate(m).matrix, sample_state("haar_pure_3q", 2, k).matrix)

    def test_three_qubit_csv(self, capsys):
        code, out, _ = run(capsys, "sample", "--kind", "haar_pure_3q", "--samples", "2", "--seed", "2", "--format", "csv")
        assert code == 0 and out.splitlines()[0] == ",".join(CSV_HEADER_3Q)

    def test_unwritable(self, tmp_path, capsys):
        code, _, _ = run(capsys, *self.ARGS, "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 1
