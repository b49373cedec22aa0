"""
Unit tests for the command-line front end: outputs, exit codes and config replay.
"""
import json

import pandas as pd
import pytest
import yaml

from app import cli


def _run(*argv) -> int:
    return cli.main([str(a) for a in argv])


class TestTimes:
    def test_a3_order_two(self, tmp_path):
        assert _run("times", "--group", "a3", "--order", 2, "--out", tmp_path) == cli.EXIT_OK
        frame = pd.read_csv(tmp_path / "times_a3_2.csv")
        assert frame["time"].tolist() == pytest.approx([1 / 6, 1 / 3, 2 / 3, 5 / 6], abs=1e-15)
        doc = json.loads((tmp_path / "sequence_a3_2.json").read_text())
        assert doc["hamiltonians"] == [1, 2, 3, 2, 1]
        assert doc["pulses"][-1] == "none"

    def test_udd_order_one(self, tmp_path):
        assert _run("times", "--group", "udd", "--order", 1, "--out", tmp_path) == cli.EXIT_OK
        assert pd.read_csv(tmp_path / "times_udd_1.csv")["time"].tolist() == [0.5]

    def test_order_zero_has_no_switching_times(self, tmp_path):
        assert _run("times", "--group", "a3", "--order", 0, "--out", tmp_path) == cli.EXIT_OK
        frame = pd.read_csv(tmp_path / "times_a3_0.csv")
        assert list(frame.columns) == ["time"]
        assert frame.empty

    def test_qdd3_gated_on_quantum_verdict(self, tmp_path, capsys):
        assert _run("times", "--group", "qdd3", "--order", 3, "--out", tmp_path) == cli.EXIT_OK
        assert "26 intervals" in capsys.readouterr().out

    def test_solved_times(self, tmp_path):
        assert _run("times", "--group", "a3", "--order", 2, "--solve", "--out", tmp_path) == cli.EXIT_OK
        assert pd.read_csv(tmp_path / "times_a3_2.csv")["time"].tolist() == pytest.approx(
            [1 / 6, 1 / 3, 2 / 3, 5 / 6], abs=1e-13
        )


class TestVerify:
    def test_classical_round_trip(self, tmp_path):
        _run("times", "--group", "a3", "--order", 2, "--out", tmp_path)
        code = _run(
            "verify", "--sequence", tmp_path / "sequence_a3_2.json", "--order", 2, "--mode", "classical",
            "--out", tmp_path,
        )
        assert code == cli.EXIT_OK
        report = json.loads((tmp_path / "verify_classical.json").read_text())
        assert report["passed"] is True
        assert report["max_residual"] <= 1e-12

    def test_quantum_order_three_of_a3_fails(self, tmp_path):
        _run("times", "--group", "a3", "--order", 3, "--out", tmp_path)
        code = _run(
            "verify", "--sequence", tmp_path / "sequence_a3_3.json", "--order", 3, "--mode", "quantum",
            "--out", tmp_path,
        )
        assert code == cli.EXIT_VALIDATION
        report = json.loads((tmp_path / "verify_quantum.json").read_text())
        assert report["verdict"] == 2
        assert report["passed"] is False

    def test_missing_file(self, tmp_path):
        code = _run("verify", "--sequence", tmp_path / "nope.json", "--order", 1, "--out", tmp_path)
        assert code == cli.EXIT_INPUT

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"group": "a3", "order": 1, "hamiltonians": [1, 2], "times": [], "pulses": []}')
        assert _run("verify", "--sequence", path, "--order", 1, "--out", tmp_path) == cli.EXIT_INPUT

    def test_sequence_is_required(self, tmp_path):
        assert _run("verify", "--order", 1, "--out", tmp_path) == cli.EXIT_INPUT


class TestArguments:
    def test_unknown_group(self, tmp_path):
        assert _run("times", "--group", "nope", "--out", tmp_path) == cli.EXIT_INPUT

    def test_unknown_flag(self, tmp_path):
        assert _run("times", "--colour", "red", "--out", tmp_path) == cli.EXIT_INPUT

    def test_missing_command(self):
        assert _run() == cli.EXIT_INPUT

    def test_negative_order(self, tmp_path):
        assert _run("times", "--group", "a3", "--order", -2, "--out", tmp_path) == cli.EXIT_INPUT


class TestRunConfig:
    def test_written_next_to_outputs(self, tmp_path):
        _run("times", "--group", "s3", "--order", 1, "--seed", 5, "--out", tmp_path)
        saved = yaml.safe_load((tmp_path / "run_config.yaml").read_text())
        assert saved["command"] == "times"
        assert saved["group"] == "s3"
        assert saved["order"] == 1
        assert saved["seed"] == 5

    def test_replay(self, tmp_path):
        _run("times", "--group", "udd", "--order", 3, "--out", tmp_path)
        first = (tmp_path / "times_udd_3.csv").read_text()
        (tmp_path / "times_udd_3.csv").unlink()
        # the file wins over flags
        assert _run("times", "--order", 1, "--config", tmp_path / "run_config.yaml") == cli.EXIT_OK
        assert (tmp_path / "times_udd_3.csv").read_text() == first

    def test_replay_for_another_command(self, tmp_path):
        _run("times", "--group", "udd", "--order", 1, "--out", tmp_path)
        assert _run("filter", "--config", tmp_path / "run_config.yaml") == cli.EXIT_INPUT

    def test_unreadable_config(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("order: [1,\n")
        assert _run("times", "--config", path, "--out", tmp_path) == cli.EXIT_INPUT


class TestOtherCommands:
    def test_filter_curves(self, tmp_path):
        code = _run("filter", "--group", "a3", "--order", 1, "--points", 50, "--out", tmp_path)
        assert code == cli.EXIT_OK
        for name in ("f1", "f2"):
            frame = pd.read_csv(tmp_path / f"filter_a3_1_{name}.csv")
            assert len(frame) == 50

    def test_chi(self, tmp_path):
        code = _run(
            "chi", "--group", "a3", "--order", 1, "--spectrum", "gaussian",
            "--T-start", 0.01, "--T-stop", 1.0, "--T-points", 3, "--out", tmp_path,
        )
        assert code == cli.EXIT_OK
        records = json.loads((tmp_path / "chi_a3_1_gaussian.json").read_text())
        assert set(records) == {"f1", "f2"}
        assert len(records["f1"]) == 3
        assert all(0.0 < r["W"] <= 1.0 for r in records["f1"])

    def test_chi_unknown_parameter(self, tmp_path):
        code = _run("chi", "--group", "a3", "--order", 1, "--spectrum", "ohmic", "--param", "beta=2", "--out", tmp_path)
        assert code == cli.EXIT_INPUT

    def test_simulate(self, tmp_path, mocker):
        spy = mocker.spy(cli, "sweep_infidelity")
        code = _run(
            "simulate", "--kind", "classical", "--orders", 0, 1, "--T-start", 1e-3, "--T-stop", 1e-2,
            "--T-points", 3, "--trials", 2, "--states", 2, "--out", tmp_path,
        )
        assert code == cli.EXIT_OK
        assert spy.call_count == 1
        assert spy.call_args.kwargs["trials"] == 2
        frame = pd.read_csv(tmp_path / "sweep_classical.csv")
        assert len(frame) == 6  # 2 orders x 3 T values
        fits = json.loads((tmp_path / "fits_classical.json").read_text())
        assert [f["expected_exponent"] for f in fits] == [2, 4]

    def test_search(self, tmp_path):
        code = _run("search", "--order", 1, "--max-intervals", 3, "--pool", 1, 2, 3, "--out", tmp_path)
        assert code == cli.EXIT_OK
        hits = json.loads((tmp_path / "search_1.json").read_text())
        assert len(hits) == 1
        assert hits[0]["hamiltonians"] == [1, 2, 3]
        assert (tmp_path / "search_1_0.json").exists()
