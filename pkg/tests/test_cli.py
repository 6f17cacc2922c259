import json
import subprocess
import sys

import numpy as np
import pytest

from otprune.tokenio import save_matrix, synth_gaussian


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "otprune", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture()
def matrix_csv(tmp_path):
    path = tmp_path / "V.csv"
    save_matrix(synth_gaussian(8, 3, seed=1), str(path))
    return str(path)


@pytest.fixture()
def matrix_otp1(tmp_path):
    path = tmp_path / "V.otp1"
    save_matrix(synth_gaussian(8, 3, seed=1), str(path))
    return str(path)


class TestSelect:
    def test_basic_output_and_determinism(self, matrix_csv):
        a = run_cli("select", matrix_csv, "--k", "3")
        b = run_cli("select", matrix_csv, "--k", "3")
        assert a.returncode == 0
        assert a.stdout == b.stdout
        lines = a.stdout.strip().split("\n")
        assert lines[0].startswith("indices:")
        assert lines[1].startswith("order:")
        assert lines[2].startswith("objective:")

    def test_otp1_input(self, matrix_otp1):
        out = run_cli("select", matrix_otp1, "--k", "5", "--method", "otprune", "--gamma", "0.01")
        assert out.returncode == 0
        rerun = run_cli("select", matrix_otp1, "--k", "5", "--method", "otprune", "--gamma", "0.01")
        assert out.stdout == rerun.stdout

    def test_k_zero_exit_2_names_flag(self, matrix_csv):
        out = run_cli("select", matrix_csv, "--k", "0")
        assert out.returncode == 2
        assert "--k" in out.stderr

    def test_k_above_m_exit_2(self, matrix_csv):
        out = run_cli("select", matrix_csv, "--k", "9")
        assert out.returncode == 2
        assert "--k" in out.stderr

    def test_k_equals_m_selects_all(self, matrix_csv):
        out = run_cli("select", matrix_csv, "--k", "8")
        indices = out.stdout.strip().split("\n")[0].split(":")[1].split()
        assert indices == [str(i) for i in range(8)]

    def test_full_set_objective_matches_eval(self, matrix_csv):
        sel = run_cli("select", matrix_csv, "--k", "8")
        printed = float(sel.stdout.strip().split("\n")[-1].split(":")[1])
        ev = run_cli("eval", matrix_csv, "--subset", ",".join(map(str, range(8))),
                     "--objective", "kernel-logdet")
        assert abs(printed - float(ev.stdout)) <= 1e-6 * (1 + abs(printed))

    def test_json_and_out_report(self, matrix_csv, tmp_path):
        report_path = str(tmp_path / "sel.json")
        out = run_cli("select", matrix_csv, "--k", "3", "--json", "--out", report_path)
        payload = json.loads(out.stdout)
        assert payload["k"] == 3
        assert len(payload["result"]["indices"]) == 3
        on_disk = json.loads(open(report_path).read())
        assert on_disk == payload

    def test_random_requires_seed(self, matrix_csv):
        out = run_cli("select", matrix_csv, "--k", "3", "--method", "random")
        assert out.returncode == 2
        assert "--seed" in out.stderr

    def test_all_methods_run(self, matrix_csv):
        for method in ("otprune", "divprune", "dpp", "first-k", "last-k", "uniform"):
            out = run_cli("select", matrix_csv, "--k", "3", "--method", method)
            assert out.returncode == 0, (method, out.stderr)
        out = run_cli("select", matrix_csv, "--k", "3", "--method", "random", "--seed", "4")
        assert out.returncode == 0

    def test_unknown_flag_rejected(self, matrix_csv):
        out = run_cli("select", matrix_csv, "--k", "3", "--frobnicate")
        assert out.returncode == 2

    def test_missing_file_exit_3(self, tmp_path):
        out = run_cli("select", str(tmp_path / "nope.csv"), "--k", "2")
        assert out.returncode == 3

    def test_malformed_csv_exit_3(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,banana\n")
        out = run_cli("select", str(bad), "--k", "1")
        assert out.returncode == 3
        assert "line 2" in out.stderr


class TestEval:
    def test_full_set_w2_is_zero(self, matrix_csv):
        out = run_cli("eval", matrix_csv, "--subset", ",".join(map(str, range(8))),
                      "--objective", "w2")
        assert out.returncode == 0
        assert abs(float(out.stdout)) <= 1e-8

    def test_logdet_forms_agree(self, matrix_csv):
        args = (matrix_csv, "--subset", "0,2,5", "--gamma", "0.02")
        a = float(run_cli("eval", *args, "--objective", "logdet").stdout)
        b = float(run_cli("eval", *args, "--objective", "kernel-logdet").stdout)
        assert abs(a - b) <= 1e-7 * (1 + abs(a))

    def test_twelve_significant_digits(self, matrix_csv):
        out = run_cli("eval", matrix_csv, "--subset", "0,1", "--objective", "trace-f")
        mantissa = out.stdout.strip().replace("-", "").replace(".", "").lstrip("0")
        assert len(mantissa) >= 11  # 12 significant digits printed

    def test_duplicate_subset_exit_3(self, matrix_csv):
        out = run_cli("eval", matrix_csv, "--subset", "1,1", "--objective", "trace-f")
        assert out.returncode == 3
        assert "duplicate" in out.stderr

    def test_out_of_range_exit_3(self, matrix_csv):
        out = run_cli("eval", matrix_csv, "--subset", "0,99", "--objective", "trace-f")
        assert out.returncode == 3

    def test_unparseable_subset_exit_2(self, matrix_csv):
        out = run_cli("eval", matrix_csv, "--subset", "0,x", "--objective", "trace-f")
        assert out.returncode == 2

    def test_normalize_off_changes_value(self, tmp_path):
        V = synth_gaussian(10, 3, seed=2) * np.array([1.0, 10.0, 100.0])
        path = str(tmp_path / "scaled.csv")
        save_matrix(V, path)
        on = float(run_cli("eval", path, "--subset", "0,1,2", "--objective", "trace-f").stdout)
        off = float(run_cli("eval", path, "--subset", "0,1,2", "--objective", "trace-f",
                            "--normalize", "off").stdout)
        assert abs(on - off) > 1e-6


class TestOracle:
    def test_exhaustive_small_count(self, tmp_path):
        path = str(tmp_path / "V6.csv")
        save_matrix(synth_gaussian(6, 3, seed=3), path)
        out = run_cli("oracle", path, "--k", "2", "--mode", "exhaustive", "--method", "otprune")
        assert out.returncode == 0
        report = json.loads(out.stdout)
        assert report["n_evaluated"] == 15
        assert "cost" in out.stderr or "evaluations" in out.stderr

    def test_mc_deterministic(self, matrix_csv):
        args = ("oracle", matrix_csv, "--k", "3", "--mode", "mc",
                "--samples", "1000", "--seed", "1")
        a = run_cli(*args)
        b = run_cli(*args)
        assert a.returncode == 0
        assert a.stdout == b.stdout

    def test_mc_requires_samples_and_seed(self, matrix_csv):
        out = run_cli("oracle", matrix_csv, "--k", "3", "--mode", "mc")
        assert out.returncode == 2

    def test_workers_identical(self, matrix_csv):
        base = ("oracle", matrix_csv, "--k", "3", "--mode", "mc",
                "--samples", "2000", "--seed", "2")
        a = run_cli(*base, "--workers", "1")
        b = run_cli(*base, "--workers", "4")
        assert a.stdout == b.stdout

    def test_cap_exceeded_exit_4(self, tmp_path):
        path = str(tmp_path / "V40.csv")
        save_matrix(synth_gaussian(40, 2, seed=4), path)
        out = run_cli("oracle", path, "--k", "15", "--mode", "exhaustive")
        assert out.returncode == 4
        assert "mc" in out.stderr

    def test_out_file_matches_stdout(self, matrix_csv, tmp_path):
        report_path = str(tmp_path / "oracle.json")
        out = run_cli("oracle", matrix_csv, "--k", "2", "--mode", "mc", "--samples", "500",
                      "--seed", "7", "--out", report_path)
        assert json.loads(out.stdout) == json.loads(open(report_path).read())


class TestBench:
    def write_config(self, tmp_path, **overrides):
        config = {
            "m": 10, "d": 3, "k": 3,
            "strategies": [{"kind": "otprune"}, {"kind": "random"}],
            "objective": {"kind": "trace_f"},
            "oracle_mode": {"mode": "exhaustive"},
            "n_trials": 2,
            "base_seed": 0,
            "gamma": 0.01,
        }
        config.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        return str(path)

    def test_minimal_run(self, tmp_path):
        path = self.write_config(tmp_path, strategies=[{"kind": "otprune"}], n_trials=1)
        out = run_cli("bench", path)
        assert out.returncode == 0
        assert "otprune" in out.stdout

    def test_report_files_and_figures(self, tmp_path):
        path = self.write_config(tmp_path)
        prefix = str(tmp_path / "report")
        out = run_cli("bench", path, "--out", prefix)
        assert out.returncode == 0
        report = json.loads(open(prefix + ".json").read())
        assert len(report["summary"]) == 2
        csv_lines = open(prefix + ".csv").read().strip().split("\n")
        assert csv_lines[0].startswith("strategy,mean_win_rate")
        assert (tmp_path / "report_summary.png").exists()

    def test_no_figures_flag(self, tmp_path):
        path = self.write_config(tmp_path)
        prefix = str(tmp_path / "plain")
        out = run_cli("bench", path, "--out", prefix, "--no-figures")
        assert out.returncode == 0
        assert not (tmp_path / "plain_summary.png").exists()

    def test_k_above_m_exit_2_names_constraint(self, tmp_path):
        path = self.write_config(tmp_path, k=11)
        out = run_cli("bench", path)
        assert out.returncode == 2
        assert "k" in out.stderr

    def test_bad_strategy_exit_2_names_field(self, tmp_path):
        path = self.write_config(tmp_path, strategies=[{"kind": "wizardry"}])
        out = run_cli("bench", path)
        assert out.returncode == 2
        assert "strategies[0]" in out.stderr

    def test_invalid_json_exit_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{]")
        out = run_cli("bench", str(path))
        assert out.returncode == 2

    def test_missing_config_exit_3(self, tmp_path):
        out = run_cli("bench", str(tmp_path / "ghost.json"))
        assert out.returncode == 3

    def test_gamma_list_runs_sweep(self, tmp_path):
        path = self.write_config(tmp_path, gamma=[0.005, 0.05], n_trials=1,
                                 strategies=[{"kind": "otprune"}])
        prefix = str(tmp_path / "sweep")
        out = run_cli("bench", path, "--out", prefix)
        assert out.returncode == 0
        assert "gamma" in out.stdout
        report = json.loads(open(prefix + ".json").read())
        assert report["gammas"] == [0.005, 0.05]
        assert (tmp_path / "sweep_gamma_sweep.png").exists()

    def test_gamma_list_with_nonpositive_exit_2(self, tmp_path):
        path = self.write_config(tmp_path, gamma=[0.01, -0.1])
        out = run_cli("bench", path)
        assert out.returncode == 2

    def test_json_stdout_mode(self, tmp_path):
        path = self.write_config(tmp_path, n_trials=1, strategies=[{"kind": "first_k"}])
        out = run_cli("bench", path, "--json")
        report = json.loads(out.stdout)
        assert report["summary"][0]["strategy"] == "first_k"
