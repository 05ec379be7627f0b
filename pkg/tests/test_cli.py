import json

import numpy as np
import pytest

from rbls.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main

AIRLINE_HEADER = "Year,Month,DayofMonth,UniqueCarrier,Origin,Dest,Distance,ArrDelay"


@pytest.fixture
def config_file(tmp_path):
    cfg = {
        "scenario": "corrupted",
        "methods": ["OLS", "SRHT_LS", "ARWS_LS"],
        "n_subs_grid": [20],
        "replications": 2,
        "n": 300,
        "p": 5,
        "n_test": 50,
        "base_seed": 3,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def airline_file(tmp_path, n_rows=500, seed=0):
    rng = np.random.default_rng(seed)
    pairs = [("JFK", "LAX"), ("SFO", "ORD"), ("BOS", "DCA"), ("PHL", "CLT"), ("PIT", "MSP")]
    rows = []
    for i in range(n_rows):
        o, d = pairs[rng.integers(0, len(pairs))]
        rows.append(
            f"2000,1,{1 + i % 28},US,{o},{d},{rng.integers(100, 2600)},{rng.normal(8, 20):.1f}"
        )
    path = tmp_path / "flights.csv"
    path.write_text(AIRLINE_HEADER + "\n" + "\n".join(rows) + "\n")
    return path


class TestRunCommand:
    def test_run_writes_outputs(self, tmp_path, config_file):
        out = tmp_path / "out"
        code = main(["run", "--config", str(config_file), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "results.csv").exists()
        assert (out / "aggregates.csv").exists()

    def test_deterministic_runs_byte_identical(self, tmp_path, config_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            code = main(
                ["run", "--config", str(config_file), "--out", str(out), "--deterministic"]
            )
            assert code == EXIT_OK
        assert (out_a / "results.csv").read_bytes() == (out_b / "results.csv").read_bytes()
        assert (out_a / "aggregates.csv").read_bytes() == (out_b / "aggregates.csv").read_bytes()

    def test_gnuplot_flag(self, tmp_path, config_file):
        out = tmp_path / "out"
        code = main(["run", "--config", str(config_file), "--out", str(out), "--gnuplot"])
        assert code == EXIT_OK
        assert (out / "plot.gp").exists()

    def test_seed_override_changes_results(self, tmp_path, config_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(config_file), "--out", str(out_a),
              "--deterministic", "--seed", "1"])
        main(["run", "--config", str(config_file), "--out", str(out_b),
              "--deterministic", "--seed", "2"])
        assert (out_a / "results.csv").read_bytes() != (out_b / "results.csv").read_bytes()

    def test_threads_flag(self, tmp_path, config_file):
        out = tmp_path / "out"
        assert main(["run", "--config", str(config_file), "--out", str(out),
                     "--threads", "2"]) == EXIT_OK

    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG

    def test_malformed_json_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", "--config", str(bad)]) == EXIT_CONFIG

    def test_unknown_method_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "scenario": "corrupted",
                    "methods": ["NEWTON"],
                    "n_subs_grid": [20],
                    "replications": 1,
                    "n": 100,
                    "p": 4,
                }
            )
        )
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG

    def test_bad_threads_env_is_config_error(self, tmp_path, config_file, monkeypatch):
        monkeypatch.setenv("RBLS_THREADS", "many")
        assert main(["run", "--config", str(config_file), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_threads_env_overrides_flag(self, tmp_path, config_file, monkeypatch):
        monkeypatch.setenv("RBLS_THREADS", "1")
        out = tmp_path / "out"
        assert main(["run", "--config", str(config_file), "--out", str(out),
                     "--threads", "0"]) == EXIT_OK


class TestFig1Command:
    def test_writes_histograms(self, tmp_path):
        out = tmp_path / "fig1"
        code = main(
            ["fig1", "--n", "2000", "--p", "10", "--pi", "0.3", "--sigma-w", "0.4",
             "--seed", "1", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert (out / "fig1_histograms.csv").exists()
        assert (out / "fig1_distances.csv").exists()

    def test_pi_zero_is_data_error(self, tmp_path):
        code = main(["fig1", "--n", "500", "--p", "5", "--pi", "0.0", "--out", str(tmp_path)])
        assert code == EXIT_DATA

    def test_bad_pi_is_config_error(self, tmp_path):
        code = main(["fig1", "--pi", "1.5", "--n", "100", "--p", "4", "--out", str(tmp_path)])
        assert code == EXIT_CONFIG


class TestAirlineCommand:
    def test_ols_round_trip(self, tmp_path):
        csv_path = airline_file(tmp_path)
        out = tmp_path / "out"
        code = main(
            ["airline", "--train", str(csv_path), "--n-train", "400", "--n-test", "100",
             "--out", str(out), "--deterministic"]
        )
        assert code == EXIT_OK
        lines = (out / "results.csv").read_text().splitlines()
        assert len(lines) == 2
        fields = lines[1].split(",")
        assert fields[0] == "OLS"
        assert fields[4] == ""  # no ground truth, no estimation error
        assert float(fields[5]) > 0  # test RMSE present

    def test_subsampling_methods(self, tmp_path):
        csv_path = airline_file(tmp_path)
        out = tmp_path / "out"
        code = main(
            ["airline", "--train", str(csv_path), "--n-train", "400", "--n-test", "100",
             "--methods", "OLS", "SRHT_LS", "ARWS_LS", "--n-subs", "64",
             "--out", str(out), "--deterministic"]
        )
        assert code == EXIT_OK
        lines = (out / "results.csv").read_text().splitlines()
        assert len(lines) == 4

    def test_missing_file_is_data_error(self, tmp_path):
        assert main(["airline", "--train", str(tmp_path / "gone.csv")]) == EXIT_DATA

    def test_unparseable_file_is_data_error(self, tmp_path):
        bad = tmp_path / "flights.csv"
        bad.write_text(AIRLINE_HEADER + "\n2000,1,1,US,A,B,xyz,3\n")
        code = main(["airline", "--train", str(bad), "--n-train", "1", "--n-test", "1"])
        assert code == EXIT_DATA
