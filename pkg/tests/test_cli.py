import json

import numpy as np
import pytest

from lpreset import (
    MODE_STRICT,
    NextPriceDistribution,
    UtilityParams,
    expected_utility,
    run_strategy,
    sample_path,
    uniform_strategy,
)
from lpreset.cli import main, resolve_strategy

from conftest import write_price_csv


@pytest.fixture
def dist_file(tmp_path, toy_dist):
    path = tmp_path / "dist.json"
    toy_dist.save(str(path))
    return str(path)


@pytest.fixture
def strategy_file(tmp_path):
    path = tmp_path / "strategy.json"
    doc = {
        "kind": "uniform",
        "n_tau": 1,
        "n_alpha": 1,
        "params": {"a": 0.0, "kappa": 1.0, "ell": 1.0},
    }
    path.write_text(json.dumps(doc))
    return str(path)


class TestFit:
    def test_writes_distribution_json(self, tmp_path):
        prices = [100.0 * 1.0005**i for i in range(40)]
        csv_path = write_price_csv(tmp_path / "px.csv", prices)
        out = tmp_path / "dist.json"
        code = main(["fit", csv_path, "--k-max", "8", "--out", str(out)])
        assert code == 0
        dist = NextPriceDistribution.load(str(out))
        assert dist.k_max == 8
        assert dist.probs.sum() == pytest.approx(1.0)

    def test_rerun_is_byte_identical(self, tmp_path):
        prices = [100.0, 100.3, 100.1, 100.6, 100.2, 100.9]
        csv_path = write_price_csv(tmp_path / "px.csv", prices)
        out1, out2 = tmp_path / "d1.json", tmp_path / "d2.json"
        main(["fit", csv_path, "--k-max", "4", "--out", str(out1)])
        main(["fit", csv_path, "--k-max", "4", "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestEval:
    def test_matches_library(self, dist_file, strategy_file, capsys, toy_dist):
        code = main(["eval", dist_file, strategy_file])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        params = UtilityParams(a=0.0, kappa=1.0, ell=1.0)
        spec = uniform_strategy(toy_dist, 1, 1, params)
        want = expected_utility(toy_dist, 1, spec.allocation, params, MODE_STRICT)
        assert doc["expected_utility"] == pytest.approx(want, abs=1e-15)
        assert doc["expected_utility"] == pytest.approx(5 / 18, abs=1e-12)
        assert doc["mode"] == MODE_STRICT

    def test_explicit_weights_document(self, dist_file, tmp_path, capsys):
        doc = {
            "n_tau": 1,
            "n_alpha": 1,
            "weights": [0.0, 1.0, 0.0],
            "params": {"a": 0.0, "kappa": 1.0, "ell": 1.0},
        }
        path = tmp_path / "w.json"
        path.write_text(json.dumps(doc))
        assert main(["eval", dist_file, str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["expected_utility"] == pytest.approx(1 / 3, abs=1e-12)


class TestOptimize:
    def test_reports_certificate(self, dist_file, capsys):
        code = main(["optimize", dist_file, "--n-tau", "1", "--a", "1.0"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kkt_residual"] < 1e-10
        assert doc["converged"] is True
        assert doc["n_tau"] == 1
        assert abs(sum(doc["weights"]) - 1.0) < 1e-12

    def test_tau_mass_form(self, dist_file, capsys):
        code = main(["optimize", dist_file, "--tau-mass", "0.5", "--a", "0.5"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n_tau"] == 1


class TestSweep:
    def test_grid_csv(self, dist_file, capsys, toy_dist):
        code = main(
            [
                "sweep",
                dist_file,
                "--strategy",
                "uniform",
                "--n-tau-grid",
                "1,2",
                "--n-alpha-grid",
                "1",
                "--ell",
                "1.0",
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "n_tau,n_alpha,expected_utility"
        assert len(lines) == 3
        params = UtilityParams(a=0.0, kappa=1.0, ell=1.0)
        spec = uniform_strategy(toy_dist, 1, 1, params)
        want = expected_utility(toy_dist, 1, spec.allocation, params, MODE_STRICT)
        got = float(lines[1].split(",")[2])
        assert got == pytest.approx(want, abs=1e-15)

    def test_missing_grid_is_an_error(self, dist_file, capsys):
        code = main(["sweep", dist_file, "--strategy", "uniform"])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.count("\n") == 1


class TestSimulate:
    def test_matches_library_run(self, dist_file, strategy_file, capsys, toy_dist):
        code = main(
            ["simulate", dist_file, strategy_file, "--steps", "2000", "--seed", "3"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        params = UtilityParams(a=0.0, kappa=1.0, ell=1.0)
        spec = uniform_strategy(toy_dist, 1, 1, params)
        want = run_strategy(sample_path(toy_dist, 2000, seed=3), spec, seed=3)
        assert doc["mean_utility_per_step"] == want.mean_utility_per_step
        assert doc["resets"] == want.resets
        assert doc["rng"] == "pcg64"

    def test_deterministic_output_files(self, dist_file, strategy_file, tmp_path):
        out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
        args = ["simulate", dist_file, strategy_file, "--steps", "500", "--seed", "9"]
        main(args + ["--out", str(out1)])
        main(args + ["--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_trace_file(self, dist_file, strategy_file, tmp_path):
        trace = tmp_path / "trace.csv"
        code = main(
            [
                "simulate",
                dist_file,
                strategy_file,
                "--steps",
                "25",
                "--trace-out",
                str(trace),
                "--quiet",
            ]
        )
        assert code == 0
        lines = trace.read_text().strip().splitlines()
        assert lines[0] == "step,offset,reward,reset_flag"
        assert len(lines) == 26


class TestBacktest:
    def make_inputs(self, tmp_path, strategy_file):
        rng = np.random.default_rng(4)
        moves = rng.choice([-1, 0, 1], size=400)
        levels = np.concatenate([[0], np.cumsum(moves)])
        prices = 100.0 * 1.005 ** (levels + 0.5)
        return write_price_csv(tmp_path / "px.csv", [float(p) for p in prices]), strategy_file

    def test_report_fields(self, tmp_path, strategy_file, capsys):
        csv_path, strat = self.make_inputs(tmp_path, strategy_file)
        code = main(["backtest", csv_path, strat, "--bin-width-pct", "0.5"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["steps"] == 400
        assert doc["grid_bins"] >= 1
        assert np.isfinite(doc["ratio"])
        assert doc["ratio"] == pytest.approx(
            doc["mean_utility_per_step"] / doc["v2_mean_utility_per_step"]
        )

    def test_band_out(self, tmp_path, strategy_file):
        csv_path, strat = self.make_inputs(tmp_path, strategy_file)
        band = tmp_path / "band.csv"
        code = main(
            [
                "backtest",
                csv_path,
                strat,
                "--bin-width-pct",
                "0.5",
                "--band-out",
                str(band),
                "--quiet",
            ]
        )
        assert code == 0
        lines = band.read_text().strip().splitlines()
        assert lines[0] == "step,price,alpha_low,alpha_high,tau_low,tau_high"
        assert len(lines) == 401

    def test_no_compare_flag(self, tmp_path, strategy_file, capsys):
        csv_path, strat = self.make_inputs(tmp_path, strategy_file)
        code = main(
            ["backtest", csv_path, strat, "--bin-width-pct", "0.5", "--no-compare-v2"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert np.isnan(doc["ratio"])


class TestErrorHandling:
    def test_domain_error_is_one_line_and_nonzero(self, dist_file, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kind": "mystery"}))
        code = main(["eval", dist_file, str(bad)])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.count("\n") == 1

    def test_resolve_rejects_unknown_kind(self, toy_dist):
        from lpreset import InputError

        with pytest.raises(InputError):
            resolve_strategy({"kind": "mystery"}, toy_dist)
