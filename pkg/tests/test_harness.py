"""Decay fits, predictions, scenario configs, pipelines and the ek command."""
import json
import math
import shutil
import subprocess

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eklab.constitutive import GammaLaw, Laws, QHDCapillarity
from eklab.fields import make_grid
from eklab.harness.cli import main
from eklab.harness.config import ConfigError, parse_config
from eklab.harness.pipelines import (
    OUTSIDE_HYPOTHESIS,
    CommutatorScan,
    default_eps_ladder,
    fit_decay_rate,
    measure_exponents,
    predict_exponents,
    run_scenario,
)
from eklab.harness.synthetic import NOT_A_SOLUTION, synthetic_trajectory

CONSTANT_SIM = """
[scenario]
pipeline = simulate
[grid]
dim = 1
N = 16
[energy_law]
type = gamma
[capillarity]
type = constant
kappa0 = 0.1
[initial]
type = constant
rho0 = 1.5
velocity = 0.2
[time]
T = 0.1
dt = 0.01
sample_every = 5
"""

SMALL_SCAN = """
[scenario]
pipeline = commutator-scan
seed = 3
[grid]
N = 128
[energy_law]
type = gamma
[capillarity]
type = qhd
eps0 = 0.5
[initial]
type = weierstrass-synthetic
alpha = {a}
beta = {b}
J = 5
samples = 64
[time]
T = 12.566370614359172
[mollifier]
eps = 1.6 0.8 0.4 0.2 0.1
"""


def write(tmp_path, text, name="s.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestDecayFit:
    def test_exact_power(self):
        eps = 2.0 ** -np.arange(2, 8)
        fit = fit_decay_rate(eps, 5 * eps**0.35)
        assert fit.slope == pytest.approx(0.35, abs=1e-12)
        assert fit.quality == pytest.approx(1.0, abs=1e-12)
        assert fit.n_used == 6 and fit.n_excluded == 0

    def test_sign_is_ignored(self):
        eps = 2.0 ** -np.arange(2, 8)
        assert fit_decay_rate(eps, -(eps**1.5)).slope == pytest.approx(1.5, abs=1e-12)

    def test_values_below_floor(self):
        eps = 2.0 ** -np.arange(2, 8)
        fit = fit_decay_rate(eps, np.array([1e-3, 1e-4, 1e-15, 1e-16, 0.0, 1e-17]))
        assert fit.below_floor and math.isnan(fit.slope)
        assert fit.n_excluded == 4
        assert fit.as_dict()["verdict"] == "below floor"

    def test_partial_floor_exclusion(self):
        eps = 2.0 ** -np.arange(2, 8)
        vals = eps**2
        vals[-1] = 0.0
        fit = fit_decay_rate(eps, vals)
        assert fit.n_excluded == 1 and fit.slope == pytest.approx(2.0)

    @pytest.mark.parametrize(
        "eps,vals",
        [([0.1, 0.2, 0.3], [1, 2, 3]), ([0.1, 0.2, 0.3, 0.0], [1, 2, 3, 4]), ([0.1, 0.1, 0.2, 0.3], [1, 2, 3, 4])],
    )
    def test_invalid_input(self, eps, vals):
        with pytest.raises(ValueError):
            fit_decay_rate(eps, vals)


class TestPredictions:
    def test_inside_hypothesis(self):
        preds, flag = predict_exponents(0.45, 0.45)
        np.testing.assert_allclose(preds, 0.35, atol=1e-15)
        assert flag

    def test_borderline(self):
        preds, flag = predict_exponents(1 / 3, 1 / 3)
        np.testing.assert_allclose(preds, 0.0, atol=1e-15)
        assert not flag

    def test_smooth_limit(self):
        preds, flag = predict_exponents(1.0, 1.0)
        np.testing.assert_allclose(preds, 2.0)
        assert flag

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            predict_exponents(0.0, 0.5)

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(0.01, 1.0), b=st.floats(0.01, 1.0), da=st.floats(0, 0.5), db=st.floats(0, 0.5))
    def test_monotone_and_bounded(self, a, b, da, db):
        lo, flag_lo = predict_exponents(a, b)
        hi, flag_hi = predict_exponents(min(a + da, 1.0), min(b + db, 1.0))
        assert np.all(hi >= lo - 1e-12)
        assert np.all(lo <= a + b + 1e-12)
        assert flag_hi or not flag_lo
        # positive predicted decay exactly when the hypothesis holds
        assert flag_lo == bool(np.all(lo > 0))


class TestSynthetic:
    laws = Laws(GammaLaw(1.0, 2.0), QHDCapillarity(0.5))

    def test_deterministic_and_labelled(self):
        grid = make_grid(1, 64)
        a = synthetic_trajectory(0.45, 0.45, grid, self.laws, n_samples=32, J=4, seed=2)
        b = synthetic_trajectory(0.45, 0.45, grid, self.laws, n_samples=32, J=4, seed=2)
        np.testing.assert_array_equal(a.rho_array, b.rho_array)
        assert a.time_periodic
        assert a.diagnostics["note"] == NOT_A_SOLUTION

    def test_density_bounded_away_from_vacuum(self):
        traj = synthetic_trajectory(0.3, 0.3, make_grid(1, 256), self.laws, n_samples=128, J=6)
        assert np.min(traj.rho_array) > 0.5

    def test_measured_exponents_near_generator(self):
        traj = synthetic_trajectory(0.45, 0.45, make_grid(1, 1024), self.laws, n_samples=512, J=8, seed=1)
        measured = measure_exponents(traj)
        assert abs(measured["alpha"] - 0.45) < 0.1
        assert abs(measured["beta"] - 0.45) < 0.1

    def test_default_ladder_respects_floors(self):
        traj = synthetic_trajectory(0.45, 0.45, make_grid(1, 128), self.laws, n_samples=64, J=5)
        ladder = default_eps_ladder(traj)
        assert len(ladder) >= 4
        assert min(ladder) > traj.grid.dx
        np.testing.assert_allclose(np.array(ladder[:-1]) / np.array(ladder[1:]), 2.0)


class TestConfig:
    def test_round_trip_is_idempotent(self):
        cfg = parse_config(SMALL_SCAN.format(a=0.45, b=0.45))
        text = cfg.to_text()
        again = parse_config(text)
        assert again.sections == cfg.sections
        assert again.to_text() == text

    def test_keys_are_case_insensitive(self):
        cfg = parse_config(CONSTANT_SIM.replace("N = 16", "n = 16"))
        assert cfg.get("grid", "N") == 16

    def test_every_problem_is_listed(self):
        bad = CONSTANT_SIM.replace("N = 16", "N = 12").replace("kappa0 = 0.1", "kappa0 = -1")
        bad = bad.replace("dt = 0.01", "dt = fast") + "\n[grid2]\nx = 1\n"
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        text = "\n".join(err.value.problems)
        for key in ("[grid] N", "[capillarity] kappa0", "[time] dt", "[grid2]"):
            assert key in text

    def test_mollifier_scale_limit(self):
        with pytest.raises(ConfigError, match="T/4"):
            parse_config(CONSTANT_SIM + "[mollifier]\neps = 0.01 0.03\n")

    def test_synthetic_exponents_in_unit_interval(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(SMALL_SCAN.format(a=1.2, b=0.45))

    def test_unknown_pipeline(self):
        with pytest.raises(ConfigError, match="pipeline"):
            parse_config(CONSTANT_SIM.replace("pipeline = simulate", "pipeline = dance"))

    def test_tolerance_override(self):
        cfg = parse_config(CONSTANT_SIM + "[tolerances]\nenergy_drift = 1e-9\n")
        assert cfg.tolerances["energy_drift"] == 1e-9
        assert cfg.tolerances["mass_drift"] == 1e-12


class TestScenarios:
    def test_constant_state_passes(self, tmp_path):
        bundle = run_scenario(parse_config(CONSTANT_SIM), tmp_path)
        assert bundle.passed
        assert (tmp_path / "state_000000.ekf").exists() and (tmp_path / "energy.csv").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["passed"] and summary["mass_drift"] < 1e-14

    def test_commutator_scan_is_deterministic(self, tmp_path):
        cfg = parse_config(SMALL_SCAN.format(a=0.45, b=0.45))
        run_scenario(cfg, tmp_path / "a", threads=1)
        run_scenario(cfg, tmp_path / "b", threads=3)
        for name in ("commutators.csv", "slopes.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_outside_hypothesis_verdict(self, tmp_path):
        bundle = run_scenario(parse_config(SMALL_SCAN.format(a=0.3, b=0.3)), tmp_path)
        slopes = json.loads((tmp_path / "slopes.json").read_text())
        assert slopes["verdict"] == OUTSIDE_HYPOTHESIS
        assert not slopes["hypothesis"]
        assert bundle.assertions == {}
        assert slopes["note"] == NOT_A_SOLUTION

    def test_estimator_matches_pipeline(self, tmp_path):
        cfg = parse_config(SMALL_SCAN.format(a=0.45, b=0.45))
        traj = synthetic_trajectory(0.45, 0.45, make_grid(1, 128), TestSynthetic.laws, n_samples=64,
                                    T=cfg.T, J=5, seed=3)
        est = CommutatorScan(eps=cfg.eps_ladder()).fit(traj, laws=TestSynthetic.laws)
        run_scenario(cfg, tmp_path)
        slopes = json.loads((tmp_path / "slopes.json").read_text())
        expected = [slopes["residuals"][f"R{i}"]["slope"] for i in range(1, 8)]
        np.testing.assert_allclose(est.slopes_, expected, rtol=1e-12)
        assert est.score() == pytest.approx(min(expected))


class TestCommandLine:
    def test_success_exit_code(self, tmp_path, capsys):
        assert main(["simulate", "--config", write(tmp_path, CONSTANT_SIM), "--out", str(tmp_path / "o")]) == 0
        assert "PASS  mass drift" in capsys.readouterr().out

    def test_failed_assertion_exit_code(self, tmp_path):
        text = CONSTANT_SIM.replace("type = constant\nrho0", "type = cosine\nrho0") + "[tolerances]\nenergy_drift = 1e-300\n"
        cfg = write(tmp_path, text)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_invalid_config_exit_code(self, tmp_path):
        cfg = write(tmp_path, CONSTANT_SIM.replace("N = 16", "N = 10"))
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_pipeline_mismatch(self, tmp_path):
        cfg = write(tmp_path, CONSTANT_SIM)
        assert main(["energy-audit", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_missing_files(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "absent.ini")]) == 2
        assert main(["besov", "--field", str(tmp_path / "absent.ekf")]) == 2

    def test_besov_on_snapshot(self, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "--config", write(tmp_path, CONSTANT_SIM.replace("N = 16", "N = 64")), "--out", str(out)])
        table = tmp_path / "table.csv"
        assert main(["besov", "--field", str(out / "state_000000.ekf"), "--p", "3", "--out", str(table)]) == 0
        lines = table.read_text().splitlines()
        assert lines[0] == "shift,increment_norm" and len(lines) == 1 + 6

    def test_besov_rejects_other_exponents(self, tmp_path):
        assert main(["besov", "--field", str(tmp_path / "x.ekf"), "--p", "4"]) == 2

    @pytest.mark.skipif(shutil.which("ek") is None, reason="console script not installed")
    def test_console_script(self, tmp_path):
        proc = subprocess.run(
            ["ek", "simulate", "--config", write(tmp_path, CONSTANT_SIM), "--out", str(tmp_path / "o")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
