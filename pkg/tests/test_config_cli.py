import json

import pytest
import yaml

from cpfsim.cli import main
from cpfsim.config import (build_scenario, bundled_config_path, load_config,
                           params_fragment, resolve_params)
from cpfsim.exceptions import ConfigError

MINIMAL = """
limits: {v_min: 10.0, v_max: 25.0, omega_max: 0.2, kappa_bound: 0.002}
params:
  explicit: {psi_max: 0.6303, rho_max: 122.1297, v_coord: 25.0}
coordination: {spacing: 1047.1975511965976}
paths:
  - {kind: circle, center: [0.0, 0.0], radius: 1000.0, direction: ccw}
uavs:
  - {id: 1, x: 1000.0, y: 0.0, theta: 1.5707963267948966}
run: {duration: 1.0, dt: 0.01}
"""


def write_config(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestSchema:
    def test_bundled_configs_load(self):
        for name in ("circle6", "parallel4", "design"):
            cfg = load_config(bundled_config_path(name))
            if "explicit" in cfg["params"]:
                build_scenario(cfg, duration=0.0)

    def test_minimal_config(self, tmp_path):
        sc = build_scenario(load_config(write_config(tmp_path, MINIMAL)))
        assert sc.duration == 1.0
        assert sc.params.rho_universe == pytest.approx(405.0)
        assert sc.params.k2 == pytest.approx(122.1297 / 0.6303 + 1.0)

    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(write_config(tmp_path, MINIMAL + "\nbogus: 1\n"))

    def test_unknown_nested_key(self, tmp_path):
        text = MINIMAL.replace("kappa_bound: 0.002", "kappa_bound: 0.002, turbo: 9")
        with pytest.raises(ConfigError, match="unknown key"):
            build_scenario(load_config(write_config(tmp_path, text)))

    def test_missing_required(self, tmp_path):
        text = MINIMAL.replace("psi_max: 0.6303, ", "")
        with pytest.raises(ConfigError, match="psi_max"):
            build_scenario(load_config(write_config(tmp_path, text)))

    def test_wrong_type(self, tmp_path):
        text = MINIMAL.replace("radius: 1000.0", "radius: huge")
        with pytest.raises(ConfigError, match="expected a number"):
            build_scenario(load_config(write_config(tmp_path, text)))

    def test_design_and_explicit_mutually_exclusive(self, tmp_path):
        text = MINIMAL.replace(
            "params:\n", "params:\n  design: {speed_margin: 1.0}\n")
        with pytest.raises(ConfigError, match="exactly one"):
            build_scenario(load_config(write_config(tmp_path, text)))

    def test_zero_speed_margin_rejected(self, tmp_path):
        text = MINIMAL.replace(
            "  explicit: {psi_max: 0.6303, rho_max: 122.1297, v_coord: 25.0}",
            "  design: {speed_margin: 0.0}")
        with pytest.raises((ConfigError, ValueError)):
            resolve_params(load_config(write_config(tmp_path, text)))

    def test_cyclic_topology_needs_shared_path(self, tmp_path):
        text = MINIMAL.replace(
            "paths:\n  - {kind: circle, center: [0.0, 0.0], radius: 1000.0, direction: ccw}",
            "paths:\n"
            "  - {kind: circle, center: [0.0, 0.0], radius: 1000.0, direction: ccw}\n"
            "  - {kind: line, origin: [0.0, 0.0], heading: 0.0}")
        text = text.replace("theta: 1.5707963267948966}",
                            "theta: 1.5707963267948966}\n  - {id: 2, x: 0.0, y: 5.0, theta: 0.0, path: 1}")
        with pytest.raises(ConfigError, match="cyclic"):
            build_scenario(load_config(write_config(tmp_path, text)))

    def test_lonlat_spline_config(self, tmp_path):
        text = """
limits: {v_min: 10.0, v_max: 25.0, omega_max: 0.2, kappa_bound: 0.002}
params:
  explicit: {psi_max: 0.6303, rho_max: 122.1297, v_coord: 25.0}
coordination: {spacing: 0.0, topology: tree, parents: {}}
chi: {kind: linear, slope: 0.475}
paths:
  - kind: bspline
    lonlat_origin: [113.2167, 28.2029]
    lonlat: [[113.2167, 28.2029], [113.2371, 28.2209], [113.2167, 28.2390],
             [113.1963, 28.2570], [113.2167, 28.2751], [113.2371, 28.2931],
             [113.2167, 28.3112]]
uavs:
  - {id: 1, x: 0.0, y: 0.0, theta: 0.783}
run: {duration: 0.0, dt: 0.01}
"""
        sc = build_scenario(load_config(write_config(tmp_path, text)))
        assert sc.paths[0].point_at(0.0) == pytest.approx((0.0, 0.0), abs=1e-9)

    def test_fragment_round_trips(self, params, tmp_path):
        frag = yaml.safe_load(params_fragment(params))
        explicit = frag["params"]["explicit"]
        block = "  explicit:\n" + "\n".join(
            f"    {k}: {v!r}" for k, v in explicit.items())
        text = MINIMAL.replace(
            "  explicit: {psi_max: 0.6303, rho_max: 122.1297, v_coord: 25.0}", block)
        sc = build_scenario(load_config(write_config(tmp_path, text)))
        assert sc.params.psi_max == params.psi_max
        assert sc.params.chi_blend == params.chi_blend


class TestCli:
    def test_design_params(self, tmp_path, capsys):
        rc = main(["design-params", "--config", str(bundled_config_path("design")),
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "psi_max" in out and "slack" in out
        assert (tmp_path / "params_fragment.yaml").exists()

    def test_design_params_infeasible_curvature(self, tmp_path, capsys):
        text = """
limits: {v_min: 10.0, v_max: 25.0, omega_max: 0.2, kappa_bound: 0.01}
params: {design: {speed_margin: 1.0, alpha: 0.01}}
"""
        rc = main(["design-params", "--config", str(write_config(tmp_path, text)),
                   "--out", str(tmp_path)])
        assert rc == 1
        assert "curvature bound exceeds omega_max/v_max" in capsys.readouterr().err

    def test_simulate_zero_duration(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL)
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path),
                   "--duration", "0"])
        assert rc == 0
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert len(lines) == 2  # header + the t=0 row
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["n_steps"] == 0

    def test_simulate_writes_outputs(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL)
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 0
        for name in ("trace.csv", "metrics.json", "events.csv", "long.csv"):
            assert (tmp_path / name).exists()

    def test_simulate_runtime_abort(self, tmp_path, capsys):
        text = MINIMAL.replace("x: 1000.0", "x: 400.0")
        rc = main(["simulate", "--config", str(write_config(tmp_path, text)),
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "UAV 1" in capsys.readouterr().err

    def test_missing_config_flag(self, capsys, monkeypatch):
        monkeypatch.delenv("CPFSIM_CONFIG", raising=False)
        rc = main(["simulate"])
        assert rc == 1

    def test_env_var_config(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, MINIMAL)
        monkeypatch.setenv("CPFSIM_CONFIG", str(cfg))
        monkeypatch.setenv("CPFSIM_OUT", str(tmp_path))
        monkeypatch.setenv("CPFSIM_DURATION", "0")
        assert main(["simulate"]) == 0
        assert (tmp_path / "trace.csv").exists()

    def test_verify_single_suite(self, tmp_path, capsys):
        cfg = write_config(tmp_path, MINIMAL)
        rc = main(["verify", "--config", str(cfg), "--suite", "reset_bound"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "reset_bound" in out and "PASS" in out

    def test_verify_unknown_suite(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL)
        assert main(["verify", "--config", str(cfg), "--suite", "nope"]) == 1

    def test_verify_detects_broken_params(self, tmp_path, capsys):
        # heading box wider than the turn budget: invariance breaks
        text = MINIMAL.replace("psi_max: 0.6303, rho_max: 122.1297",
                               "psi_max: 0.78, rho_max: 20.0")
        cfg = write_config(tmp_path, text)
        rc = main(["verify", "--config", str(cfg), "--suite", "invariance"])
        assert rc == 3
        out = capsys.readouterr().out
        assert "FAIL" in out and "counterexample" in out

    def test_demo_escape(self, tmp_path, capsys):
        text = MINIMAL + "escape: {state_grid: [5, 5], control_grid: [5, 5]}\n"
        cfg = write_config(tmp_path, text)
        rc = main(["demo-escape", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 0
        assert "1.0000 exited" in capsys.readouterr().out
        report = json.loads((tmp_path / "escape_report.json").read_text())
        assert report["exit_fraction"] == 1.0
