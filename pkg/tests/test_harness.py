import dataclasses
from pathlib import Path

import numpy as np
import pytest

from specmhd import cli, galerkin as gal, harness
from specmhd.config import (
    RunConfig,
    load_config,
    load_config_text,
    replace_config,
    serialize_config,
)
from specmhd.errors import ConfigError
from specmhd.initial_conditions import build_initial_state
from specmhd.integrator import StepConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
[step]
dt = 1e-3
t_end = 0.01
"""


class TestConfigLoading:
    def test_minimal_fills_defaults(self, tmp_path):
        path = tmp_path / "min.cfg"
        path.write_text(MINIMAL)
        cfg = load_config(path)
        assert cfg.constitutive.power_law_exponent == 3.0
        assert cfg.grid_points == 16
        assert cfg.initial_family == "single_mode"

    def test_small_exponent_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(MINIMAL + "\n[constitutive]\npower_law_exponent = 1.5\n")
        with pytest.raises(ConfigError, match="power_law_exponent must exceed 2"):
            load_config(path)

    def test_zero_temperature_floor_start_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(MINIMAL + "\n[initial]\nfamily = single_mode\ntemperature_base = 0.0\n")
        with pytest.raises(ConfigError, match="temperature_floor"):
            load_config(path)

    def test_unknown_key_and_section_reported(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(MINIMAL + "\n[domain]\nbox_sized = 1.0\n\n[mystery]\nx = 1\n")
        with pytest.raises(ConfigError) as err:
            load_config(path)
        msg = str(err.value)
        assert "box_sized" in msg and "mystery" in msg

    def test_parse_error_reported(self, tmp_path):
        path = tmp_path / "broken.cfg"
        path.write_text("not an ini file at all [[[")
        with pytest.raises(ConfigError, match="parse error"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.cfg")

    def test_insufficient_resolution_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(MINIMAL + "\n[truncation]\nvelocity_modes = 10000\n")
        with pytest.raises(ConfigError, match="insufficient resolution"):
            load_config(path)

    def test_round_trip_identity(self, tmp_path):
        cfg = load_config(CONFIGS / "single_mode_mhd.cfg")
        text = serialize_config(cfg)
        again = load_config_text(text)
        assert again == cfg
        assert serialize_config(again) == text

    def test_shipped_configs_load(self):
        for path in sorted(CONFIGS.glob("*.cfg")):
            load_config(path)

    def test_auto_regularization(self, tmp_path):
        path = tmp_path / "auto.cfg"
        path.write_text(MINIMAL + "\n[truncation]\ndensity_regularization = auto\n")
        cfg = load_config(path)
        assert cfg.density_regularization == pytest.approx(0.25 * (cfg.box_size / 16) ** 2)


class TestInitialFamilies:
    @pytest.mark.parametrize("family", ["single_mode", "orszag_tang", "random_band", "layered_density"])
    def test_families_build_admissible_states(self, family):
        cfg = RunConfig(
            grid_points=16,
            velocity_modes=12,
            temperature_modes=13,
            magnetic_modes=12,
            initial_family=family,
            initial_params={"velocity_amplitude": 0.1, "magnetic_amplitude": 0.1, "seed": 1},
        )
        basis = harness.build_basis_for(cfg)
        state = build_initial_state(cfg, basis)
        assert not state.validate(cfg.constitutive)
        rep = gal.energy_report(cfg.constitutive, state)
        assert np.isfinite(rep["E_kin"]) and np.isfinite(rep["E_mag"])
        assert rep["div_u_max"] < 1e-12 and rep["div_H_max"] < 1e-12

    def test_layered_density_profile(self):
        cfg = RunConfig(
            initial_family="layered_density",
            initial_params={"density_amplitude": 0.25, "velocity_amplitude": 0.05},
        )
        basis = harness.build_basis_for(cfg)
        state = build_initial_state(cfg, basis)
        rho = state.rho.to_grid().data
        assert rho.max() == pytest.approx(1.25, rel=1e-12)
        assert rho.min() == pytest.approx(0.75, rel=1e-12)
        u = basis.vector_grid(state.a)
        # shear is in the z-component and varies along x only
        assert np.max(np.abs(u[0])) < 1e-13 and np.max(np.abs(u[1])) < 1e-13
        assert np.max(np.abs(u[2])) == pytest.approx(0.05, rel=1e-10)

    def test_random_band_nested_truncations(self):
        # truncated runs take the leading slice of one master vector
        common = {"seed": 11, "velocity_amplitude": 0.3, "magnetic_amplitude": 0.2}
        cfg8 = RunConfig(velocity_modes=8, magnetic_modes=8, temperature_modes=9,
                         initial_family="random_band", initial_params=common)
        cfg16 = RunConfig(velocity_modes=16, magnetic_modes=16, temperature_modes=17,
                          initial_family="random_band", initial_params=common)
        b8 = harness.build_basis_for(cfg8)
        b16 = harness.build_basis_for(cfg16)
        s8 = build_initial_state(cfg8, b8)
        s16 = build_initial_state(cfg16, b16)
        np.testing.assert_array_equal(s8.a, s16.a[:8])
        np.testing.assert_array_equal(s8.c, s16.c[:8])


class TestRunOutputs:
    def test_zero_initial_data_passes(self, tmp_path):
        cfg = RunConfig(
            grid_points=8,
            velocity_modes=12,
            temperature_modes=13,
            magnetic_modes=12,
            step=StepConfig(dt=1e-3, t_end=0.005),
        )
        rep = harness.run(cfg, output_dir=str(tmp_path / "zero"), quiet=True)
        assert rep.exit_code == harness.EXIT_PASS
        assert rep.summary["final"]["E_kin"] == 0.0
        assert rep.summary["final"]["E_mag"] == 0.0

    def test_run_directory_contents(self, tmp_path):
        cfg = load_config(CONFIGS / "magnetic_decay.cfg")
        cfg = replace_config(cfg, step=dataclasses.replace(cfg.step, t_end=0.01), snapshots=True)
        rep = harness.run(cfg, output_dir=str(tmp_path / "out"), quiet=True)
        outdir = rep.output_dir
        for name in ("config.cfg", "diagnostics.csv", "summary.json", "schema.json"):
            assert (outdir / name).exists()
        # snapshot pairs for each field
        for stem in ("rho_final", "velocity_final", "magnetic_final", "theta_final"):
            assert (outdir / f"{stem}.bin").exists() and (outdir / f"{stem}.json").exists()
        csv = (outdir / "diagnostics.csv").read_text().splitlines()
        assert csv[0].split(",")[0] == "t"
        assert len(csv) == rep.summary["samples"] + 1
        # the written config reloads to the exact run configuration
        assert load_config(outdir / "config.cfg") == cfg

    def test_decay_rate_in_summary(self, tmp_path):
        cfg = load_config(CONFIGS / "magnetic_decay.cfg")
        rep = harness.run(cfg, output_dir=str(tmp_path / "decay"), quiet=True)
        k2 = 1.0  # lowest shell at box 2 pi
        assert abs(rep.summary["magnetic_decay_rate"] - cfg.constitutive.magnetic_diffusivity * k2) < 1e-4

    def test_determinism_byte_identical(self, tmp_path):
        cfg = load_config(CONFIGS / "magnetic_decay.cfg")
        cfg = replace_config(cfg, step=dataclasses.replace(cfg.step, t_end=0.02))
        harness.run(cfg, output_dir=str(tmp_path / "a"), quiet=True)
        harness.run(cfg, output_dir=str(tmp_path / "b"), quiet=True)
        assert (tmp_path / "a/diagnostics.csv").read_bytes() == (tmp_path / "b/diagnostics.csv").read_bytes()

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(harness.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        cfg = RunConfig(
            grid_points=8,
            velocity_modes=12,
            temperature_modes=13,
            magnetic_modes=12,
            step=StepConfig(dt=1e-3, t_end=0.002),
        )
        rep = harness.run(cfg, quiet=True)
        assert str(rep.output_dir).startswith(str(tmp_path / "root"))
        assert (rep.output_dir / "summary.json").exists()


class TestSweeps:
    def test_two_value_sweep_rejected(self):
        cfg = load_config(CONFIGS / "sweep_eps.cfg")
        cfg = replace_config(cfg, sweep_values=(4e-3, 2e-3))
        with pytest.raises(ConfigError, match="need >=3 values"):
            harness.convergence_study(cfg, quiet=True)

    def test_no_sweep_section_rejected(self):
        cfg = load_config(CONFIGS / "magnetic_decay.cfg")
        with pytest.raises(ConfigError, match="no \\[sweep\\] section"):
            harness.convergence_study(cfg, quiet=True)

    def test_diffusion_only_differences_vanish(self, tmp_path):
        # single magnetic mode: every truncation resolves the dynamics exactly
        cfg = load_config(CONFIGS / "magnetic_decay.cfg")
        cfg = replace_config(
            cfg,
            step=dataclasses.replace(cfg.step, t_end=0.02),
            sweep_kind="modes",
            sweep_values=(12, 16, 20),
        )
        study = harness.convergence_study(cfg, output_dir=str(tmp_path / "study"), quiet=True)
        for pair in study.pairs:
            assert pair["u_diff"] < 1e-15
            assert pair["rho_diff"] < 1e-15
        assert (tmp_path / "study" / "study.json").exists()


class TestCheckSuite:
    def test_selector_filters(self, capsys):
        ok, lines = harness.check(suite="constitutive", quiet=True)
        assert ok and len(lines) == 1
        assert "constitutive" in lines[0]

    def test_unknown_selector(self):
        with pytest.raises(ConfigError, match="no checks match"):
            harness.check(suite="astrology")

    def test_lorentz_sign_flip_fails_energy_identity(self, monkeypatch):
        monkeypatch.setattr(gal, "_LORENTZ_SIGN", -1.0)
        ok, lines = harness.check(suite="galerkin.energy_identity", quiet=True)
        assert not ok
        assert "FAIL" in lines[0]


class TestCli:
    def test_run_exit_codes(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text(MINIMAL + "\n[constitutive]\npower_law_exponent = 1.0\n")
        assert cli.main(["run", "--config", str(bad)]) == harness.EXIT_CONFIG

        good = tmp_path / "good.cfg"
        good.write_text(
            MINIMAL
            + "\n[domain]\ngrid_points = 8\n\n[truncation]\nvelocity_modes = 12\n"
            + "temperature_modes = 13\nmagnetic_modes = 12\n"
            + "\n[initial]\nfamily = single_mode\nmagnetic_amplitude = 0.2\n"
        )
        code = cli.main(
            ["run", "--config", str(good), "--output-dir", str(tmp_path / "out"), "--quiet"]
        )
        assert code == harness.EXIT_PASS
        assert (tmp_path / "out" / "diagnostics.csv").exists()

    def test_seed_override_changes_initial_data(self, tmp_path):
        cfg_path = tmp_path / "rb.cfg"
        cfg_path.write_text(
            MINIMAL
            + "\n[domain]\ngrid_points = 8\n\n[truncation]\nvelocity_modes = 12\n"
            + "temperature_modes = 13\nmagnetic_modes = 12\n"
            + "\n[initial]\nfamily = random_band\nseed = 1\nvelocity_amplitude = 0.1\n"
        )
        cli.main(["run", "--config", str(cfg_path), "--output-dir", str(tmp_path / "s1"), "--quiet", "--seed", "1"])
        cli.main(["run", "--config", str(cfg_path), "--output-dir", str(tmp_path / "s2"), "--quiet", "--seed", "2"])
        a = (tmp_path / "s1/diagnostics.csv").read_bytes()
        b = (tmp_path / "s2/diagnostics.csv").read_bytes()
        assert a != b
        saved = load_config(tmp_path / "s2" / "config.cfg")
        assert saved.initial_params["seed"] == 2

    def test_numerical_abort_exit_code(self, tmp_path):
        blowup = tmp_path / "blowup.cfg"
        blowup.write_text(
            "[domain]\ngrid_points = 8\n\n"
            "[truncation]\nvelocity_modes = 12\ntemperature_modes = 13\nmagnetic_modes = 12\n\n"
            "[step]\ndt = 50.0\nt_end = 500.0\nscheme = explicit-rk4\n\n"
            "[initial]\nfamily = random_band\nseed = 3\nvelocity_amplitude = 0.5\n"
        )
        with np.errstate(all="ignore"):
            code = cli.main(
                ["run", "--config", str(blowup), "--output-dir", str(tmp_path / "bl"), "--quiet"]
            )
        assert code == harness.EXIT_NUMERICAL
        # partial outputs are retained
        assert (tmp_path / "bl" / "summary.json").exists()
        assert (tmp_path / "bl" / "diagnostics.csv").exists()

    def test_check_subcommand(self):
        assert cli.main(["check", "--suite", "harness.config_round_trip", "--quiet"]) == 0

    def test_sweep_subcommand_bad_config(self, tmp_path):
        bad = tmp_path / "nosweep.cfg"
        bad.write_text(MINIMAL)
        assert cli.main(["sweep", "--config", str(bad)]) == harness.EXIT_CONFIG
