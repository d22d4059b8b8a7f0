import json
import math

import numpy as np
import pytest

from mdfc.cli import (
    ConfigError,
    apply_overrides,
    main,
    parse_config,
    resolve_config,
)

FIG1_CONFIG = {
    "model": {"omega0": 0.0},
    "bath": {"alpha": 0.05, "omega_c": 1.0, "T0": True},
    "scheme": {"kind": "preparation", "eta": math.pi / 2, "zeta": 0.0, "R": 4.0},
    "solver": {"t_max": 1.0, "dt": 0.01, "inner_nodes": 32, "record_every": 10},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestParseConfig:
    def test_reference_config_resolves(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, FIG1_CONFIG))
        assert cfg["scheme"]["R"] == 4.0
        assert cfg["bath"]["alpha"] == 0.05
        assert cfg["bath"]["T0"] is True
        assert cfg["model"]["omega0"] == 0.0
        assert cfg["solver"]["t_max"] == 1.0
        assert cfg["sweep"]["refine_tol"] == 1e-3

    def test_defaults_expand(self, tmp_path):
        cfg = parse_config(
            write_config(
                tmp_path,
                {
                    "bath": {"alpha": 0.1},
                    "scheme": {"kind": "do_nothing"},
                },
            )
        )
        assert cfg["bath"]["omega_c"] == 1.0
        assert cfg["solver"]["dt"] == 0.01
        assert cfg["solver"]["inner_nodes"] == 32

    def test_missing_bath_block_named(self, tmp_path):
        path = write_config(tmp_path, {"scheme": {"kind": "do_nothing"}})
        with pytest.raises(ConfigError, match="bath"):
            parse_config(path)

    def test_unknown_key_named(self, tmp_path):
        bad = dict(FIG1_CONFIG, extra={"x": 1})
        with pytest.raises(ConfigError, match="unknown key: extra"):
            parse_config(write_config(tmp_path, bad))

    def test_unknown_nested_key_named(self, tmp_path):
        bad = json.loads(json.dumps(FIG1_CONFIG))
        bad["bath"]["gamma"] = 1.0
        with pytest.raises(ConfigError, match="bath.gamma"):
            parse_config(write_config(tmp_path, bad))

    def test_chi_out_of_range_named(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05},
            "scheme": {"kind": "pair_zy", "chi": 2.0, "eta": 0.5, "R": 0.5},
        }
        with pytest.raises(ConfigError, match="scheme.chi"):
            parse_config(write_config(tmp_path, cfg))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="malformed JSON"):
            parse_config(str(path))

    def test_scientific_notation_accepted(self, tmp_path):
        cfg = json.loads(json.dumps(FIG1_CONFIG))
        cfg["bath"]["alpha"] = 5e-2
        parsed = parse_config(write_config(tmp_path, cfg))
        assert parsed["bath"]["alpha"] == 0.05

    def test_beta_and_t0_exclusive(self, tmp_path):
        cfg = json.loads(json.dumps(FIG1_CONFIG))
        cfg["bath"]["beta"] = 2.0
        with pytest.raises(ConfigError, match="bath"):
            parse_config(write_config(tmp_path, cfg))

    def test_overrides_take_precedence(self):
        raw = apply_overrides(FIG1_CONFIG, ["bath.alpha=0.1", "scheme.R=2.0"])
        cfg = resolve_config(raw)
        assert cfg["bath"]["alpha"] == 0.1
        assert cfg["scheme"]["R"] == 2.0

    def test_bad_override_rejected(self):
        with pytest.raises(ConfigError):
            apply_overrides(FIG1_CONFIG, ["no_equals_sign"])
        with pytest.raises(ConfigError):
            apply_overrides(FIG1_CONFIG, ["bath.alpha=notjson"])


def run_cli(args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def quick_prepare_args(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("prepare")
    cfg = {
        "bath": {"alpha": 0.05, "T0": True},
        "scheme": {"kind": "preparation", "eta": 1.0, "zeta": 0.0, "R": 4.0},
        "solver": {"t_max": 0.1, "dt": 0.05, "record_every": 1},
        "sweep": {"axes": {"eta": {"start": 0.0, "stop": math.pi, "count": 7}}},
    }
    return write_config(tmp, cfg), tmp


class TestCommands:
    def test_prepare_row_count_and_format(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05, "T0": True},
            "scheme": {"kind": "preparation", "eta": 1.0, "zeta": 0.0, "R": 4.0},
            "solver": {"t_max": 0.1, "dt": 0.05, "record_every": 1},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(
            ["prepare", "--config", path, "--out", out, "--nodes", "2,2"]
        ) == 0
        raw = (out / "prepare.csv").read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "eta,avg_fidelity"
        assert len(lines) == 62  # default 61-point grid plus header
        manifest = json.loads((out / "prepare_manifest.json").read_text())
        assert manifest["command"] == "prepare"
        assert manifest["outputs"] == ["prepare.csv"]

    def test_prepare_respects_configured_axis(self, quick_prepare_args, tmp_path):
        path, _ = quick_prepare_args
        out = tmp_path / "axis"
        assert run_cli(
            ["prepare", "--config", path, "--out", out, "--nodes", "2,2"]
        ) == 0
        lines = (out / "prepare.csv").read_text().splitlines()
        assert len(lines) == 8  # 7 grid points plus header

    def test_purity_command(self, tmp_path):
        cfg = dict(FIG1_CONFIG, solver={"t_max": 0.2, "dt": 0.02})
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(["purity", "--config", path, "--out", out]) == 0
        lines = (out / "purity.csv").read_text().splitlines()
        assert lines[0] == "t,purity"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(0.5 <= v <= 1.0 + 1e-12 for v in values)

    def test_protect_pair_command(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05, "T0": True},
            "scheme": {
                "kind": "pair_zy",
                "chi": 1.0,
                "eta": 0.5,
                "theta": math.pi / 6,
                "R": 0.5,
            },
            "solver": {"t_max": 0.5, "dt": 0.01, "record_every": 25},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(["protect-pair", "--config", path, "--out", out]) == 0
        lines = (out / "protect-pair.csv").read_text().splitlines()
        assert lines[0] == "t,fidelity"
        assert lines[1].startswith("0,1")

    def test_protect_unknown_command(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05, "T0": True},
            "scheme": {"kind": "do_nothing"},
            "solver": {"t_max": 0.2, "dt": 0.02},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(
            ["protect-unknown", "--config", path, "--out", out, "--nodes", "4,4"]
        ) == 0
        lines = (out / "protect-unknown.csv").read_text().splitlines()
        assert lines[0] == "t,avg_fidelity"

    def test_protect_mixed_long_format(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05, "T0": True},
            "scheme": {"kind": "mixed", "theta": math.pi / 3, "p_plus": 0.5,
                       "R": 0.5},
            "solver": {"t_max": 0.2, "dt": 0.02, "record_every": 5},
            "sweep": {"axes": {"eta": {"start": 0.0, "stop": 1.0, "count": 3}}},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(["protect-mixed", "--config", path, "--out", out]) == 0
        lines = (out / "protect-mixed.csv").read_text().splitlines()
        assert lines[0] == "eta,t,fidelity"
        assert len(lines) == 1 + 3 * 3  # 3 eta values x 3 recorded times

    def test_sweep_command_reports_optima(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.05, "T0": True},
            "scheme": {"kind": "mixed", "theta": math.pi / 3, "p_plus": 0.5,
                       "R": 0.5},
            "solver": {"t_max": 0.5, "dt": 0.025, "record_every": 20},
            "sweep": {
                "axes": {"eta": {"start": 0.0, "stop": math.pi, "count": 17}},
                "refine_tol": 1e-2,
            },
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(["sweep", "--config", path, "--out", out]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "eta,value"
        assert len(lines) == 18
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert len(manifest["optima"]) == 2

    def test_validate_command_passes(self, tmp_path):
        cfg = dict(FIG1_CONFIG, solver={"t_max": 0.5, "dt": 0.01})
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        code = run_cli(
            ["validate", "--config", path, "--out", out, "--seed", "7",
             "--trajectories", "2000"]
        )
        assert code == 0
        lines = (out / "validate.csv").read_text().splitlines()
        assert lines[0] == "check_name,max_error,tolerance,pass"
        names = [line.split(",")[0] for line in lines[1:]]
        assert names == [
            "exact_dephasing",
            "lindblad_consistency",
            "mc_unravelling",
            "step_halving",
        ]
        assert all(line.endswith("true") for line in lines[1:])

    def test_validate_detects_coarse_step(self, tmp_path):
        cfg = {
            "bath": {"alpha": 0.5, "T0": True},
            "scheme": {"kind": "preparation", "eta": 1.0, "zeta": 0.0, "R": 1.0},
            "solver": {"t_max": 4.0, "dt": 1.0, "record_every": 1},
        }
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        code = run_cli(
            ["validate", "--config", path, "--out", out, "--trajectories", "100"]
        )
        assert code == 1
        lines = (out / "validate.csv").read_text().splitlines()
        failing = [line for line in lines[1:] if line.endswith("false")]
        assert failing

    def test_missing_config_is_config_error(self, tmp_path):
        assert run_cli(["purity", "--config", tmp_path / "nope.json"]) == 2

    def test_range_error_exit_code(self, tmp_path):
        cfg = json.loads(json.dumps(FIG1_CONFIG))
        cfg["scheme"]["eta"] = 9.0
        assert run_cli(["purity", "--config", write_config(tmp_path, cfg)]) == 2

    def test_override_recorded_in_manifest(self, tmp_path):
        cfg = dict(FIG1_CONFIG, solver={"t_max": 0.2, "dt": 0.02})
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(
            ["purity", "--config", path, "--out", out, "bath.alpha=0.01"]
        ) == 0
        manifest = json.loads((out / "purity_manifest.json").read_text())
        assert manifest["config"]["bath"]["alpha"] == 0.01
        assert manifest["overrides"] == ["bath.alpha=0.01"]

    def test_rerun_byte_identical(self, tmp_path):
        cfg = dict(FIG1_CONFIG, solver={"t_max": 0.5, "dt": 0.01})
        path = write_config(tmp_path, cfg)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(
                ["validate", "--config", path, "--out", out, "--seed", "3",
                 "--trajectories", "1000"]
            ) == 0
            outs.append((out / "validate.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_csv_fifteen_significant_digits(self, tmp_path):
        cfg = dict(FIG1_CONFIG, solver={"t_max": 0.2, "dt": 0.02})
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_cli(["purity", "--config", path, "--out", out]) == 0
        lines = (out / "purity.csv").read_text().splitlines()
        digits = lines[-1].split(",")[1].replace(".", "").lstrip("0")
        assert len(digits) >= 13  # %.15g keeps up to 15 significant digits
