"""Command-line interface: artifacts, exit codes, and determinism."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from deltapol.cli import main, run_scenario

ROOT3 = math.sqrt(3.0)


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSpectrum:
    def test_stdout_report(self, capsys):
        code, out, _ = run_cli(["spectrum", "--gn", "1", "--omega", "0"], capsys)
        assert code == 0
        assert out.splitlines() == [
            "epsilon_1 = 1",
            "epsilon_2 = -1",
            "epsilon_3 = -1",
            "epsilon_4 = 1",
            "theta = 0.78539816339744828",
        ]

    def test_csv_artifact_and_figure(self, tmp_path, capsys):
        out_file = tmp_path / "spec.csv"
        code, _, _ = run_cli(
            ["spectrum", "--gn", "2", "--omega", "1", "--out", str(out_file)], capsys
        )
        assert code == 0
        header, row = out_file.read_text().splitlines()
        assert header == "epsilon_1,epsilon_2,epsilon_3,epsilon_4,theta"
        values = [float(x) for x in row.split(",")]
        assert values[0] == pytest.approx(0.5 * (1.0 + math.hypot(1.0, 4.0)))
        assert (tmp_path / "spec.png").exists()

    def test_no_figure_flag(self, tmp_path, capsys):
        out_file = tmp_path / "spec.csv"
        code, _, _ = run_cli(
            ["spectrum", "--gn", "1", "--out", str(out_file), "--no-figure"], capsys
        )
        assert code == 0
        assert out_file.exists()
        assert not (tmp_path / "spec.png").exists()


class TestEvolveFock:
    def test_csv_header_and_conversion(self, capsys):
        code, out, _ = run_cli(
            ["evolve-fock", "--gn", "1", "--omega", "0", "--m", "1", "--n", "0",
             "--tmax", str(math.pi / 2), "--steps", "2", "--jobs", "2"],
            capsys,
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,n_a,n_b,n_A,n_C,entropy_a_bits"
        last = [float(x) for x in lines[-1].split(",")]
        # at t = π/2 with Omega = 0 the photon is fully converted to A
        assert last[1] == pytest.approx(0.0, abs=1e-12)
        assert last[3] == pytest.approx(1.0, abs=1e-12)

    def test_fock4_initial_from_scenario(self, tmp_path, capsys):
        scenario = {
            "model": {"g_N": 1.0, "Omega": 0.3},
            "initial": {"kind": "fock4", "occupation": [0, 0, 1, 0]},
            "run": {"kind": "evolve", "t_grid": {"tmax": 1.0, "steps": 3}},
        }
        cfg_path = tmp_path / "scen.json"
        cfg_path.write_text(json.dumps(scenario))
        code, out, _ = run_cli(["evolve-fock", "--config", str(cfg_path)], capsys)
        assert code == 0
        first = [float(x) for x in out.splitlines()[1].split(",")]
        assert first[3] == pytest.approx(1.0, abs=1e-12)  # starts in mode A

    def test_json_embeds_resolved_scenario(self, tmp_path, capsys):
        out_file = tmp_path / "run.json"
        code, _, _ = run_cli(
            ["evolve-fock", "--gn", "1.5", "--m", "1", "--n", "1", "--tmax", "2",
             "--steps", "4", "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["scenario"]["model"] == {"g_N": 1.5, "Omega": 0.0, "phi": 0.0}
        assert doc["scenario"]["initial"] == {"kind": "fock", "m": 1, "n": 1}
        assert doc["columns"][0] == "t"
        assert len(doc["rows"]) == 4


class TestEntanglementScan:
    def test_header_is_fixed(self, capsys):
        code, out, _ = run_cli(
            ["entanglement-scan", "--gn", "1", "--photon-limit",
             "--tmax", "1", "--steps", "3"],
            capsys,
        )
        assert code == 0
        assert out.splitlines()[0] == "t,entropy_bits"

    def test_scenario_paths_resolve_against_config_dir(self, tmp_path, capsys):
        scenario = {
            "model": {"g_N": 1.0, "Omega": 0.0},
            "initial": {"kind": "fock", "m": 1, "n": 1},
            "run": {
                "kind": "entanglement_scan",
                "photon_limit": True,
                "t_grid": {"tmax": 2.0, "steps": 5},
            },
            "output": {"path": "artifacts/scan.csv", "format": "csv"},
        }
        cfg_path = tmp_path / "scan.json"
        cfg_path.write_text(json.dumps(scenario))
        code = run_scenario(cfg_path)
        capsys.readouterr()
        assert code == 0
        written = tmp_path / "artifacts" / "scan.csv"
        assert written.exists()
        assert (tmp_path / "artifacts" / "scan.png").exists()

    def test_byte_identical_reruns(self, tmp_path, capsys):
        args = ["entanglement-scan", "--gn", "1", "--photon-limit", "--m", "1",
                "--n", "1", "--tmax", "3", "--steps", "50", "--no-figure"]
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert run_cli(args + ["--out", str(first)], capsys)[0] == 0
        assert run_cli(args + ["--out", str(second)], capsys)[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_peak_entropies_on_fine_grid(self, tmp_path, capsys):
        # Case-I pair scan over one full photon-block period: the maximum
        # reaches log₂3 and the half-period point reaches exactly 1 bit.
        out_file = tmp_path / "fig.csv"
        code, _, _ = run_cli(
            ["entanglement-scan", "--gn", "1", "--photon-limit", "--m", "1",
             "--n", "1", "--tmax", str(2.0 * math.pi), "--steps", "2000",
             "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        data = np.loadtxt(out_file, delimiter=",", skiprows=1)
        assert data[:, 1].max() == pytest.approx(math.log2(3.0), abs=1e-5)


class TestRevivalTimes:
    def test_half_ratio_table(self, capsys):
        code, out, err = run_cli(
            ["revival-times", "--p", "1", "--q", "2", "--gn", "1", "--count", "2"],
            capsys,
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "kind,k,time"
        table = {
            (cells[0], int(cells[1])): float(cells[2])
            for cells in (line.split(",") for line in lines[1:])
        }
        assert table[("revival", 0)] == pytest.approx(math.pi * ROOT3, abs=1e-12)
        assert table[("swap", 0)] == pytest.approx(math.pi * ROOT3 / 2.0, abs=1e-12)
        assert table[("swap", 1)] == pytest.approx(3.0 * math.pi * ROOT3 / 2.0, abs=1e-12)

    def test_odd_denominator_has_no_swaps(self, capsys):
        code, out, err = run_cli(
            ["revival-times", "--p", "2", "--q", "3", "--gn", "1"], capsys
        )
        assert code == 0
        assert all(not line.startswith("swap") for line in out.splitlines())
        assert "no swap times" in err

    def test_json_sequences(self, tmp_path, capsys):
        out_file = tmp_path / "revivals.json"
        code, _, _ = run_cli(
            ["revival-times", "--p", "1", "--q", "2", "--gn", "1",
             "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["sequences"]["revival"]["first"] == pytest.approx(math.pi * ROOT3)
        assert doc["sequences"]["swap"]["period"] == pytest.approx(math.pi * ROOT3)

    def test_irrational_ratio_is_a_validation_error(self, capsys):
        code, _, err = run_cli(
            ["revival-times", "--gn", "1", "--omega", "1"], capsys
        )
        assert code == 2
        assert "error" in err

    def test_model_driven_recognition(self, capsys):
        omega_half = 2.0 / ROOT3  # Omega/R = 1/2
        code, out, _ = run_cli(
            ["revival-times", "--gn", "1", "--omega", str(omega_half), "--count", "1"],
            capsys,
        )
        assert code == 0
        first_revival = float(out.splitlines()[1].split(",")[2])
        assert first_revival == pytest.approx(math.pi * ROOT3, rel=1e-9)


class TestEvolveCoherent:
    def test_header_and_initial_echo(self, tmp_path, capsys):
        scenario = {
            "model": {"g_N": 1.0, "Omega": 0.0},
            "initial": {"kind": "coherent", "alpha": [0.5, 0.0], "beta": [0.0, 0.25]},
            "run": {"kind": "evolve", "t_grid": {"tmax": 1.0, "steps": 4}},
        }
        cfg_path = tmp_path / "coh.json"
        cfg_path.write_text(json.dumps(scenario))
        code, out, _ = run_cli(["evolve-coherent", "--config", str(cfg_path)], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,re_a,im_a,re_b,im_b,re_A,im_A,re_C,im_C"
        t0 = [float(x) for x in lines[1].split(",")]
        assert t0[1:5] == pytest.approx([0.5, 0.0, 0.0, 0.25])

    def test_run_scenario_dispatch(self, tmp_path, capsys):
        scenario = {
            "model": {"g_N": 1.0, "Omega": 0.0},
            "initial": {"kind": "coherent", "alpha": 1.0},
            "run": {"kind": "evolve", "t_grid": {"times": [0.0, math.pi / 2]}},
            "output": {"path": "coh.csv"},
        }
        cfg_path = tmp_path / "coh.json"
        cfg_path.write_text(json.dumps(scenario))
        assert run_scenario(cfg_path) == 0
        capsys.readouterr()
        rows = (tmp_path / "coh.csv").read_text().splitlines()
        final = [float(x) for x in rows[-1].split(",")]
        # full conversion a → −iA at t = π/2 under Omega = 0
        assert final[1] == pytest.approx(0.0, abs=1e-12)
        assert final[6] == pytest.approx(-1.0, abs=1e-12)


class TestEvolveCat:
    def test_photon_limit_scan(self, capsys):
        code, out, _ = run_cli(
            ["evolve-cat", "--gn", "1", "--photon-limit", "--tmax", "1", "--steps", "3"],
            capsys,
        )
        assert code == 0
        header = out.splitlines()[0].split(",")
        assert header[0] == "t"
        assert header[-1] == "entropy_bits"
        assert "re_a_plus" in header and "im_b_minus" in header

    def test_generic_time_is_rejected_outside_the_limit(self, capsys):
        code, _, err = run_cli(
            ["evolve-cat", "--gn", "1", "--omega", "0.5", "--tmax", "1", "--steps", "3"],
            capsys,
        )
        assert code == 2
        assert "photon-only" in err


class TestAdiabaticCli:
    def test_forward_report(self, tmp_path, capsys):
        out_file = tmp_path / "store.json"
        code, _, _ = run_cli(
            ["adiabatic-transfer", "--gn", "1", "--m", "1", "--n", "0",
             "--tmax", "50", "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["phase_tuned"] is True
        assert doc["storage_grade"] is True
        assert doc["fidelity_vs_target"] > 0.99
        assert doc["exact_target_fidelity"] > 0.97
        assert doc["scenario"]["model"]["family"] == "tanh"
        assert doc["scenario"]["model"]["hold_tail"] is True
        assert any(e["idx"] == [0, 0, 0, 1] for e in doc["exact_state"]["amplitudes"])

    def test_inverse_report_with_figure(self, tmp_path, capsys):
        out_file = tmp_path / "retrieve.json"
        code, _, _ = run_cli(
            ["inverse-transfer", "--gn", "1", "--na", "1", "--nc", "0",
             "--tmax", "50", "--out", str(out_file)],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["exact_target_fidelity"] > 0.97
        assert (tmp_path / "retrieve.png").exists()

    def test_csv_report_is_one_row(self, tmp_path, capsys):
        out_file = tmp_path / "store.csv"
        code, _, _ = run_cli(
            ["adiabatic-transfer", "--gn", "1", "--tmax", "50",
             "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("dynamic_phase_integral,hold,phase_tuned")


class TestValidateBosonization:
    def test_scaling_report_outside_regime_warns(self, tmp_path, capsys):
        out_file = tmp_path / "scaling.json"
        with pytest.warns(UserWarning):
            code, _, err = run_cli(
                ["validate-bosonization", "--N", "4,8", "--s", "2", "--omega", "0.7",
                 "--tmax", "3", "--steps", "7", "--out", str(out_file), "--no-figure"],
                capsys,
            )
        assert code == 0
        doc = json.loads(out_file.read_text())
        ratio = doc["ratios"]["4/8"]
        assert 1.2 < ratio < 3.5
        assert "ratio err(4)/err(8)" in err

    def test_single_excitation_ratio_degenerates(self, tmp_path, capsys):
        # One shared excitation is represented exactly at any N, so both
        # errors vanish and the scaling ratio is undefined (null), not 2.
        out_file = tmp_path / "degenerate.json"
        code, _, _ = run_cli(
            ["validate-bosonization", "--N", "4,8", "--s", "1", "--omega", "0.7",
             "--tmax", "3", "--steps", "7", "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["ratios"]["4/8"] is None
        assert doc["errors"]["4"] < 1e-12
        assert doc["errors"]["8"] < 1e-12

    def test_csv_rows(self, tmp_path, capsys):
        out_file = tmp_path / "scaling.csv"
        with pytest.warns(UserWarning):
            code, _, _ = run_cli(
                ["validate-bosonization", "--N", "4,8", "--s", "2", "--omega", "0.7",
                 "--tmax", "3", "--steps", "7", "--out", str(out_file), "--no-figure"],
                capsys,
            )
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0] == "N,max_trace_distance"
        assert [int(line.split(",")[0]) for line in lines[1:]] == [4, 8]

    def test_bad_n_list_rejected(self, capsys):
        code, _, err = run_cli(
            ["validate-bosonization", "--N", "4,banana", "--s", "1"], capsys
        )
        assert code == 2
        assert "comma-separated" in err


class TestOracleCompare:
    def test_defect_reported_on_stdout(self, capsys):
        code, out, _ = run_cli(
            ["oracle-compare", "--gn", "1", "--omega", "0.7", "--m", "2", "--n", "1",
             "--tmax", "10", "--steps", "50"],
            capsys,
        )
        assert code == 0
        assert out.startswith("max fidelity defect = ")
        assert float(out.split("=")[1]) < 1e-10

    def test_csv_artifact(self, tmp_path, capsys):
        out_file = tmp_path / "defects.csv"
        code, out, _ = run_cli(
            ["oracle-compare", "--gn", "1", "--omega", "0.3", "--tmax", "5",
             "--steps", "11", "--out", str(out_file), "--no-figure"],
            capsys,
        )
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0] == "t,fidelity_defect"
        assert len(lines) == 12


class TestErrorHandling:
    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(["spectrum", "--config", "/nonexistent/x.json"], capsys)
        assert code == 2
        assert "cannot read" in err

    def test_malformed_json_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run_cli(["spectrum", "--config", str(bad)], capsys)
        assert code == 2
        assert "not valid JSON" in err

    def test_run_kind_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps({"run": {"kind": "entanglement_scan"}}))
        code, _, err = run_cli(["evolve-fock", "--config", str(cfg)], capsys)
        assert code == 2
        assert "does not match this subcommand" in err

    def test_unknown_scenario_kind(self, tmp_path, capsys):
        cfg = tmp_path / "odd.json"
        cfg.write_text(json.dumps({"run": {"kind": "teleport"}}))
        assert run_scenario(cfg) == 2
        assert "run.kind" in capsys.readouterr().err

    def test_initial_kind_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "cat.json"
        cfg.write_text(
            json.dumps({"initial": {"kind": "cat"}, "run": {"kind": "evolve"}})
        )
        code, _, err = run_cli(["evolve-fock", "--config", str(cfg)], capsys)
        assert code == 2
        assert "evolve-coherent or evolve-cat" in err

    def test_schedule_model_rejected_for_static_run(self, tmp_path, capsys):
        cfg = tmp_path / "sched.json"
        cfg.write_text(
            json.dumps(
                {
                    "model": {"g_N": 1.0, "family": "tanh", "omega_max": 20.0,
                              "steepness": 0.1, "center": 20.0, "duration": 40.0,
                              "sign": -1.0, "hold_tail": False},
                    "run": {"kind": "evolve"},
                }
            )
        )
        code, _, err = run_cli(["evolve-fock", "--config", str(cfg)], capsys)
        assert code == 2
        assert "static coupling model" in err

    def test_no_subcommand_prints_help(self, capsys):
        code, _, err = run_cli([], capsys)
        assert code == 2
        assert "usage" in err.lower()

    def test_bad_jobs_value(self, capsys):
        code, _, err = run_cli(
            ["evolve-fock", "--gn", "1", "--jobs", "0", "--steps", "3"], capsys
        )
        assert code == 2
        assert "--jobs" in err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "deltapol.cli", "spectrum", "--gn", "1", "--omega", "0"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert result.returncode == 0
    assert result.stdout.splitlines()[0] == "epsilon_1 = 1"
