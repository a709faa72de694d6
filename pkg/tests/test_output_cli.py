"""Serialization formats and the command-line entry points."""

import os
import stat
from dataclasses import replace

import numpy as np
import pytest

from phenofield import (ScalarField, build_uniform_mesh, config_to_text,
                        default_config, parse_config)
from phenofield.cli import main
from phenofield.observables import CSV_HEADER
from phenofield.output import write_vtk


def desk_config_text(nx=8, t_end=0.003, theta=0.5, alpha=5e2, stride=0):
    cfg = replace(default_config(), nx=nx, t_end=t_end, theta=theta, alpha=alpha)
    cfg = replace(cfg, output=replace(cfg.output, snapshot_stride=stride))
    return config_to_text(cfg)


def parse_vtk(path):
    """Minimal legacy-VTK reader used only to round-trip our own files."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2] == "ASCII"
    assert lines[3] == "DATASET UNSTRUCTURED_GRID"
    n_points = int(lines[4].split()[1])
    points = np.array([[float(v) for v in lines[5 + i].split()] for i in range(n_points)])
    idx = 5 + n_points
    n_cells = int(lines[idx].split()[1])
    cells = np.array([[int(v) for v in lines[idx + 1 + i].split()[1:]] for i in range(n_cells)])
    idx += 1 + n_cells
    assert lines[idx].startswith("CELL_TYPES")
    cell_types = [int(lines[idx + 1 + i]) for i in range(n_cells)]
    idx += 1 + n_cells
    assert lines[idx] == f"POINT_DATA {n_points}"
    scalar_name = lines[idx + 1].split()[1]
    assert lines[idx + 2] == "LOOKUP_TABLE default"
    values = np.array([float(lines[idx + 3 + i]) for i in range(n_points)])
    return points, cells, cell_types, scalar_name, values


class TestVtk:
    def test_single_cell_snapshot(self, tmp_path):
        mesh = build_uniform_mesh(1)
        path = tmp_path / "snap.vtk"
        write_vtk(ScalarField(np.ones(4), "phi"), mesh, str(path))
        points, cells, cell_types, name, values = parse_vtk(str(path))
        assert points.shape == (4, 3)
        assert np.all(points[:, 2] == 0.0)
        assert cells.shape == (2, 3)
        assert cell_types == [5, 5]
        assert name == "phi"
        np.testing.assert_array_equal(values, 1.0)

    def test_round_trip_exact_values(self, tmp_path):
        mesh = build_uniform_mesh(3)
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(mesh.n_nodes)
        path = tmp_path / "field.vtk"
        write_vtk(ScalarField(vals, "sigma"), mesh, str(path))
        points, cells, _, name, parsed = parse_vtk(str(path))
        assert name == "sigma"
        np.testing.assert_array_equal(parsed, vals)  # 17 digits round-trip
        np.testing.assert_array_equal(cells, mesh.triangles)


class TestCmdRun:
    def test_writes_expected_files(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(stride=2, t_end=0.004))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        obs = out / "observables.csv"
        assert obs.exists()
        lines = obs.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 5  # record at t=0 plus one per step
        for probe in ("A", "B", "C"):
            assert (out / f"phenotype_probe_{probe}.csv").exists()
        assert (out / "field_phi_0.vtk").exists()
        assert (out / "field_sigma_4.vtk").exists()
        manifest = (out / "manifest.txt").read_text()
        assert "exit_status = 0" in manifest
        for line in manifest.splitlines():
            if line.startswith("  ") and (line.strip().endswith(".csv")
                                          or line.strip().endswith(".vtk")):
                assert os.path.exists(line.strip())

    def test_initial_snapshot_is_pure_indicator(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(nx=10, t_end=0.001, stride=1))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        _, _, _, _, values = parse_vtk(str(out / "field_phi_0.vtk"))
        assert set(np.unique(values)) == {-1.0, 1.0}

    def test_zero_horizon_single_row(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(t_end=0.0))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "observables.csv").read_text().splitlines()
        assert len(lines) == 2  # header plus the t = 0 row

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(t_end=0.003))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["run", "--config", str(cfg_path), "--out", str(out2)]) == 0
        assert (out1 / "observables.csv").read_bytes() == (out2 / "observables.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text("eps = 2.0\n")
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path / "o")]) == 3

    def test_out_defaults_to_config_dir(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = replace(default_config(), nx=8, t_end=0.001)
        cfg = replace(cfg, output=replace(cfg.output, dir="from_config"))
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(config_to_text(cfg))
        assert main(["run", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "from_config" / "observables.csv").exists()

    def test_unwritable_out_dir_leaves_nothing(self, tmp_path):
        if os.geteuid() == 0:
            pytest.skip("permission bits do not bind for root")
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text())
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        out = locked / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 3
        assert not out.exists()

    def test_out_dir_inside_regular_file_leaves_nothing(self, tmp_path):
        # works for any euid: a path component that is a plain file can
        # never become a directory
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text())
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        out = blocker / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 3
        assert not out.exists()


class TestCmdSweep:
    def test_theta_sweep_layout(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(t_end=0.002))
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--param", "theta",
                     "--values", "0,0.3", "--out", str(out)]) == 0
        assert (out / "theta_0" / "observables.csv").exists()
        assert (out / "theta_0.3" / "observables.csv").exists()
        comparison = (out / "comparison.csv").read_text().splitlines()
        assert comparison[0].startswith("time,tumour_measure_0,")
        assert "tumour_measure_0.3" in comparison[0]
        assert len(comparison) == 1 + 3

    def test_ic_sweep_uses_subrecord_key(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text(t_end=0.001, alpha=0.0))
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--param", "ic_f.y_bar0",
                     "--values", "1.0,1.7", "--out", str(out)]) == 0
        assert (out / "ic_f_y_bar0_1" / "observables.csv").exists()
        assert (out / "ic_f_y_bar0_1.7" / "observables.csv").exists()

    def test_empty_values_rejected_before_running(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text())
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--param", "theta",
                     "--values", "", "--out", str(out)]) == 1
        assert not out.exists()

    def test_unknown_parameter_rejected(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text(desk_config_text())
        assert main(["sweep", "--config", str(cfg_path), "--param", "eps",
                     "--values", "0.1", "--out", str(tmp_path / "s")]) == 1


class TestCmdValidateAndDefaults:
    def test_assembly_suite_passes(self, capsys):
        assert main(["validate", "--suite", "assembly"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_conservation_suite_reports_drift(self, capsys):
        # 500 steps of the reference setup at nx = 32; slow but the drift
        # line is an explicit contract of the command
        assert main(["validate", "--suite", "conservation"]) == 0
        out = capsys.readouterr().out
        assert "trait mass drift" in out and "[FAIL]" not in out

    @pytest.mark.parametrize("suite", ["energy", "convergence", "scenario"])
    def test_remaining_suites_pass(self, suite, capsys):
        assert main(["validate", "--suite", suite]) == 0
        assert "[FAIL]" not in capsys.readouterr().out

    def test_unknown_suite_is_usage_error(self):
        assert main(["validate", "--suite", "everything"]) == 1

    def test_print_defaults_round_trips(self, capsys):
        assert main(["print-defaults"]) == 0
        text = capsys.readouterr().out
        assert parse_config(text) == default_config()
        assert "eps = 0.01" in text
        assert "b = 10000.0" in text
