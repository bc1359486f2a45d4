"""Integration tests for the active-rays CLI."""

import json
import subprocess
import sys

import numpy as np
import pytest
from typer.testing import CliRunner

from active_rays import cli_main
from active_rays.contour_geometry import init_circle, to_cartesian
from active_rays.energy_landscape import EnergyLandscape
from active_rays.file_formats import (read_contour_csv, read_mask_pgm,
                                      write_contour_csv, write_emap,
                                      write_mask_pgm)
from active_rays.raster_metrics import Mask

DISK_SPEC = {
    "height": 64, "width": 64,
    "shape": {"kind": "disk", "center": [32, 32], "radius": 20},
    "d_scale": 1.0, "beta": 0.2, "kappa": 0.3, "blur_sigma": 1.0,
}


def run_cli(*args, cwd=None):
    """Helper to run the CLI and capture output."""
    cmd = [sys.executable, "-m", "active_rays"] + [str(arg) for arg in args]
    result = subprocess.run(
        cmd,
        capture_output=True,
        text=True,
        timeout=120,
        encoding="utf-8",
        cwd=cwd,
    )
    return result


def _write_spec(path, document):
    path.write_text(json.dumps(document))
    return path


def _first_pixels(count, shape=(10, 10)):
    bits = np.zeros(shape[0] * shape[1], dtype=bool)
    bits[:count] = True
    return Mask(bits.reshape(shape))


class TestCLIIntegration:
    """Integration tests for the CLI."""

    def test_cli_help(self):
        """Test help output."""
        result = run_cli("--help")
        assert result.returncode == 0
        for command in ("synth", "evolve", "eval", "render"):
            assert command in result.stdout

    def test_cli_unknown_flag(self):
        """Test that a bad flag is a usage error."""
        result = run_cli("evolve", "--no-such-flag")
        assert result.returncode == 2


class TestSynthCommand:
    """Tests for the synth command."""

    def test_synth_writes_outputs(self, tmp_path):
        """Test landscape size and mask header."""
        spec = _write_spec(tmp_path / "disk.json", DISK_SPEC)
        result = run_cli("synth", spec, "--out", tmp_path / "disk.emap",
                         "--mask", tmp_path / "work" / "disk_gt.pgm")
        assert result.returncode == 0, result.stderr
        assert (tmp_path / "disk.emap").stat().st_size == 16 + 12 * 64 * 64
        assert (tmp_path / "work" / "disk_gt.pgm").read_bytes().startswith(b"P5")

    def test_synth_malformed_json(self, tmp_path):
        """Test exit code 2 on a file that is not JSON."""
        spec = tmp_path / "bad.json"
        spec.write_text("{\"height\": 64,")
        result = run_cli("synth", spec, "--out", tmp_path / "a.emap", "--mask", tmp_path / "a.pgm")
        assert result.returncode == 2
        assert "Error" in result.stderr
        assert not (tmp_path / "a.emap").exists()

    def test_synth_zero_area(self, tmp_path):
        """Test exit code 3 for a zero-radius disk."""
        document = dict(DISK_SPEC, shape={"kind": "disk", "center": [32, 32], "radius": 0})
        spec = _write_spec(tmp_path / "zero.json", document)
        result = run_cli("synth", spec, "--out", tmp_path / "a.emap", "--mask", tmp_path / "a.pgm")
        assert result.returncode == 3

    def test_synth_shape_outside_image(self, tmp_path):
        """Test exit code 2 for a shape off the image."""
        document = dict(DISK_SPEC, shape={"kind": "disk", "center": [300, 300], "radius": 5})
        spec = _write_spec(tmp_path / "far.json", document)
        result = run_cli("synth", spec, "--out", tmp_path / "a.emap", "--mask", tmp_path / "a.pgm")
        assert result.returncode == 2

    def test_synth_quadrilateral(self, tmp_path):
        """Test a four-vertex polygon spec."""
        vertices = [[10, 10], [50, 12], [54, 38], [20, 40]]
        document = dict(DISK_SPEC, shape={"kind": "polygon", "vertices": vertices})
        spec = _write_spec(tmp_path / "quad.json", document)
        result = run_cli("synth", spec, "--out", tmp_path / "q.emap", "--mask", tmp_path / "q.pgm")
        assert result.returncode == 0, result.stderr
        assert read_mask_pgm(tmp_path / "q.pgm").count == pytest.approx(1036, rel=0.05)

    def test_synth_fractional_height(self, tmp_path):
        """Test exit code 2 for a non-integer image height."""
        spec = _write_spec(tmp_path / "frac.json", dict(DISK_SPEC, height=64.7))
        result = run_cli("synth", spec, "--out", tmp_path / "a.emap", "--mask", tmp_path / "a.pgm")
        assert result.returncode == 2


class TestEvolveCommand:
    """Tests for the evolve command."""

    def test_zero_landscape_keeps_initial_circle(self, tmp_path):
        """Test that nothing moves on an all-zero landscape."""
        write_emap(tmp_path / "zero.emap", EnergyLandscape.constant(64, 64))
        result = run_cli("evolve", "--landscape", tmp_path / "zero.emap",
                         "--out", tmp_path / "c.csv", "--trace", tmp_path / "t.json")
        assert result.returncode == 0, result.stderr

        expected = to_cartesian(init_circle((32, 32), 0.25 * 31, 60, rho_max=31))
        np.testing.assert_allclose(read_contour_csv(tmp_path / "c.csv"), expected, atol=1e-12)
        trace = json.loads((tmp_path / "t.json").read_text())
        assert trace["status"] == "converged"

    def test_disk_pipeline(self, tmp_path):
        """Test synth, evolve and eval end to end on a disk."""
        spec = _write_spec(tmp_path / "disk.json", DISK_SPEC)
        work = tmp_path / "work"
        assert run_cli("synth", spec, "--out", tmp_path / "disk.emap",
                       "--mask", work / "disk_gt.pgm").returncode == 0
        result = run_cli("evolve", "--landscape", tmp_path / "disk.emap", "--init-radius", 8,
                         "--out", tmp_path / "disk.csv", "--trace", tmp_path / "trace.json",
                         "--mask", work / "disk_pred.pgm")
        assert result.returncode == 0, result.stderr

        trace = json.loads((tmp_path / "trace.json").read_text())
        assert trace["schema"] == "active-rays/trace"
        assert trace["status"] == "converged"
        energies = [trace["initial_energy"]] + trace["energy_total"]
        assert all(b <= a + 1e-3 for a, b in zip(energies, energies[1:]))

        result = run_cli("eval", work, "--out", tmp_path / "report.json")
        assert result.returncode == 0, result.stderr
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["miou"] >= 0.95
        assert "mIoU" in result.stdout

    def test_missing_landscape(self, tmp_path):
        """Test exit code 2 when the landscape file does not exist."""
        result = run_cli("evolve", "--landscape", tmp_path / "nope.emap", "--out", tmp_path / "c.csv")
        assert result.returncode == 2

    def test_corrupt_landscape(self, tmp_path):
        """Test exit code 2 on a file with a bad magic."""
        (tmp_path / "bad.emap").write_bytes(b"JUNK" + bytes(12))
        result = run_cli("evolve", "--landscape", tmp_path / "bad.emap", "--out", tmp_path / "c.csv")
        assert result.returncode == 2

    def test_numerical_failure_writes_trace(self, tmp_path):
        """Test exit code 4 with the partial trace still exported."""
        write_emap(tmp_path / "k.emap", EnergyLandscape.constant(32, 32, kappa=1.0))
        result = run_cli("evolve", "--landscape", tmp_path / "k.emap", "--out", tmp_path / "c.csv",
                         "--trace", tmp_path / "t.json", "--gamma", "1e-320", "--no-backtracking")
        assert result.returncode == 4
        assert json.loads((tmp_path / "t.json").read_text())["iterations"] == 0
        assert not (tmp_path / "c.csv").exists()

    def test_deterministic_output(self, tmp_path):
        """Test byte-identical contour and trace files across runs."""
        spec = _write_spec(tmp_path / "disk.json", DISK_SPEC)
        run_cli("synth", spec, "--out", tmp_path / "disk.emap", "--mask", tmp_path / "gt.pgm")
        for name in ("one", "two"):
            result = run_cli("evolve", "-l", tmp_path / "disk.emap", "--init-radius", 8,
                             "--out", tmp_path / f"{name}.csv", "--trace", tmp_path / f"{name}.json")
            assert result.returncode == 0, result.stderr
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()
        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()


class TestEvalCommand:
    """Tests for the eval command."""

    def test_identical_masks(self, tmp_path):
        """Test a perfect prediction."""
        mask = _first_pixels(40)
        write_mask_pgm(tmp_path / "a_pred.pgm", mask)
        write_mask_pgm(tmp_path / "a_gt.pgm", mask)
        result = run_cli("eval", tmp_path)
        assert result.returncode == 0, result.stderr
        assert "mIoU  1.000" in result.stdout

    def test_two_samples(self, tmp_path):
        """Test mIoU 0.700 and area RMSE from two samples."""
        for sample_id, count in (("a", 8), ("b", 6)):
            write_mask_pgm(tmp_path / f"{sample_id}_pred.pgm", _first_pixels(count))
            write_mask_pgm(tmp_path / f"{sample_id}_gt.pgm", _first_pixels(10))
        result = run_cli("eval", tmp_path, "--resolution-m", 1.0, "-t", "json",
                         "--table", tmp_path / "out" / "table.txt")
        assert result.returncode == 0, result.stderr

        report = json.loads(result.stdout)
        assert report["miou"] == pytest.approx(0.7)
        assert report["rmse_m2"] == pytest.approx(10 ** 0.5, rel=1e-5)
        assert "mIoU  0.700" in (tmp_path / "out" / "table.txt").read_text()

    def test_empty_directory(self, tmp_path):
        """Test exit code 5 when nothing can be paired."""
        result = run_cli("eval", tmp_path)
        assert result.returncode == 5

    def test_unmatched_prediction(self, tmp_path):
        """Test exit code 5 for a prediction without ground truth."""
        write_mask_pgm(tmp_path / "a_pred.pgm", _first_pixels(4))
        result = run_cli("eval", tmp_path)
        assert result.returncode == 5
        assert "a_gt.pgm" in result.stderr

    def test_dimension_mismatch(self, tmp_path):
        """Test exit code 6 for masks of different size."""
        write_mask_pgm(tmp_path / "a_pred.pgm", Mask.empty(10, 10))
        write_mask_pgm(tmp_path / "a_gt.pgm", Mask.empty(10, 12))
        result = run_cli("eval", tmp_path)
        assert result.returncode == 6

    def test_from_contours(self, tmp_path):
        """Test scoring vertex files rasterized on the fly."""
        square = np.array([(2.0, 2.0), (8.0, 2.0), (8.0, 8.0), (2.0, 8.0)])
        write_contour_csv(tmp_path / "s_pred.csv", square)
        write_contour_csv(tmp_path / "s_gt.csv", square)
        result = run_cli("eval", tmp_path, "--from-contours", "--height", 10, "--width", 10)
        assert result.returncode == 0, result.stderr
        assert "mIoU  1.000" in result.stdout

    def test_from_contours_needs_size(self, tmp_path):
        """Test that --from-contours without a raster size is a usage error."""
        result = run_cli("eval", tmp_path, "--from-contours")
        assert result.returncode == 2


class TestRenderCommand:
    """Tests for the render command."""

    @pytest.fixture
    def landscape(self, tmp_path):
        path = tmp_path / "disk.emap"
        spec = _write_spec(tmp_path / "disk.json", DISK_SPEC)
        assert run_cli("synth", spec, "--out", path, "--mask", tmp_path / "gt.pgm").returncode == 0
        return path

    @pytest.fixture
    def contour(self, tmp_path):
        path = tmp_path / "c.csv"
        write_contour_csv(path, to_cartesian(init_circle((32, 32), 20, 60)))
        return path

    def test_render_prediction(self, tmp_path, landscape, contour):
        """Test one yellow path over the D map."""
        result = run_cli("render", "--landscape", landscape, "--pred", contour,
                         "--out", tmp_path / "o.svg")
        assert result.returncode == 0, result.stderr
        svg = (tmp_path / "o.svg").read_text()
        assert svg.count("<path") == 1
        assert "#ffff00" in svg
        assert "data:image/png;base64," in svg

    def test_render_both_roles(self, tmp_path, landscape, contour):
        """Test a ground-truth and a predicted path."""
        result = run_cli("render", "-l", landscape, "--gt", contour, "--pred", contour,
                         "--out", tmp_path / "o.svg")
        assert result.returncode == 0, result.stderr
        svg = (tmp_path / "o.svg").read_text()
        assert svg.count("<path") == 2
        assert "#0000ff" in svg

    def test_render_contour_outside(self, tmp_path, landscape):
        """Test exit code 6 for a contour beyond the background."""
        far = tmp_path / "far.csv"
        write_contour_csv(far, to_cartesian(init_circle((100, 100), 5, 12)))
        result = run_cli("render", "-l", landscape, "--pred", far, "--out", tmp_path / "o.svg")
        assert result.returncode == 6

    def test_render_needs_background(self, tmp_path, contour):
        """Test that a background is required."""
        result = run_cli("render", "--pred", contour, "--out", tmp_path / "o.svg")
        assert result.returncode == 2


def test_mask_written_by_evolve_matches_rasterizer(tmp_path):
    """Test that --mask holds the rasterized final contour."""
    write_emap(tmp_path / "zero.emap", EnergyLandscape.constant(40, 40))
    result = run_cli("evolve", "-l", tmp_path / "zero.emap", "--init-radius", 10,
                     "--out", tmp_path / "c.csv", "--mask", tmp_path / "m.pgm")
    assert result.returncode == 0, result.stderr
    mask = read_mask_pgm(tmp_path / "m.pgm")
    assert mask.shape == (40, 40)
    assert mask.count == pytest.approx(np.pi * 100, rel=0.05)


class TestReadFailures:
    """Tests for inputs that exist but cannot be read."""

    @staticmethod
    def _refuse(path, *args, **kwargs):
        raise PermissionError(13, "Permission denied", str(path))

    def test_synth_unreadable_spec(self, tmp_path, monkeypatch):
        """Test exit code 1 when the shape file cannot be read."""
        spec = _write_spec(tmp_path / "disk.json", DISK_SPEC)
        monkeypatch.setattr(cli_main, "load_shape_spec", self._refuse)
        result = CliRunner().invoke(cli_main.app, ["synth", str(spec), "--out", str(tmp_path / "a.emap"),
                                                   "--mask", str(tmp_path / "a.pgm")])
        assert result.exit_code == 1
        assert not (tmp_path / "a.emap").exists()

    def test_evolve_unreadable_landscape(self, tmp_path, monkeypatch):
        """Test exit code 1 when the landscape cannot be read."""
        write_emap(tmp_path / "zero.emap", EnergyLandscape.constant(16, 16))
        monkeypatch.setattr(cli_main, "read_emap", self._refuse)
        result = CliRunner().invoke(cli_main.app, ["evolve", "-l", str(tmp_path / "zero.emap"),
                                                   "--out", str(tmp_path / "c.csv")])
        assert result.exit_code == 1
        assert not (tmp_path / "c.csv").exists()

    def test_eval_unreadable_mask(self, tmp_path, monkeypatch):
        """Test exit code 1 when a mask cannot be read."""
        write_mask_pgm(tmp_path / "a_pred.pgm", _first_pixels(4))
        write_mask_pgm(tmp_path / "a_gt.pgm", _first_pixels(4))
        monkeypatch.setattr(cli_main, "read_mask_pgm", self._refuse)
        result = CliRunner().invoke(cli_main.app, ["eval", str(tmp_path)])
        assert result.exit_code == 1

    def test_render_unreadable_contour(self, tmp_path, monkeypatch):
        """Test exit code 1 when a contour file cannot be read."""
        write_emap(tmp_path / "zero.emap", EnergyLandscape.constant(16, 16))
        write_contour_csv(tmp_path / "c.csv", to_cartesian(init_circle((8, 8), 3, 12)))
        monkeypatch.setattr(cli_main, "read_contour_csv", self._refuse)
        result = CliRunner().invoke(cli_main.app, ["render", "-l", str(tmp_path / "zero.emap"),
                                                   "--pred", str(tmp_path / "c.csv"),
                                                   "--out", str(tmp_path / "o.svg")])
        assert result.exit_code == 1
        assert not (tmp_path / "o.svg").exists()
